//! Density estimators.
//!
//! [`DensityEstimate`] is the weight-function estimator
//! `f̂(x) = (1/n) Σ W(X_i, x)` for one of the asymmetric kernels. Every
//! estimator here divides by `n`, including forms that are sometimes written
//! without it.
//!
//! The symmetric-kernel estimators live on the real line and take plain
//! slices: the fixed-bandwidth KDE ([`evaluate_standard_kde`]) and the shifted
//! balloon / sample-smoothing estimators ([`evaluate_shifted`]).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::kernels::{
    kernel_moments, FrozenKernel, KernelMoments, KernelSpec, Role, SymmetricKernel, ORDER_TOLERANCE,
};
use crate::oracle::quadrature::{
    integrate_positive_with_breaks, integrate_real_line_with_breaks, QuadratureOptions,
    QuadratureResult,
};
use crate::par;

/// Validated positive observations with cached logarithms.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    values: Vec<f64>,
    logs: Vec<f64>,
    log_mean: f64,
    log_std: f64,
}

impl SampleSet {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientSamples { needed: 1, got: 0 });
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::domain(format!(
                "observation {} is {v}; samples must be finite and > 0",
                i + 1
            )));
        }
        let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
        let n = logs.len() as f64;
        let log_mean = logs.iter().sum::<f64>() / n;
        let log_std = if logs.len() < 2 {
            0.0
        } else {
            (logs.iter().map(|l| (l - log_mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Ok(Self {
            values,
            logs,
            log_mean,
            log_std,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn logs(&self) -> &[f64] {
        &self.logs
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Mean of `ln X_i`.
    pub fn log_mean(&self) -> f64 {
        self.log_mean
    }

    /// Standard deviation of `ln X_i` with the `n − 1` divisor; zero when `n = 1`.
    pub fn log_std(&self) -> f64 {
        self.log_std
    }

    /// Concatenation of two sample sets.
    pub fn merge(&self, other: &SampleSet) -> SampleSet {
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        SampleSet::new(values).expect("both inputs were valid")
    }

    /// Up to `max` sample values chosen by rank, always including the extremes.
    /// Used as quadrature breakpoints.
    pub(crate) fn rank_breaks(&self, max: usize) -> Vec<f64> {
        let mut sorted = self.values.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        if n <= max {
            return sorted;
        }
        let tail = (max / 8).max(1);
        let mut out: Vec<f64> = sorted[..tail].to_vec();
        out.extend_from_slice(&sorted[n - tail..]);
        let inner = max - 2 * tail;
        for k in 0..inner {
            out.push(sorted[tail + k * (n - 2 * tail) / inner]);
        }
        out
    }
}

/// Spacing of an evaluation grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Geometric,
    Arithmetic,
}

/// Ordered evaluation points; both endpoints are hit exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    points: Vec<f64>,
    spacing: Spacing,
}

impl Grid {
    pub fn new(min: f64, max: f64, count: usize, spacing: Spacing) -> Result<Self> {
        if count < 2 {
            return Err(Error::invalid(format!(
                "grid needs at least 2 points, got {count}"
            )));
        }
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::invalid(format!(
                "grid bounds must be finite with min < max, got [{min}, {max}]"
            )));
        }
        if spacing == Spacing::Geometric && min <= 0.0 {
            return Err(Error::invalid(format!(
                "geometric grid needs min > 0, got {min}"
            )));
        }
        let last = (count - 1) as f64;
        let points = (0..count)
            .map(|i| {
                if i == 0 {
                    min
                } else if i == count - 1 {
                    max
                } else {
                    let t = i as f64 / last;
                    match spacing {
                        Spacing::Geometric => (min.ln() + t * (max.ln() - min.ln())).exp(),
                        Spacing::Arithmetic => min + t * (max - min),
                    }
                }
            })
            .collect();
        Ok(Self { points, spacing })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// An asymmetric-kernel estimator bound to its samples.
#[derive(Debug, Clone)]
pub struct DensityEstimate {
    spec: KernelSpec,
    samples: SampleSet,
    /// One kernel per sample for the proper role; empty for the improper role.
    frozen: Vec<FrozenKernel>,
}

const MAX_BREAKS: usize = 64;

impl DensityEstimate {
    pub fn new(spec: KernelSpec, samples: SampleSet) -> Result<Self> {
        let frozen = match spec.role() {
            Role::Proper => samples
                .values()
                .iter()
                .map(|&y| spec.freeze(y))
                .collect::<Result<Vec<_>>>()?,
            Role::Improper => Vec::new(),
        };
        Ok(Self {
            spec,
            samples,
            frozen,
        })
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn samples(&self) -> &SampleSet {
        &self.samples
    }

    /// `(1/n) Σ W(X_i, x)`.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !(x.is_finite() && x >= 0.0) {
            return Err(Error::domain(format!(
                "evaluation point must be finite and >= 0, got {x}"
            )));
        }
        let n = self.samples.len() as f64;
        let sum = match self.spec.role() {
            Role::Improper => {
                let k = self.spec.freeze(x)?;
                self.samples
                    .values()
                    .iter()
                    .zip(self.samples.logs())
                    .map(|(&y, &ly)| k.ln_pdf_with_log(y, ly).exp())
                    .sum::<f64>()
            }
            Role::Proper if x > 0.0 => {
                let lx = x.ln();
                self.frozen
                    .iter()
                    .map(|k| k.ln_pdf_with_log(x, lx).exp())
                    .sum::<f64>()
            }
            Role::Proper => self.frozen.iter().map(|k| k.pdf(0.0)).sum::<f64>(),
        };
        Ok(sum / n)
    }

    /// Evaluates at every point, in parallel when enabled.
    pub fn evaluate_many(&self, xs: &[f64]) -> Result<Vec<f64>> {
        par::try_map_slice(xs, |&x| self.evaluate(x))
    }

    pub fn evaluate_grid(&self, grid: &Grid) -> Result<Vec<f64>> {
        self.evaluate_many(grid.points())
    }

    /// Evaluates with domain errors mapped to zero density. Only meaningful
    /// where the estimator is undefined rather than wrong, which is the
    /// improper reciprocal inverse Gaussian below `σ²`.
    fn evaluate_or_zero(&self, x: f64) -> f64 {
        self.evaluate(x).unwrap_or(0.0)
    }

    fn breaks(&self) -> Vec<f64> {
        self.samples.rank_breaks(MAX_BREAKS)
    }

    /// `∫_0^∞ f̂(x) dx` by quadrature.
    pub fn integral(&self, opts: &QuadratureOptions) -> Result<QuadratureResult> {
        self.integrate_with(|v| v, opts)
    }

    /// `∫_0^∞ f̂(x)² dx` by quadrature.
    pub fn integral_of_square(&self, opts: &QuadratureOptions) -> Result<QuadratureResult> {
        self.integrate_with(|v| v * v, opts)
    }

    /// `∫_0^∞ (f̂(x) − f(x))² dx` by quadrature.
    pub fn integrated_squared_error(
        &self,
        f: impl Fn(f64) -> f64,
        opts: &QuadratureOptions,
    ) -> Result<QuadratureResult> {
        let mut breaks = self.breaks();
        breaks.push(1.0);
        integrate_positive_with_breaks(
            |x| {
                let d = self.evaluate_or_zero(x) - f(x);
                d * d
            },
            &breaks,
            opts,
        )
    }

    fn integrate_with(
        &self,
        g: impl Fn(f64) -> f64,
        opts: &QuadratureOptions,
    ) -> Result<QuadratureResult> {
        integrate_positive_with_breaks(|x| g(self.evaluate_or_zero(x)), &self.breaks(), opts)
    }
}

/// `(1/(nh)) Σ K((X_i − x)/h)`.
pub fn evaluate_standard_kde(
    samples: &[f64],
    kernel: &SymmetricKernel,
    h: f64,
    x: f64,
) -> Result<f64> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::invalid(format!("bandwidth must be > 0, got {h}")));
    }
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let s: f64 = samples.iter().map(|&xi| kernel.eval((xi - x) / h)).sum();
    Ok(s / (samples.len() as f64 * h))
}

/// Which of the two shifted estimators a descriptor defines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftedVariant {
    /// Bandwidth and shift depend on the evaluation point.
    Balloon,
    /// Bandwidth and shift depend on each sample.
    SampleSmoothing,
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Default bound on `|δ|`.
pub const DELTA_CAP: f64 = 1e6;

/// A symmetric kernel together with a bandwidth function `h` and shift `δ`.
/// The kernel order `p` in the shift `h^p δ` comes from the kernel's moments.
#[derive(Clone)]
pub struct ShiftedEstimatorDescriptor {
    variant: ShiftedVariant,
    kernel: SymmetricKernel,
    moments: KernelMoments,
    h: ScalarFn,
    delta: ScalarFn,
    delta_cap: f64,
}

impl fmt::Debug for ShiftedEstimatorDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ShiftedEstimatorDescriptor")
            .field("variant", &self.variant)
            .field("kernel", &self.kernel)
            .field("moments", &self.moments)
            .field("delta_cap", &self.delta_cap)
            .finish_non_exhaustive()
    }
}

impl ShiftedEstimatorDescriptor {
    pub fn new(
        variant: ShiftedVariant,
        kernel: SymmetricKernel,
        h: impl Fn(f64) -> f64 + Send + Sync + 'static,
        delta: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let moments = kernel_moments(&kernel, 8, ORDER_TOLERANCE)?;
        Ok(Self {
            variant,
            kernel,
            moments,
            h: Arc::new(h),
            delta: Arc::new(delta),
            delta_cap: DELTA_CAP,
        })
    }

    pub fn with_delta_cap(mut self, cap: f64) -> Self {
        self.delta_cap = cap;
        self
    }

    pub fn variant(&self) -> ShiftedVariant {
        self.variant
    }

    pub fn kernel(&self) -> &SymmetricKernel {
        &self.kernel
    }

    pub fn moments(&self) -> &KernelMoments {
        &self.moments
    }

    pub fn order(&self) -> usize {
        self.moments.order
    }

    pub fn bandwidth_fn(&self) -> &ScalarFn {
        &self.h
    }

    pub fn shift_fn(&self) -> &ScalarFn {
        &self.delta
    }

    /// `(h(a), h(a)^p δ(a))`, checked.
    fn scale_and_shift(&self, a: f64) -> Result<(f64, f64)> {
        let h = (self.h)(a);
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::domain(format!("bandwidth h({a}) = {h} must be > 0")));
        }
        let d = (self.delta)(a);
        if !(d.abs() <= self.delta_cap) {
            return Err(Error::domain(format!(
                "|delta({a})| = {} exceeds the cap {}",
                d.abs(),
                self.delta_cap
            )));
        }
        Ok((h, h.powi(self.order() as i32) * d))
    }
}

/// Shifted balloon or sample-smoothing estimate at `x`.
///
/// Balloon: `(1/n) Σ K((X_i − x − h^p(x)δ(x))/h(x)) / h(x)`.
/// Sample smoothing: `(1/n) Σ K((X_i − x + h^p(X_i)δ(X_i))/h(X_i)) / h(X_i)`.
pub fn evaluate_shifted(desc: &ShiftedEstimatorDescriptor, samples: &[f64], x: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let mut sum = 0.0;
    match desc.variant {
        ShiftedVariant::Balloon => {
            let (h, s) = desc.scale_and_shift(x)?;
            for &xi in samples {
                sum += desc.kernel.eval((xi - x - s) / h);
            }
            sum /= h;
        }
        ShiftedVariant::SampleSmoothing => {
            for &xi in samples {
                let (h, s) = desc.scale_and_shift(xi)?;
                sum += desc.kernel.eval((xi - x + s) / h) / h;
            }
        }
    }
    Ok(sum / samples.len() as f64)
}

/// `∫ f̂(x) dx` over the real line for a shifted estimate.
pub fn integrate_shifted(
    desc: &ShiftedEstimatorDescriptor,
    samples: &[f64],
    opts: &QuadratureOptions,
) -> Result<QuadratureResult> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let breaks: Vec<f64> = if sorted.len() > MAX_BREAKS {
        (0..MAX_BREAKS)
            .map(|k| sorted[k * (sorted.len() - 1) / (MAX_BREAKS - 1)])
            .collect()
    } else {
        sorted
    };
    // Domain errors cannot be swallowed here: the estimate is defined
    // everywhere the descriptor is, so an error is a real failure.
    let failure = std::sync::Mutex::new(None);
    let r = integrate_real_line_with_breaks(
        |x| match evaluate_shifted(desc, samples, x) {
            Ok(v) => v,
            Err(e) => {
                failure.lock().expect("poisoned").get_or_insert(e);
                0.0
            }
        },
        &breaks,
        opts,
    )?;
    match failure.into_inner().expect("poisoned") {
        Some(e) => Err(e),
        None => Ok(r),
    }
}
