//! Leading-order bias, variance and MISE predictions.
//!
//! Two layers:
//!
//! 1. Generic shifted estimators. For the balloon form the mean is
//!    `A_0 + A_p + o(h^p)` with
//!    `A_k = h^k Σ_{j≥k} f^(j) [h^p δ]^{j−k} / (k!(j−k)!)`;
//!    for the sample-smoothing form it is `B_0 + B_p + o(h^p)` with
//!    `B_k = Σ_{j≥k} d^j/dx^j [f h^{k+p(j−k)} (−δ)^{j−k}] / (k!(j−k)!)`.
//!    Both series are truncated at `J` (default `p + 4`) and checked against
//!    direct quadrature of the defining integrals (the lemma oracles).
//! 2. Per-kernel closed forms for bias and variance, and the MISE under a
//!    log-normal reference, `A σ⁴ + B/(nσ)`.
//!
//! Closed-form log-normal MISE coefficients, with `P(a, b) = 12 + aΣ² + bΣ⁴`:
//!
//! | kernel, role                   | `128√π Σ⁵ A`                       | `2√π B`               |
//! |--------------------------------|------------------------------------|-----------------------|
//! | gamma improper, RIG proper     | `P(20, 9) e^{9Σ²/4 − 3μ}`          | `e^{Σ²/8 − μ/2}`      |
//! | gamma proper, RIG improper     | `P(4, 1) e^{9Σ²/4 − 3μ}`           | `e^{Σ²/8 − μ/2}`      |
//! | LN and BS, either role         | `P(4, 1) e^{Σ²/4 − μ}`             | `e^{Σ²/2 − μ}`        |
//! | IG improper                    | `P(68, 225) e^{Σ²/4 + μ}`          | `e^{9Σ²/8 − 3μ/2}`    |

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::estimators::ShiftedVariant;
use crate::kernels::{KernelFamily, KernelSpec, Role};
use crate::numdiff::{derivative, positive_step, real_line_step};
use crate::oracle::quadrature::{
    integrate_positive_with_breaks, integrate_real_line_with_breaks, QuadratureOptions,
};
use crate::reference::LogNormalRef;
use crate::special::normal_pdf;

/// Support of a reference density.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Positive,
    RealLine,
}

type DerivFn = Arc<dyn Fn(f64, usize) -> Result<f64> + Send + Sync>;

/// A density `f` with access to its derivatives, analytic where available.
#[derive(Clone)]
pub struct ReferenceDensity {
    pdf: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    derivs: Option<DerivFn>,
    domain: Domain,
}

impl std::fmt::Debug for ReferenceDensity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReferenceDensity")
            .field("analytic_derivatives", &self.derivs.is_some())
            .field("domain", &self.domain)
            .finish()
    }
}

impl ReferenceDensity {
    /// Log-normal reference with closed-form derivatives of every order.
    pub fn lognormal(r: LogNormalRef) -> Self {
        Self {
            pdf: Arc::new(move |x| r.pdf(x)),
            derivs: Some(Arc::new(move |x, j| r.deriv(x, j))),
            domain: Domain::Positive,
        }
    }

    /// Normal density; `f^(j)(x) = (−1)^j He_j(z) φ(z) / s^{j+1}`.
    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        if !(sd.is_finite() && sd > 0.0 && mean.is_finite()) {
            return Err(Error::invalid(
                "normal reference needs finite mean and sd > 0",
            ));
        }
        Ok(Self {
            pdf: Arc::new(move |x| normal_pdf((x - mean) / sd) / sd),
            derivs: Some(Arc::new(move |x, j| {
                let z = (x - mean) / sd;
                let (mut he_prev, mut he) = (0.0, 1.0);
                for k in 0..j {
                    let next = z * he - k as f64 * he_prev;
                    he_prev = he;
                    he = next;
                }
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                Ok(sign * he * normal_pdf(z) / sd.powi(j as i32 + 1))
            })),
            domain: Domain::RealLine,
        })
    }

    /// Any density; derivatives by extrapolated finite differences.
    pub fn from_fn(pdf: impl Fn(f64) -> f64 + Send + Sync + 'static, domain: Domain) -> Self {
        Self {
            pdf: Arc::new(pdf),
            derivs: None,
            domain,
        }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.pdf)(x)
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.derivs.is_some()
    }

    /// `f^(order)(x)`.
    pub fn derivative(&self, x: f64, order: usize) -> Result<f64> {
        if order == 0 {
            return Ok(self.value(x));
        }
        if let Some(d) = &self.derivs {
            return d(x, order);
        }
        self.fd_derivative(x, order)
    }

    fn fd_derivative(&self, x: f64, order: usize) -> Result<f64> {
        let d = derivative(|t| self.value(t), x, order, self.step(x, order))?;
        Ok(d.value)
    }

    fn step(&self, x: f64, order: usize) -> f64 {
        match self.domain {
            Domain::Positive => positive_step(x, order),
            Domain::RealLine => real_line_step(x, order),
        }
    }

    /// Checks the supplied derivatives against finite differences at `points`
    /// for orders `1..=max_order`, to `max(1e-5, 1e3 ulp)` relative.
    pub fn check_derivatives(&self, points: &[f64], max_order: usize) -> Result<()> {
        if self.derivs.is_none() {
            return Ok(());
        }
        for &x in points {
            for j in 1..=max_order {
                let exact = self.derivative(x, j)?;
                let fd = self.fd_derivative(x, j)?;
                let tol = 1e-5f64.max(1e3 * f64::EPSILON) * exact.abs().max(self.value(x).abs());
                if (exact - fd).abs() > tol {
                    return Err(Error::Numeric(format!(
                        "derivative of order {j} at {x}: supplied {exact}, finite difference {fd}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Whether a report is pointwise or integrated over the domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum At {
    Point(f64),
    Integrated,
}

/// Powers of σ (or of `h`) and `n` carried by each leading term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeadingOrder {
    pub bias_sigma_power: i32,
    pub variance_sigma_power: i32,
    pub variance_n_power: i32,
}

/// Leading-order bias, variance and `mse = bias² + variance`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticReport {
    pub bias: f64,
    pub variance: f64,
    pub mse: f64,
    pub at: At,
    pub leading_order: LeadingOrder,
}

impl AsymptoticReport {
    pub fn new(bias: f64, variance: f64, at: At, leading_order: LeadingOrder) -> Self {
        Self {
            bias,
            variance,
            mse: bias * bias + variance,
            at,
            leading_order,
        }
    }
}

const TABLE2_ORDER: LeadingOrder = LeadingOrder {
    bias_sigma_power: 2,
    variance_sigma_power: -1,
    variance_n_power: -1,
};

/// Default series truncation `J = p + 4`.
pub const fn default_truncation(p: usize) -> usize {
    p + 4
}

/// Terms below this fraction of the partial sum end a series early.
const TAIL_STOP: f64 = 1e-12;

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn check_bandwidth(h: f64, x: f64) -> Result<f64> {
    if h.is_finite() && h > 0.0 {
        Ok(h)
    } else {
        Err(Error::domain(format!("bandwidth h({x}) = {h} must be > 0")))
    }
}

/// Truncated balloon coefficient
/// `A_k = h^k Σ_{j=k}^{J} f^(j)(x) [h^p δ]^{j−k} / (k!(j−k)!)`.
pub fn balloon_coefficient_a(
    k: usize,
    x: f64,
    f: &ReferenceDensity,
    h_fn: &dyn Fn(f64) -> f64,
    delta_fn: &dyn Fn(f64) -> f64,
    p: usize,
    truncation: usize,
) -> Result<f64> {
    if truncation < k {
        return Err(Error::invalid(format!(
            "truncation J = {truncation} must be >= k = {k}"
        )));
    }
    let h = check_bandwidth(h_fn(x), x)?;
    let shift = h.powi(p as i32) * delta_fn(x);
    let kf = factorial(k);
    let mut sum = 0.0;
    for j in k..=truncation {
        let m = j - k;
        let power = if m == 0 { 1.0 } else { shift.powi(m as i32) };
        if power == 0.0 {
            break;
        }
        let term = f.derivative(x, j)? * power / (kf * factorial(m));
        sum += term;
        if m > 0 && term.abs() < TAIL_STOP * sum.abs() {
            break;
        }
    }
    Ok(h.powi(k as i32) * sum)
}

/// Truncated sample-smoothing coefficient
/// `B_k = Σ_{j=k}^{J} d^j/dx^j [f h^{k+p(j−k)} (−δ)^{j−k}] / (k!(j−k)!)`,
/// with the derivatives taken by extrapolated central differences.
///
/// Fails when the finite-difference error of a term exceeds both the term
/// itself and `1e-10` of the larger of the partial sum and the term's natural
/// magnitude `|g(x)|/step^j`.
pub fn smoothing_coefficient_b(
    k: usize,
    x: f64,
    f: &ReferenceDensity,
    h_fn: &dyn Fn(f64) -> f64,
    delta_fn: &dyn Fn(f64) -> f64,
    p: usize,
    truncation: usize,
) -> Result<f64> {
    if truncation < k {
        return Err(Error::invalid(format!(
            "truncation J = {truncation} must be >= k = {k}"
        )));
    }
    check_bandwidth(h_fn(x), x)?;
    let kf = factorial(k);
    let mut sum: f64 = 0.0;
    for j in k..=truncation {
        let m = j - k;
        let hp = (k + p * m) as i32;
        let g = |y: f64| {
            let d = -delta_fn(y);
            let dm = if m == 0 { 1.0 } else { d.powi(m as i32) };
            f.value(y) * h_fn(y).powi(hp) * dm
        };
        let step = f.step(x, j);
        let d = derivative(g, x, j, step)?;
        let scale = kf * factorial(m);
        let term = d.value / scale;
        let noise = d.error / scale;
        // |g(x)|/step^j is the size a non-degenerate j-th derivative would have
        let magnitude = sum.abs().max(g(x).abs() / (scale * step.powi(j as i32)));
        if noise > term.abs() && noise > 1e-10 * magnitude {
            return Err(Error::Numeric(format!(
                "finite-difference noise {noise:.3e} swamps term j = {j} ({term:.3e}) of B_{k} at x = {x}"
            )));
        }
        sum += term;
        if m > 0 && term.abs() < TAIL_STOP * sum.abs() {
            break;
        }
    }
    Ok(sum)
}

/// Leading-order bias of a shifted estimator.
///
/// Balloon: `h^p δ f′ + h^p f^(p) / p!`.
/// Sample smoothing: `−(f h^p δ)′ + (h^p f)^(p) / p!`.
pub fn shifted_bias(
    variant: ShiftedVariant,
    x: f64,
    f: &ReferenceDensity,
    h_fn: &dyn Fn(f64) -> f64,
    delta_fn: &dyn Fn(f64) -> f64,
    p: usize,
) -> Result<f64> {
    let pf = factorial(p);
    match variant {
        ShiftedVariant::Balloon => {
            let hp = check_bandwidth(h_fn(x), x)?.powi(p as i32);
            Ok(hp * delta_fn(x) * f.derivative(x, 1)? + hp * f.derivative(x, p)? / pf)
        }
        ShiftedVariant::SampleSmoothing => {
            check_bandwidth(h_fn(x), x)?;
            let shift = |y: f64| f.value(y) * h_fn(y).powi(p as i32) * delta_fn(y);
            let spread = |y: f64| h_fn(y).powi(p as i32) * f.value(y);
            let d1 = derivative(shift, x, 1, f.step(x, 1))?;
            let dp = derivative(spread, x, p, f.step(x, p))?;
            Ok(-d1.value + dp.value / pf)
        }
    }
}

/// `f(x) κ / (n h(x))`, shared by both shifted variants.
pub fn shifted_variance(
    x: f64,
    f: &ReferenceDensity,
    h_fn: &dyn Fn(f64) -> f64,
    kappa: f64,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let h = check_bandwidth(h_fn(x), x)?;
    Ok(f.value(x) * kappa / (n as f64 * h))
}

/// Per-kernel leading-order bias.
///
/// | kernel | improper | proper |
/// |---|---|---|
/// | gamma | `σ²(f′ + x f″/2)` | `σ² x f″/2` |
/// | LN, BS | `σ² x (f′ + x f″)/2` | `σ² (x (x f)′)′/2` |
/// | IG | `σ² x³ f″/2` | unsupported |
/// | RIG | `σ² x f″/2` | `σ²(f′ + x f″/2)` |
pub fn table2_bias(spec: &KernelSpec, x: f64, f: &ReferenceDensity) -> Result<f64> {
    spec.require_asymptotics()?;
    let s2 = spec.sigma() * spec.sigma();
    let d1 = f.derivative(x, 1)?;
    let d2 = f.derivative(x, 2)?;
    use KernelFamily::*;
    let b = match (spec.family(), spec.role()) {
        (Gamma, Role::Improper) | (ReciprocalInverseGaussian, Role::Proper) => {
            s2 * (d1 + 0.5 * x * d2)
        }
        (Gamma, Role::Proper) | (ReciprocalInverseGaussian, Role::Improper) => 0.5 * s2 * x * d2,
        (LogNormal | BirnbaumSaunders, Role::Improper) => 0.5 * s2 * x * (d1 + x * d2),
        // (x (x f)′)′ = f + 3x f′ + x² f″
        (LogNormal | BirnbaumSaunders, Role::Proper) => {
            0.5 * s2 * (f.value(x) + 3.0 * x * d1 + x * x * d2)
        }
        (InverseGaussian, Role::Improper) => 0.5 * s2 * x * x * x * d2,
        (InverseGaussian, Role::Proper) | (Gaussian, _) => unreachable!("rejected above"),
    };
    Ok(b)
}

/// Per-kernel leading-order variance: `f/(2nσ√(πx))` for gamma and RIG,
/// `f/(2√π nσx)` for LN and BS, `f/(2√π nσx^{3/2})` for IG.
pub fn table2_variance(spec: &KernelSpec, x: f64, f: &ReferenceDensity, n: usize) -> Result<f64> {
    spec.require_asymptotics()?;
    if n == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    if !(x > 0.0) {
        return Err(Error::domain(format!(
            "variance formula needs x > 0, got {x}"
        )));
    }
    let denom = 2.0 * PI.sqrt() * n as f64 * spec.sigma();
    let v = match spec.family() {
        KernelFamily::Gamma | KernelFamily::ReciprocalInverseGaussian => {
            f.value(x) / (denom * x.sqrt())
        }
        KernelFamily::LogNormal | KernelFamily::BirnbaumSaunders => f.value(x) / (denom * x),
        KernelFamily::InverseGaussian => f.value(x) / (denom * x.powf(1.5)),
        KernelFamily::Gaussian => unreachable!(),
    };
    Ok(v)
}

/// Per-kernel bias and variance as one report.
pub fn table2_report(
    spec: &KernelSpec,
    x: f64,
    f: &ReferenceDensity,
    n: usize,
) -> Result<AsymptoticReport> {
    let bias = table2_bias(spec, x, f)?;
    let variance = table2_variance(spec, x, f, n)?;
    Ok(AsymptoticReport::new(
        bias,
        variance,
        At::Point(x),
        TABLE2_ORDER,
    ))
}

/// Coefficients `(A, B)` of the log-normal-reference MISE `A σ⁴ + B/(nσ)`.
pub fn mise_coefficients(
    family: KernelFamily,
    role: Role,
    mu: f64,
    big_sigma: f64,
) -> Result<(f64, f64)> {
    if family == KernelFamily::InverseGaussian && role == Role::Proper {
        return Err(Error::UnsupportedAsymptotics { family, role });
    }
    if !(big_sigma.is_finite() && big_sigma > 0.0 && mu.is_finite()) {
        return Err(Error::invalid(format!(
            "need finite mu and Sigma > 0, got ({mu}, {big_sigma})"
        )));
    }
    let s2 = big_sigma * big_sigma;
    let s4 = s2 * s2;
    let a_denom = 128.0 * PI.sqrt() * big_sigma.powi(5);
    let b_denom = 2.0 * PI.sqrt();
    use KernelFamily::*;
    let (poly, a_exp, b_exp) = match (family, role) {
        (Gamma, Role::Improper) | (ReciprocalInverseGaussian, Role::Proper) => (
            12.0 + 20.0 * s2 + 9.0 * s4,
            2.25 * s2 - 3.0 * mu,
            s2 / 8.0 - mu / 2.0,
        ),
        (Gamma, Role::Proper) | (ReciprocalInverseGaussian, Role::Improper) => (
            12.0 + 4.0 * s2 + s4,
            2.25 * s2 - 3.0 * mu,
            s2 / 8.0 - mu / 2.0,
        ),
        (LogNormal | BirnbaumSaunders, _) => (12.0 + 4.0 * s2 + s4, 0.25 * s2 - mu, 0.5 * s2 - mu),
        (InverseGaussian, Role::Improper) => (
            12.0 + 68.0 * s2 + 225.0 * s4,
            0.25 * s2 + mu,
            1.125 * s2 - 1.5 * mu,
        ),
        (InverseGaussian, Role::Proper) => unreachable!(),
        (Gaussian, _) => return Err(Error::invalid("no log-normal MISE for the Gaussian kernel")),
    };
    Ok((poly * a_exp.exp() / a_denom, b_exp.exp() / b_denom))
}

/// Asymptotic MISE `A σ⁴ + B/(nσ)` under a log-normal reference `LN(μ, Σ)`.
pub fn mise_lognormal_reference(
    spec: &KernelSpec,
    mu: f64,
    big_sigma: f64,
    n: usize,
) -> Result<f64> {
    spec.require_asymptotics()?;
    if n == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let (a, b) = mise_coefficients(spec.family(), spec.role(), mu, big_sigma)?;
    let s = spec.sigma();
    Ok(a * s.powi(4) + b / (n as f64 * s))
}

/// Integrated report: bias² and variance parts of the log-normal MISE.
pub fn mise_report(
    spec: &KernelSpec,
    mu: f64,
    big_sigma: f64,
    n: usize,
) -> Result<AsymptoticReport> {
    spec.require_asymptotics()?;
    let (a, b) = mise_coefficients(spec.family(), spec.role(), mu, big_sigma)?;
    let s = spec.sigma();
    // bias holds √(∫bias²) so that mse = bias² + variance.
    let order = LeadingOrder {
        bias_sigma_power: 2,
        variance_sigma_power: -1,
        variance_n_power: -1,
    };
    Ok(AsymptoticReport::new(
        a.sqrt() * s * s,
        b / (n.max(1) as f64 * s),
        At::Integrated,
        order,
    ))
}

/// `∫_0^∞ [table2_bias² + table2_variance] dx` by quadrature under a
/// log-normal reference.
pub fn mise_by_quadrature(
    spec: &KernelSpec,
    reference: LogNormalRef,
    n: usize,
    opts: &QuadratureOptions,
) -> Result<f64> {
    spec.require_asymptotics()?;
    let f = ReferenceDensity::lognormal(reference);
    let failure = std::sync::Mutex::new(None);
    let r = integrate_positive_with_breaks(
        |x| {
            let v =
                table2_bias(spec, x, &f).and_then(|b| Ok(b * b + table2_variance(spec, x, &f, n)?));
            v.unwrap_or_else(|e| {
                failure.lock().expect("poisoned").get_or_insert(e);
                0.0
            })
        },
        &[reference.mean()],
        opts,
    )?;
    match failure.into_inner().expect("poisoned") {
        Some(e) => Err(e),
        None => Ok(r.value),
    }
}

/// Balloon lemma integral `∫ dy φ((y − x − h^p(x)δ(x))/h(x)) θ(y) / h(x)` by
/// adaptive quadrature over the given domain.
pub fn lemma_balloon_integral_oracle(
    phi: &dyn Fn(f64) -> f64,
    theta: &dyn Fn(f64) -> f64,
    h_fn: &dyn Fn(f64) -> f64,
    delta_fn: &dyn Fn(f64) -> f64,
    p: usize,
    x: f64,
    domain: Domain,
) -> Result<f64> {
    let h = check_bandwidth(h_fn(x), x)?;
    let centre = x + h.powi(p as i32) * delta_fn(x);
    let integrand = |y: f64| {
        let t = theta(y);
        if t == 0.0 {
            0.0
        } else {
            phi((y - centre) / h) * t / h
        }
    };
    let breaks = [centre, x, centre - 3.0 * h, centre + 3.0 * h];
    let opts = QuadratureOptions::with_tolerances(1e-13, 1e-11);
    let r = match domain {
        Domain::Positive => integrate_positive_with_breaks(integrand, &breaks, &opts)?,
        Domain::RealLine => integrate_real_line_with_breaks(integrand, &breaks, &opts)?,
    };
    Ok(r.value)
}

const MONOTONICITY_POINTS: usize = 4001;

/// Checks that `z(y, x) = (y − x + h^p(y)δ(y))/h(y)` is strictly monotone in
/// `y` on a grid spanning `[x·10⁻⁴, x·10⁴]` (positive domain) or
/// `x ± 10⁴·max(1, |x|)` (real line).
pub fn check_monotone_change_of_variables(
    h_fn: &dyn Fn(f64) -> f64,
    delta_fn: &dyn Fn(f64) -> f64,
    p: usize,
    x: f64,
    domain: Domain,
) -> Result<()> {
    let ys: Vec<f64> = match domain {
        Domain::Positive => {
            if !(x > 0.0) {
                return Err(Error::domain(format!(
                    "evaluation point must be > 0, got {x}"
                )));
            }
            let (lo, hi) = ((x * 1e-4).ln(), (x * 1e4).ln());
            (0..MONOTONICITY_POINTS)
                .map(|i| (lo + (hi - lo) * i as f64 / (MONOTONICITY_POINTS - 1) as f64).exp())
                .collect()
        }
        Domain::RealLine => {
            let w = 1e4 * x.abs().max(1.0);
            // sinh spacing concentrates points near x
            let a = (w).asinh();
            (0..MONOTONICITY_POINTS)
                .map(|i| x + (a * (2.0 * i as f64 / (MONOTONICITY_POINTS - 1) as f64 - 1.0)).sinh())
                .collect()
        }
    };
    let z = |y: f64| -> Result<f64> {
        let h = check_bandwidth(h_fn(y), y)?;
        Ok((y - x + h.powi(p as i32) * delta_fn(y)) / h)
    };
    let mut prev = z(ys[0])?;
    let mut direction = 0.0;
    for &y in &ys[1..] {
        let cur = z(y)?;
        let step = cur - prev;
        if step == 0.0 || (direction != 0.0 && step.signum() != direction) {
            return Err(Error::MonotonicityViolation { x, y });
        }
        direction = step.signum();
        prev = cur;
    }
    Ok(())
}

/// Sample-smoothing lemma integral
/// `∫ dy φ((y − x + h^p(y)δ(y))/h(y)) θ(y) / h(y)` by adaptive quadrature,
/// after checking that the change of variables is monotone.
pub fn lemma_smoothing_integral_oracle(
    phi: &dyn Fn(f64) -> f64,
    theta: &dyn Fn(f64) -> f64,
    h_fn: &dyn Fn(f64) -> f64,
    delta_fn: &dyn Fn(f64) -> f64,
    p: usize,
    x: f64,
    domain: Domain,
) -> Result<f64> {
    check_monotone_change_of_variables(h_fn, delta_fn, p, x, domain)?;
    let integrand = |y: f64| {
        let t = theta(y);
        if t == 0.0 {
            return 0.0;
        }
        let h = h_fn(y);
        if !(h > 0.0) {
            return 0.0;
        }
        phi((y - x + h.powi(p as i32) * delta_fn(y)) / h) * t / h
    };
    let h = check_bandwidth(h_fn(x), x)?;
    let breaks = [x, x - 3.0 * h, x + 3.0 * h];
    let opts = QuadratureOptions::with_tolerances(1e-13, 1e-11);
    let r = match domain {
        Domain::Positive => integrate_positive_with_breaks(integrand, &breaks, &opts)?,
        Domain::RealLine => integrate_real_line_with_breaks(integrand, &breaks, &opts)?,
    };
    Ok(r.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ln11() -> ReferenceDensity {
        ReferenceDensity::lognormal(LogNormalRef::new(1.0, 1.0).unwrap())
    }

    #[test]
    fn a_series_without_shift_is_single_term() {
        let f = ln11();
        let h = |_: f64| 0.3;
        let d = |_: f64| 0.0;
        for k in 0..=3 {
            let a = balloon_coefficient_a(k, 1.7, &f, &h, &d, 2, 7).unwrap();
            let want = 0.3f64.powi(k as i32) * f.derivative(1.7, k).unwrap() / factorial(k);
            assert!((a - want).abs() <= 1e-15 * want.abs(), "k={k}");
        }
        assert!(balloon_coefficient_a(3, 1.0, &f, &h, &d, 2, 2).is_err());
    }

    #[test]
    fn a0_normal_example() {
        let f = ReferenceDensity::normal(0.0, 1.0).unwrap();
        let a = balloon_coefficient_a(0, 0.0, &f, &|_| 0.1, &|_| 1.0, 2, 1).unwrap();
        assert!((a - 0.398_942_280_401_432_7).abs() < 1e-15);
    }

    #[test]
    fn a_and_b_agree_without_shift() {
        let f = ln11();
        let h = |_: f64| 0.2;
        let d = |_: f64| 0.0;
        for k in 0..=2 {
            let a = balloon_coefficient_a(k, 2.0, &f, &h, &d, 2, 6).unwrap();
            let b = smoothing_coefficient_b(k, 2.0, &f, &h, &d, 2, 6).unwrap();
            assert!((a - b).abs() < 1e-9, "k={k}: {a} vs {b}");
        }
    }

    #[test]
    fn normal_derivatives_are_hermite() {
        let f = ReferenceDensity::normal(0.5, 2.0).unwrap();
        f.check_derivatives(&[-1.0, 0.5, 3.0], 4).unwrap();
        ln11().check_derivatives(&[0.2, 1.0, 3.0, 10.0], 4).unwrap();
    }

    #[test]
    fn gamma_shapes_share_bias() {
        let f = ln11();
        let g = KernelSpec::new(KernelFamily::Gamma, Role::Proper, 0.2).unwrap();
        let r =
            KernelSpec::new(KernelFamily::ReciprocalInverseGaussian, Role::Improper, 0.2).unwrap();
        assert_eq!(
            table2_bias(&g, 1.5, &f).unwrap(),
            table2_bias(&r, 1.5, &f).unwrap()
        );
        let ig = KernelSpec::new(KernelFamily::InverseGaussian, Role::Proper, 0.2).unwrap();
        assert!(matches!(
            table2_bias(&ig, 1.0, &f),
            Err(Error::UnsupportedAsymptotics { .. })
        ));
        assert!(matches!(
            table2_variance(&ig, 1.0, &f, 10),
            Err(Error::UnsupportedAsymptotics { .. })
        ));
    }

    #[test]
    fn balloon_bias_of_gamma_shape() {
        let f = ln11();
        let s = 0.05;
        let h = move |x: f64| s * (x + s * s).sqrt();
        let d = move |x: f64| 1.0 / (x + s * s);
        let spec = KernelSpec::new(KernelFamily::Gamma, Role::Improper, s).unwrap();
        for x in [0.5, 1.0, 3.0] {
            let b = shifted_bias(ShiftedVariant::Balloon, x, &f, &h, &d, 2).unwrap();
            let t = table2_bias(&spec, x, &f).unwrap();
            // equal up to the σ⁴ f″/2 piece of h²
            let extra = 0.5 * s.powi(4) * f.derivative(x, 2).unwrap();
            assert!((b - t - extra).abs() < 1e-14, "x={x}");
        }
    }

    #[test]
    fn mise_closed_form_matches_quadrature() {
        let r = LogNormalRef::new(0.0, 1.0).unwrap();
        let opts = QuadratureOptions::with_tolerances(1e-14, 1e-12);
        for family in KernelFamily::ASYMMETRIC {
            for role in [Role::Improper, Role::Proper] {
                let spec = KernelSpec::new(family, role, 0.3).unwrap();
                if !spec.asymptotics_available() {
                    continue;
                }
                let closed = mise_lognormal_reference(&spec, 0.0, 1.0, 100).unwrap();
                let quad = mise_by_quadrature(&spec, r, 100, &opts).unwrap();
                assert!(
                    (closed - quad).abs() <= 1e-6 * closed,
                    "{family} {role}: {closed} vs {quad}"
                );
            }
        }
    }

    #[test]
    fn proper_ig_shape_is_not_monotone() {
        let s = 0.2;
        let h = move |y: f64| s * y.powf(1.5);
        let d = |_: f64| 0.0;
        let e = check_monotone_change_of_variables(&h, &d, 2, 1.0, Domain::Positive);
        assert!(matches!(e, Err(Error::MonotonicityViolation { .. })));
        let g = move |y: f64| s * (y + s * s).sqrt();
        check_monotone_change_of_variables(&g, &|y| 1.0 / (y + s * s), 2, 1.0, Domain::Positive)
            .unwrap();
    }

    #[test]
    fn balloon_oracle_is_classical_smoothed_mean() {
        let f = ReferenceDensity::normal(0.0, 1.0).unwrap();
        let h = 0.5;
        let l = lemma_balloon_integral_oracle(
            &normal_pdf,
            &|y| f.value(y),
            &|_| h,
            &|_| 0.0,
            2,
            0.3,
            Domain::RealLine,
        )
        .unwrap();
        // N(0,1) smoothed by N(0, h²) is N(0, 1 + h²).
        let s = (1.0f64 + h * h).sqrt();
        assert!((l - normal_pdf(0.3 / s) / s).abs() < 1e-12);
    }
}
