//! Bandwidth selection: closed-form plugin rules under a log-normal reference
//! and leave-one-out cross-validation.
//!
//! The cross-validation score is
//! `M(σ) = ∫ f̂² − (2/n) Σ_i f̂_{−i}(X_i)`, an unbiased estimate of
//! `MISE − ∫ f²`. For the proper gamma estimator `∫ f̂²` is a double sum of
//! [`gamma_overlap`] terms; every other estimator integrates `f̂²` numerically.

use std::f64::consts::LN_2;

use crate::asymptotics::mise_lognormal_reference;
use crate::error::{Error, Result};
use crate::estimators::{DensityEstimate, Grid, SampleSet, Spacing};
use crate::kernels::{KernelFamily, KernelSpec, Role};
use crate::oracle::quadrature::QuadratureOptions;
use crate::par;
use crate::special::ln_gamma;

/// Plugin bandwidth `σ*` minimizing the asymptotic MISE under `LN(μ, Σ)`.
///
/// Every cell has the form `2^{4/5} Σ e^{E} P^{−1/5} n^{−1/5}`:
///
/// | kernel, role | `E` | `P` |
/// |---|---|---|
/// | gamma improper, RIG proper | `μ/2 − 17Σ²/40` | `12 + 20Σ² + 9Σ⁴` |
/// | gamma proper, RIG improper | `μ/2 − 17Σ²/40` | `12 + 4Σ² + Σ⁴` |
/// | LN, BS | `Σ²/20` | `12 + 4Σ² + Σ⁴` |
/// | IG improper | `7Σ²/40 − μ/2` | `12 + 68Σ² + 225Σ⁴` |
pub fn plugin_bandwidth(
    family: KernelFamily,
    role: Role,
    mu: f64,
    big_sigma: f64,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    if !mu.is_finite() {
        return Err(Error::invalid(format!("log-mean must be finite, got {mu}")));
    }
    if !(big_sigma.is_finite() && big_sigma > 0.0) {
        return Err(Error::domain(format!(
            "log-standard-deviation must be > 0, got {big_sigma}"
        )));
    }
    let s2 = big_sigma * big_sigma;
    let s4 = s2 * s2;
    use KernelFamily::*;
    let (e, p) = match (family, role) {
        (Gamma, Role::Improper) | (ReciprocalInverseGaussian, Role::Proper) => {
            (mu / 2.0 - 17.0 * s2 / 40.0, 12.0 + 20.0 * s2 + 9.0 * s4)
        }
        (Gamma, Role::Proper) | (ReciprocalInverseGaussian, Role::Improper) => {
            (mu / 2.0 - 17.0 * s2 / 40.0, 12.0 + 4.0 * s2 + s4)
        }
        (LogNormal | BirnbaumSaunders, _) => (s2 / 20.0, 12.0 + 4.0 * s2 + s4),
        (InverseGaussian, Role::Improper) => {
            (7.0 * s2 / 40.0 - mu / 2.0, 12.0 + 68.0 * s2 + 225.0 * s4)
        }
        (InverseGaussian, Role::Proper) => {
            return Err(Error::UnsupportedAsymptotics { family, role })
        }
        (Gaussian, _) => return Err(Error::invalid("no plugin rule for the Gaussian kernel")),
    };
    Ok(2f64.powf(0.8) * big_sigma * e.exp() * (p * n as f64).powf(-0.2))
}

/// Plugin bandwidth with `(μ, Σ)` estimated from the samples.
pub fn plugin_from_samples(family: KernelFamily, role: Role, samples: &SampleSet) -> Result<f64> {
    let (mu, big_sigma) = crate::reference::estimate_log_params(samples)?;
    plugin_bandwidth(family, role, mu, big_sigma, samples.len())
}

/// `∫ G(x; 1 + x_i/σ², σ²) G(x; 1 + x_j/σ², σ²) dx`, evaluated in log space.
pub fn gamma_overlap(xi: f64, xj: f64, sigma: f64) -> Result<f64> {
    if !(xi >= 0.0 && xj >= 0.0 && xi.is_finite() && xj.is_finite()) {
        return Err(Error::domain(format!(
            "overlap needs finite xi, xj >= 0, got ({xi}, {xj})"
        )));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid(format!("sigma must be > 0, got {sigma}")));
    }
    let s2 = sigma * sigma;
    let v = ln_overlap(
        ln_gamma(1.0 + xi / s2),
        ln_gamma(1.0 + xj / s2),
        xi + xj,
        s2,
        sigma.ln(),
    );
    if !v.is_finite() || v > f64::MAX.ln() {
        return Err(Error::Numeric(format!("log overlap {v} out of range")));
    }
    Ok(v.exp())
}

#[inline]
fn ln_overlap(lg_i: f64, lg_j: f64, sum: f64, s2: f64, ln_sigma: f64) -> f64 {
    let k = 1.0 + sum / s2;
    ln_gamma(k) - k * LN_2 - (lg_i + lg_j) - 2.0 * ln_sigma
}

const PAIR_BLOCK: usize = 16;

/// `∫ f̂²` for the proper gamma estimator via [`gamma_overlap`].
pub fn proper_gamma_square_integral(samples: &SampleSet, sigma: f64) -> Result<f64> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid(format!("sigma must be > 0, got {sigma}")));
    }
    let xs = samples.values();
    let n = xs.len();
    let s2 = sigma * sigma;
    let ln_sigma = sigma.ln();
    let lg: Vec<f64> = xs.iter().map(|x| ln_gamma(1.0 + x / s2)).collect();
    // Rows i hold the diagonal term plus twice the terms j > i.
    let total = par::sum_range(n, PAIR_BLOCK, |i| {
        let mut row = ln_overlap(lg[i], lg[i], 2.0 * xs[i], s2, ln_sigma).exp();
        for j in i + 1..n {
            row += 2.0 * ln_overlap(lg[i], lg[j], xs[i] + xs[j], s2, ln_sigma).exp();
        }
        row
    });
    Ok(total / (n * n) as f64)
}

/// `Σ_i Σ_{j≠i} W(X_j, X_i)`.
fn leave_one_out_sum(spec: &KernelSpec, samples: &SampleSet) -> Result<f64> {
    let xs = samples.values();
    let logs = samples.logs();
    let n = xs.len();
    let rows = par::try_map_range(n, |i| -> Result<f64> {
        let mut row = 0.0;
        match spec.role() {
            Role::Improper => {
                let k = spec.freeze(xs[i])?;
                for j in (0..n).filter(|&j| j != i) {
                    row += k.ln_pdf_with_log(xs[j], logs[j]).exp();
                }
            }
            Role::Proper => {
                for j in (0..n).filter(|&j| j != i) {
                    row += spec.freeze(xs[j])?.ln_pdf_with_log(xs[i], logs[i]).exp();
                }
            }
        }
        Ok(row)
    })?;
    Ok(rows.into_iter().sum())
}

/// Leave-one-out cross-validation score `M(σ)` for `spec` with its σ
/// replaced by `sigma`.
pub fn loo_cv_score(spec: &KernelSpec, samples: &SampleSet, sigma: f64) -> Result<f64> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let spec = spec.with_sigma(sigma)?;
    let square = if spec.family() == KernelFamily::Gamma && spec.role() == Role::Proper {
        proper_gamma_square_integral(samples, sigma)?
    } else {
        let est = DensityEstimate::new(spec, samples.clone())?;
        est.integral_of_square(&QuadratureOptions::default())
            .map_err(|e| {
                Error::NonConvergence(format!(
                    "integral of the squared estimate at sigma = {sigma}: {e}"
                ))
            })?
            .value
    };
    let cross = leave_one_out_sum(&spec, samples)?;
    let nf = n as f64;
    Ok(square - 2.0 * cross / (nf * (nf - 1.0)))
}

/// Cross-validation scores over a bandwidth grid, with the asymptotic MISE
/// where the kernel supports it.
#[derive(Debug, Clone, PartialEq)]
pub struct MiseProfile {
    pub sigmas: Vec<f64>,
    pub cv_scores: Vec<f64>,
    /// Asymptotic MISE at `(μ̂, Σ̂)` from the samples.
    pub asymptotic_mise: Option<Vec<f64>>,
    /// Grid point of minimal score; ties go to the smaller σ.
    pub cv_argmin: f64,
    pub plugin_sigma: Option<f64>,
}

impl MiseProfile {
    /// Grid point of minimal asymptotic MISE, ties toward smaller σ.
    pub fn asymptotic_argmin(&self) -> Option<f64> {
        self.asymptotic_mise
            .as_ref()
            .map(|m| self.sigmas[argmin(m)])
    }
}

/// Index of the first minimum.
pub fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Evaluates [`loo_cv_score`] at every grid point.
pub fn cv_profile(
    spec: &KernelSpec,
    samples: &SampleSet,
    sigma_grid: &[f64],
) -> Result<MiseProfile> {
    if sigma_grid.is_empty() {
        return Err(Error::invalid("empty bandwidth grid"));
    }
    if sigma_grid.iter().any(|s| !(s.is_finite() && *s > 0.0))
        || sigma_grid.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::invalid(
            "bandwidth grid must be positive and strictly increasing",
        ));
    }
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    let cv_scores = par::try_map_slice(sigma_grid, |&s| loo_cv_score(spec, samples, s))?;
    let cv_argmin = sigma_grid[argmin(&cv_scores)];
    let (asymptotic_mise, plugin_sigma) = if spec.asymptotics_available() && samples.log_std() > 0.0
    {
        let (mu, big_sigma) = (samples.log_mean(), samples.log_std());
        let mise = sigma_grid
            .iter()
            .map(|&s| mise_lognormal_reference(&spec.with_sigma(s)?, mu, big_sigma, samples.len()))
            .collect::<Result<Vec<_>>>()?;
        let plugin = plugin_bandwidth(spec.family(), spec.role(), mu, big_sigma, samples.len())?;
        (Some(mise), Some(plugin))
    } else {
        (None, None)
    };
    Ok(MiseProfile {
        sigmas: sigma_grid.to_vec(),
        cv_scores,
        asymptotic_mise,
        cv_argmin,
        plugin_sigma,
    })
}

/// Points in the default bandwidth grid.
pub const DEFAULT_GRID_POINTS: usize = 40;

/// 40 geometric points over `[σ*/5, 5σ*]`, or over `[0.01, 2]` without a
/// plugin value.
pub fn default_sigma_grid(
    family: KernelFamily,
    role: Role,
    samples: &SampleSet,
) -> Result<Vec<f64>> {
    let (lo, hi) = match plugin_from_samples(family, role, samples) {
        Ok(p) => (p / 5.0, p * 5.0),
        Err(_) => (0.01, 2.0),
    };
    Ok(Grid::new(lo, hi, DEFAULT_GRID_POINTS, Spacing::Geometric)?
        .points()
        .to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::pdf_gamma;
    use crate::oracle::quadrature::integrate_positive;

    #[test]
    fn pinned_overlaps() {
        assert!((gamma_overlap(0.0, 0.0, 1.0).unwrap() - 0.5).abs() < 1e-14);
        assert!((gamma_overlap(0.0, 0.0, 0.5).unwrap() - 2.0).abs() < 1e-13);
        assert_eq!(
            gamma_overlap(0.3, 2.0, 0.4).unwrap(),
            gamma_overlap(2.0, 0.3, 0.4).unwrap()
        );
    }

    #[test]
    fn overlap_matches_quadrature() {
        let s: f64 = 0.5;
        let s2 = s * s;
        let q = integrate_positive(
            |x| pdf_gamma(x, 1.0 + 1.0 / s2, s2).unwrap().powi(2),
            &QuadratureOptions::default(),
        )
        .unwrap();
        let c = gamma_overlap(1.0, 1.0, s).unwrap();
        assert!((q.value - c).abs() < 1e-9 * c);
    }

    #[test]
    fn plugin_reference_points() {
        let g = plugin_bandwidth(KernelFamily::Gamma, Role::Improper, 1.0, 1.0, 300).unwrap();
        assert!((g - 0.285_374_432_192_219).abs() < 1e-12);
        let p = plugin_bandwidth(KernelFamily::Gamma, Role::Proper, 1.0, 1.0, 300).unwrap();
        assert!((p - 0.340_315_748_829_32).abs() < 1e-12);
        assert!(matches!(
            plugin_bandwidth(KernelFamily::InverseGaussian, Role::Proper, 1.0, 1.0, 300),
            Err(Error::UnsupportedAsymptotics { .. })
        ));
        assert!(plugin_bandwidth(KernelFamily::Gamma, Role::Proper, 1.0, 0.0, 300).is_err());
    }

    #[test]
    fn two_sample_score_is_closed_form() {
        let spec = KernelSpec::new(KernelFamily::Gamma, Role::Proper, 0.4).unwrap();
        let s = SampleSet::new(vec![1.0, 1.0]).unwrap();
        let m = loo_cv_score(&spec, &s, 0.4).unwrap();
        let w = crate::kernels::weight(&spec, 1.0, 1.0).unwrap();
        let want = gamma_overlap(1.0, 1.0, 0.4).unwrap() - 2.0 * w;
        assert!((m - want).abs() < 1e-14);
    }

    #[test]
    fn score_needs_two_samples() {
        let spec = KernelSpec::new(KernelFamily::Gamma, Role::Proper, 0.4).unwrap();
        let s = SampleSet::new(vec![1.0]).unwrap();
        assert!(matches!(
            loo_cv_score(&spec, &s, 0.4),
            Err(Error::InsufficientSamples { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn single_point_grid() {
        let spec = KernelSpec::new(KernelFamily::Gamma, Role::Proper, 0.4).unwrap();
        let s = SampleSet::new(vec![0.5, 1.0, 2.0]).unwrap();
        let p = cv_profile(&spec, &s, &[0.3]).unwrap();
        assert_eq!(p.cv_argmin, 0.3);
    }

    #[test]
    fn argmin_prefers_first() {
        assert_eq!(argmin(&[3.0, 1.0, 1.0, 2.0]), 1);
    }
}
