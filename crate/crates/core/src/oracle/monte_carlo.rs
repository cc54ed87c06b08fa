//! Empirical bias, variance and MISE by seeded replication.
//!
//! Replication `r` draws its samples from stream `r + 1` of the seed, so the
//! summary is a pure function of `(seed, replications)` whatever the worker
//! count. Reusing a seed at a different σ gives common random numbers.

use crate::error::{Error, Result};
use crate::estimators::DensityEstimate;
use crate::kernels::KernelSpec;
use crate::oracle::quadrature::QuadratureOptions;
use crate::par;
use crate::reference::LogNormalRef;

/// An estimate with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSummary {
    pub points: Vec<f64>,
    /// Empirical `⟨f̂(x)⟩ − f(x)` per point.
    pub point_bias: Vec<Estimate>,
    /// Empirical `var f̂(x)` per point (`R − 1` divisor).
    pub point_variance: Vec<Estimate>,
    /// Mean integrated squared error, when requested.
    pub mise: Option<Estimate>,
    /// `f̂_r(x)` for replication `r` (outer) and point (inner).
    pub values: Vec<Vec<f64>>,
    /// Per-replication integrated squared errors, when requested.
    pub ise: Option<Vec<f64>>,
    pub replications: usize,
    pub n_per_rep: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    pub replications: usize,
    pub seed: u64,
    /// Whether to integrate `(f̂ − f)²` in each replication.
    pub with_mise: bool,
    pub quadrature: QuadratureOptions,
}

impl McOptions {
    pub fn new(replications: usize, seed: u64) -> Self {
        Self {
            replications,
            seed,
            with_mise: false,
            quadrature: QuadratureOptions::default(),
        }
    }

    pub fn with_mise(mut self) -> Self {
        self.with_mise = true;
        self
    }
}

/// Mean and standard error of `xs`.
pub fn mean_with_error(xs: &[f64]) -> Estimate {
    let r = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / r;
    let var = xs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
    Estimate {
        value: mean,
        std_error: (var / r).sqrt(),
    }
}

/// Sample variance of `xs` with the standard error `√((m₄ − s⁴)/R)`.
pub fn variance_with_error(xs: &[f64]) -> Estimate {
    let r = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / r;
    let m2 = xs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / r;
    let m4 = xs.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / r;
    let s2 = m2 * r / (r - 1.0);
    Estimate {
        value: s2,
        std_error: ((m4 - m2 * m2).max(0.0) / r).sqrt(),
    }
}

/// Replicates the estimator `spec` on `n` draws from `generating` and
/// summarizes it at `eval_points`.
pub fn mc_estimator_summary(
    spec: &KernelSpec,
    generating: &LogNormalRef,
    n: usize,
    eval_points: &[f64],
    opts: &McOptions,
) -> Result<McSummary> {
    if opts.replications < 2 {
        return Err(Error::invalid(format!(
            "need at least 2 replications, got {}",
            opts.replications
        )));
    }
    if n == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let per_rep = par::try_map_range(opts.replications, |r| {
        replicate(spec, generating, n, eval_points, opts, r).map_err(|e| {
            Error::Numeric(format!(
                "replication {r} (seed {}, stream {}) failed: {e}",
                opts.seed,
                r + 1
            ))
        })
    })?;
    let truth: Vec<f64> = eval_points.iter().map(|&x| generating.pdf(x)).collect();
    let mut point_bias = Vec::with_capacity(eval_points.len());
    let mut point_variance = Vec::with_capacity(eval_points.len());
    for (i, f) in truth.iter().enumerate() {
        let col: Vec<f64> = per_rep.iter().map(|(v, _)| v[i]).collect();
        let m = mean_with_error(&col);
        point_bias.push(Estimate {
            value: m.value - f,
            std_error: m.std_error,
        });
        point_variance.push(variance_with_error(&col));
    }
    let (values, ise): (Vec<Vec<f64>>, Vec<Option<f64>>) = per_rep.into_iter().unzip();
    let ise: Option<Vec<f64>> = ise.into_iter().collect();
    let mise = ise.as_deref().map(mean_with_error);
    Ok(McSummary {
        points: eval_points.to_vec(),
        point_bias,
        point_variance,
        mise,
        values,
        ise,
        replications: opts.replications,
        n_per_rep: n,
        seed: opts.seed,
    })
}

fn replicate(
    spec: &KernelSpec,
    generating: &LogNormalRef,
    n: usize,
    eval_points: &[f64],
    opts: &McOptions,
    r: usize,
) -> Result<(Vec<f64>, Option<f64>)> {
    let samples = generating.sample_stream(n, opts.seed, r as u64 + 1)?;
    let est = DensityEstimate::new(*spec, samples)?;
    let values = eval_points
        .iter()
        .map(|&x| est.evaluate(x))
        .collect::<Result<Vec<_>>>()?;
    let ise = if opts.with_mise {
        Some(
            est.integrated_squared_error(|x| generating.pdf(x), &opts.quadrature)?
                .value,
        )
    } else {
        None
    };
    Ok((values, ise))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{KernelFamily, Role};

    #[test]
    fn deterministic_and_error_scaling() {
        let spec = KernelSpec::new(KernelFamily::Gamma, Role::Improper, 0.3).unwrap();
        let g = LogNormalRef::new(1.0, 1.0).unwrap();
        let pts = [1.0, 2.0];
        let a = mc_estimator_summary(&spec, &g, 200, &pts, &McOptions::new(400, 5)).unwrap();
        let b = mc_estimator_summary(&spec, &g, 200, &pts, &McOptions::new(400, 5)).unwrap();
        assert_eq!(a, b);
        let c = mc_estimator_summary(&spec, &g, 200, &pts, &McOptions::new(1600, 5)).unwrap();
        for i in 0..2 {
            let ratio = c.point_bias[i].std_error / a.point_bias[i].std_error;
            assert!((ratio - 0.5).abs() < 0.1, "ratio {ratio}");
        }
    }

    #[test]
    fn quadrupling_n_quarters_variance() {
        let spec = KernelSpec::new(KernelFamily::Gamma, Role::Improper, 0.3).unwrap();
        let g = LogNormalRef::new(1.0, 1.0).unwrap();
        let a = mc_estimator_summary(&spec, &g, 250, &[1.0], &McOptions::new(800, 1)).unwrap();
        let b = mc_estimator_summary(&spec, &g, 1000, &[1.0], &McOptions::new(800, 1)).unwrap();
        let ratio = a.point_variance[0].value / b.point_variance[0].value;
        assert!((ratio - 4.0).abs() < 0.8, "ratio {ratio}");
    }

    #[test]
    fn mise_is_positive() {
        let spec = KernelSpec::new(KernelFamily::Gamma, Role::Proper, 0.3).unwrap();
        let g = LogNormalRef::new(0.0, 1.0).unwrap();
        let s =
            mc_estimator_summary(&spec, &g, 50, &[], &McOptions::new(4, 3).with_mise()).unwrap();
        let m = s.mise.unwrap();
        assert!(m.value > 0.0 && m.std_error > 0.0);
    }

    #[test]
    fn too_few_replications() {
        let spec = KernelSpec::new(KernelFamily::Gamma, Role::Proper, 0.3).unwrap();
        let g = LogNormalRef::new(0.0, 1.0).unwrap();
        assert!(mc_estimator_summary(&spec, &g, 50, &[1.0], &McOptions::new(1, 3)).is_err());
    }
}
