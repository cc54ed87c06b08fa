//! Log-normal reference distribution: density, derivatives, seeded sampling
//! and parameter estimation.
//!
//! Sampling uses ChaCha8 (256-bit key, 64-bit stream id, 68-bit word counter).
//! Draw `i` of a stream always consumes words `2i` and `2i + 1`, so any block
//! of draws can be produced independently and the output never depends on how
//! the index range is split across workers. Normal variates come from the
//! inverse CDF, one uniform per variate.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::estimators::SampleSet;
use crate::par;
use crate::special::{normal_quantile, HALF_LN_2PI};

/// Log-normal distribution with log-mean `mu` and log-standard-deviation `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogNormalRef {
    mu: f64,
    sigma: f64,
}

const SAMPLE_BLOCK: usize = 4096;

impl LogNormalRef {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::invalid(format!("log-mean must be finite, got {mu}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid(format!(
                "log-standard-deviation must be > 0, got {sigma}"
            )));
        }
        Ok(Self { mu, sigma })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Density; zero for `x <= 0`.
    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let l = x.ln();
        let z = (l - self.mu) / self.sigma;
        (-HALF_LN_2PI - self.sigma.ln() - l - 0.5 * z * z).exp()
    }

    /// `j`-th derivative of the density at `x > 0`.
    ///
    /// `f^(j)(x) = x^{-j} f(x) Q_j(ln x − μ)` with `Q_0 = 1` and
    /// `Q_{j+1}(d) = Q_j'(d) − (j + 1 + d/Σ²) Q_j(d)`.
    pub fn deriv(&self, x: f64, order: usize) -> Result<f64> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::domain(format!(
                "log-normal density needs x > 0, got {x}"
            )));
        }
        let f = self.pdf(x);
        if order == 0 {
            return Ok(f);
        }
        let d = x.ln() - self.mu;
        let q = derivative_polynomial(order, self.sigma);
        let qv = q.iter().rev().fold(0.0, |acc, c| acc * d + c);
        Ok(f * qv / x.powi(order as i32))
    }

    pub fn mean(&self) -> f64 {
        (self.mu + 0.5 * self.sigma * self.sigma).exp()
    }

    pub fn variance(&self) -> f64 {
        let s2 = self.sigma * self.sigma;
        s2.exp_m1() * (2.0 * self.mu + s2).exp()
    }

    /// `n` seeded draws on stream 0.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleSet> {
        self.sample_stream(n, seed, 0)
    }

    /// `n` seeded draws on the given stream. Distinct streams of one seed are
    /// independent.
    pub fn sample_stream(&self, n: usize, seed: u64, stream: u64) -> Result<SampleSet> {
        if n == 0 {
            return Err(Error::InsufficientSamples { needed: 1, got: 0 });
        }
        let blocks = n.div_ceil(SAMPLE_BLOCK);
        let chunks = par::map_range(blocks, |b| {
            let start = b * SAMPLE_BLOCK;
            let end = (start + SAMPLE_BLOCK).min(n);
            let mut rng = substream(seed, stream, start as u64);
            (start..end)
                .map(|_| (self.mu + self.sigma * normal_quantile(open_unit(rng.next_u64()))).exp())
                .collect::<Vec<f64>>()
        });
        SampleSet::new(chunks.concat())
    }
}

/// ChaCha8 positioned at draw `index` of `(seed, stream)`; each draw is one
/// `u64`, that is two 32-bit words.
pub fn substream(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.set_word_pos(2 * index as u128);
    rng
}

/// Maps the top 52 bits to the open interval (0, 1); both ends stay exactly
/// representable.
#[inline]
pub fn open_unit(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

fn derivative_polynomial(order: usize, sigma: f64) -> Vec<f64> {
    let inv_s2 = 1.0 / (sigma * sigma);
    let mut q = vec![1.0];
    for j in 0..order {
        let mut next = vec![0.0; q.len() + 1];
        for (i, c) in q.iter().enumerate().skip(1) {
            next[i - 1] += i as f64 * c;
        }
        for (i, c) in q.iter().enumerate() {
            next[i] -= (j + 1) as f64 * c;
            next[i + 1] -= inv_s2 * c;
        }
        q = next;
    }
    q
}

/// Log-normal density; domain error for `x <= 0`.
pub fn ln_pdf(r: &LogNormalRef, x: f64) -> Result<f64> {
    r.deriv(x, 0)
}

/// `order`-th derivative of the log-normal density.
pub fn ln_pdf_deriv(r: &LogNormalRef, x: f64, order: usize) -> Result<f64> {
    r.deriv(x, order)
}

/// `n` draws `exp(μ + Σ Z)` from the seeded generator.
pub fn ln_sample(r: &LogNormalRef, n: usize, seed: u64) -> Result<SampleSet> {
    r.sample(n, seed)
}

/// Mean and (n − 1)-divisor standard deviation of the log samples.
pub fn estimate_log_params(samples: &SampleSet) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    Ok((samples.log_mean(), samples.log_std()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numdiff::{derivative, positive_step};
    use std::f64::consts::E;

    #[test]
    fn standard_values() {
        let r = LogNormalRef::new(0.0, 1.0).unwrap();
        assert!((r.pdf(1.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!((r.deriv(1.0, 1).unwrap() + 0.398_942_280_401_432_7).abs() < 1e-15);
        assert!(ln_pdf(&r, 0.0).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let r = LogNormalRef::new(1.0, 1.0).unwrap();
        for &x in &[0.2, 1.0, 3.0, 10.0] {
            for order in 1..=4 {
                let fd = derivative(|t| r.pdf(t), x, order, positive_step(x, order)).unwrap();
                let exact = r.deriv(x, order).unwrap();
                // f'(e^{μ−Σ²}) = 0, so scale by f/x^j rather than the value
                let scale = exact.abs().max(r.pdf(x) / x.powi(order as i32));
                assert!(
                    (fd.value - exact).abs() <= 1e-7 * scale,
                    "x={x} order={order}: {} vs {exact}",
                    fd.value
                );
            }
        }
    }

    #[test]
    fn sampling_is_deterministic_and_block_independent() {
        let r = LogNormalRef::new(1.0, 1.0).unwrap();
        let a = r.sample(SAMPLE_BLOCK + 17, 9).unwrap();
        let b = r.sample(SAMPLE_BLOCK + 17, 9).unwrap();
        assert_eq!(a.values(), b.values());
        let short = r.sample(5, 9).unwrap();
        assert_eq!(&a.values()[..5], short.values());
        let mut rng = substream(9, 0, SAMPLE_BLOCK as u64);
        let z = normal_quantile(open_unit(rng.next_u64()));
        assert_eq!(a.values()[SAMPLE_BLOCK], (1.0 + z).exp());
        let other = r.sample_stream(5, 9, 1).unwrap();
        assert_ne!(short.values(), other.values());
    }

    #[test]
    fn log_mean_within_clt_band() {
        let r = LogNormalRef::new(1.0, 1.0).unwrap();
        let n = 100_000;
        let s = r.sample(n, 2024).unwrap();
        assert!((s.log_mean() - 1.0).abs() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn two_point_estimate() {
        let s = SampleSet::new(vec![1.0, E * E]).unwrap();
        let (m, sd) = estimate_log_params(&s).unwrap();
        assert!((m - 1.0).abs() < 1e-15);
        assert!((sd - 2f64.sqrt()).abs() < 1e-15);
        let one = SampleSet::new(vec![2.0]).unwrap();
        assert!(matches!(
            estimate_log_params(&one),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn open_unit_stays_inside() {
        assert!(open_unit(0) > 0.0);
        assert!(open_unit(u64::MAX) < 1.0);
    }
}
