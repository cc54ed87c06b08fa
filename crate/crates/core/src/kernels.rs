//! Kernel families, their weight-function parametrizations, and kernel moments.
//!
//! Each asymmetric family is parametrized by a bandwidth `sigma` and an
//! *anchor*: the evaluation point `x` for the improper role, or the sample `y`
//! for the proper role. The frozen distribution is then evaluated at the other
//! argument:
//!
//! | family | distribution at anchor `a`        | shift `h²δ(a)`        | bandwidth `h(a)`          |
//! |--------|-----------------------------------|-----------------------|---------------------------|
//! | G      | `G(·; 1 + a/σ², σ²)`              | `σ²`                  | `σ√(a + σ²)`              |
//! | LN     | `LN(·; log a, σ²)`                | `a(e^{σ²/2} − 1)`     | `a e^{σ²/2}√(e^{σ²} − 1)` |
//! | BS     | `BS(·; σ, 1/a)`                   | `aσ²/2`               | `aσ√(1 + 5σ²/4)`          |
//! | IG     | `IG(·; a, σ⁻²)`                   | `0`                   | `σ a^{3/2}`               |
//! | RIG    | `RIG(·; 1/(a − σ²), σ⁻²)`         | `0`                   | `σ√(a + σ²)`              |
//!
//! All densities are evaluated in log space. Gamma shapes of `1 + a/σ²` reach
//! 10⁴ and beyond at practical bandwidths, far past where Γ overflows.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::oracle::quadrature::{integrate_real_line, QuadratureOptions};
use crate::special::{ln_gamma, normal_pdf, HALF_LN_2PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    Gamma,
    LogNormal,
    BirnbaumSaunders,
    InverseGaussian,
    ReciprocalInverseGaussian,
    /// Only used by the generic shifted estimators and as the small-σ limit.
    Gaussian,
}

impl KernelFamily {
    /// The five families usable as weight functions.
    pub const ASYMMETRIC: [KernelFamily; 5] = [
        KernelFamily::Gamma,
        KernelFamily::LogNormal,
        KernelFamily::BirnbaumSaunders,
        KernelFamily::InverseGaussian,
        KernelFamily::ReciprocalInverseGaussian,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            KernelFamily::Gamma => "gamma",
            KernelFamily::LogNormal => "lognormal",
            KernelFamily::BirnbaumSaunders => "birnbaum-saunders",
            KernelFamily::InverseGaussian => "inverse-gaussian",
            KernelFamily::ReciprocalInverseGaussian => "reciprocal-inverse-gaussian",
            KernelFamily::Gaussian => "gaussian",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let s = s.to_ascii_lowercase();
        Some(match s.as_str() {
            "gamma" | "g" => KernelFamily::Gamma,
            "lognormal" | "log-normal" | "ln" => KernelFamily::LogNormal,
            "birnbaum-saunders" | "birnbaumsaunders" | "bs" => KernelFamily::BirnbaumSaunders,
            "inverse-gaussian" | "inversegaussian" | "ig" => KernelFamily::InverseGaussian,
            "reciprocal-inverse-gaussian" | "reciprocalinversegaussian" | "rig" => {
                KernelFamily::ReciprocalInverseGaussian
            }
            "gaussian" | "normal" => KernelFamily::Gaussian,
            _ => return None,
        })
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

/// Whether the kernel is a density in the sample (improper) or in the
/// evaluation point (proper).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Proper,
    Improper,
}

impl Role {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "proper" => Some(Role::Proper),
            "improper" => Some(Role::Improper),
            _ => None,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Proper => "proper",
            Role::Improper => "improper",
        })
    }
}

/// One of the ten asymmetric estimator variants together with its bandwidth
/// parameter σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    family: KernelFamily,
    role: Role,
    sigma: f64,
}

impl KernelSpec {
    pub fn new(family: KernelFamily, role: Role, sigma: f64) -> Result<Self> {
        if family == KernelFamily::Gaussian {
            return Err(Error::invalid(
                "the Gaussian kernel has no proper/improper weight-function form",
            ));
        }
        check_sigma(sigma)?;
        Ok(Self {
            family,
            role,
            sigma,
        })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        Self::new(self.family, self.role, sigma)
    }

    /// False only for the proper inverse-Gaussian estimator, whose
    /// change of variables is not monotone. The estimator itself can still be
    /// evaluated.
    pub fn asymptotics_available(&self) -> bool {
        !(self.family == KernelFamily::InverseGaussian && self.role == Role::Proper)
    }

    pub(crate) fn require_asymptotics(&self) -> Result<()> {
        if self.asymptotics_available() {
            Ok(())
        } else {
            Err(Error::UnsupportedAsymptotics {
                family: self.family,
                role: self.role,
            })
        }
    }

    /// Freezes the kernel distribution at `anchor` (the evaluation point for the
    /// improper role, the sample for the proper role).
    pub fn freeze(&self, anchor: f64) -> Result<FrozenKernel> {
        let s2 = self.sigma * self.sigma;
        let what = match self.role {
            Role::Improper => "evaluation point",
            Role::Proper => "sample",
        };
        if anchor.is_nan() || anchor < 0.0 || anchor.is_infinite() {
            return Err(Error::domain(format!(
                "{what} must be finite and non-negative, got {anchor}"
            )));
        }
        match self.family {
            KernelFamily::Gamma => Ok(FrozenKernel::gamma(1.0 + anchor / s2, s2)),
            KernelFamily::LogNormal => {
                require_positive(anchor, what, self.family)?;
                Ok(FrozenKernel::lognormal(anchor.ln(), self.sigma))
            }
            KernelFamily::BirnbaumSaunders => {
                require_positive(anchor, what, self.family)?;
                Ok(FrozenKernel::birnbaum_saunders(self.sigma, 1.0 / anchor))
            }
            KernelFamily::InverseGaussian => {
                require_positive(anchor, what, self.family)?;
                Ok(FrozenKernel::inverse_gaussian(anchor, 1.0 / s2))
            }
            KernelFamily::ReciprocalInverseGaussian => {
                // x <= σ² is a domain error, never clamped.
                if anchor <= s2 {
                    return Err(Error::domain(format!(
                        "reciprocal inverse Gaussian kernel needs {what} > sigma^2 = {s2}, got {anchor}"
                    )));
                }
                Ok(FrozenKernel::reciprocal_inverse_gaussian(
                    1.0 / (anchor - s2),
                    1.0 / s2,
                ))
            }
            KernelFamily::Gaussian => unreachable!("rejected in KernelSpec::new"),
        }
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "bandwidth sigma must be finite and > 0, got {sigma}"
        )))
    }
}

fn require_positive(anchor: f64, what: &str, family: KernelFamily) -> Result<()> {
    if anchor > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{family} kernel needs a positive {what}, got {anchor}"
        )))
    }
}

/// A kernel distribution with all parameters fixed and its log-normalizer
/// precomputed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrozenKernel {
    Gamma {
        shape: f64,
        scale: f64,
        ln_norm: f64,
    },
    LogNormal {
        mu: f64,
        sigma: f64,
        ln_norm: f64,
    },
    BirnbaumSaunders {
        sigma: f64,
        lambda: f64,
        ln_norm: f64,
    },
    InverseGaussian {
        mu: f64,
        lambda: f64,
        ln_norm: f64,
    },
    ReciprocalInverseGaussian {
        mu: f64,
        lambda: f64,
        ln_norm: f64,
    },
}

impl FrozenKernel {
    pub fn gamma(shape: f64, scale: f64) -> Self {
        let ln_norm = -shape * scale.ln() - ln_gamma(shape);
        FrozenKernel::Gamma {
            shape,
            scale,
            ln_norm,
        }
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Self {
        FrozenKernel::LogNormal {
            mu,
            sigma,
            ln_norm: -HALF_LN_2PI - sigma.ln(),
        }
    }

    pub fn birnbaum_saunders(sigma: f64, lambda: f64) -> Self {
        // (1 + tλ) / (2σ sqrt(2πλ t³))
        let ln_norm = -(2.0 * sigma).ln() - 0.5 * (2.0 * PI * lambda).ln();
        FrozenKernel::BirnbaumSaunders {
            sigma,
            lambda,
            ln_norm,
        }
    }

    pub fn inverse_gaussian(mu: f64, lambda: f64) -> Self {
        FrozenKernel::InverseGaussian {
            mu,
            lambda,
            ln_norm: 0.5 * (lambda / (2.0 * PI)).ln(),
        }
    }

    pub fn reciprocal_inverse_gaussian(mu: f64, lambda: f64) -> Self {
        FrozenKernel::ReciprocalInverseGaussian {
            mu,
            lambda,
            ln_norm: 0.5 * (lambda / (2.0 * PI)).ln(),
        }
    }

    /// Log density at `t > 0`, given `ln_t = t.ln()` so callers can cache it.
    #[inline]
    pub fn ln_pdf_with_log(&self, t: f64, ln_t: f64) -> f64 {
        match *self {
            FrozenKernel::Gamma {
                shape,
                scale,
                ln_norm,
            } => ln_norm + (shape - 1.0) * ln_t - t / scale,
            FrozenKernel::LogNormal { mu, sigma, ln_norm } => {
                let z = (ln_t - mu) / sigma;
                ln_norm - ln_t - 0.5 * z * z
            }
            FrozenKernel::BirnbaumSaunders {
                sigma,
                lambda,
                ln_norm,
            } => {
                let tl = t * lambda;
                let d = tl - 1.0;
                ln_norm + tl.ln_1p() - 1.5 * ln_t - d * d / (2.0 * tl * sigma * sigma)
            }
            FrozenKernel::InverseGaussian {
                mu,
                lambda,
                ln_norm,
            } => {
                let d = t - mu;
                ln_norm - 1.5 * ln_t - lambda * d * d / (2.0 * t * mu * mu)
            }
            FrozenKernel::ReciprocalInverseGaussian {
                mu,
                lambda,
                ln_norm,
            } => {
                let d = mu * t - 1.0;
                ln_norm - 0.5 * ln_t - lambda * d * d / (2.0 * t * mu * mu)
            }
        }
    }

    /// Density at `t >= 0`. At `t = 0` the limiting value is returned.
    #[inline]
    pub fn pdf(&self, t: f64) -> f64 {
        if t > 0.0 {
            self.ln_pdf_with_log(t, t.ln()).exp()
        } else {
            self.pdf_at_zero()
        }
    }

    fn pdf_at_zero(&self) -> f64 {
        match *self {
            FrozenKernel::Gamma { shape, scale, .. } => {
                if shape > 1.0 {
                    0.0
                } else if shape == 1.0 {
                    1.0 / scale
                } else {
                    f64::INFINITY
                }
            }
            // The remaining densities all vanish faster than any power at 0.
            _ => 0.0,
        }
    }

    /// Closed-form mean of the frozen distribution.
    pub fn mean(&self) -> f64 {
        match *self {
            FrozenKernel::Gamma { shape, scale, .. } => shape * scale,
            FrozenKernel::LogNormal { mu, sigma, .. } => (mu + 0.5 * sigma * sigma).exp(),
            FrozenKernel::BirnbaumSaunders { sigma, lambda, .. } => {
                (2.0 + sigma * sigma) / (2.0 * lambda)
            }
            FrozenKernel::InverseGaussian { mu, .. } => mu,
            FrozenKernel::ReciprocalInverseGaussian { mu, lambda, .. } => 1.0 / mu + 1.0 / lambda,
        }
    }

    /// Closed-form variance of the frozen distribution.
    pub fn variance(&self) -> f64 {
        match *self {
            FrozenKernel::Gamma { shape, scale, .. } => shape * scale * scale,
            FrozenKernel::LogNormal { sigma, .. } => {
                let m = self.mean();
                m * m * (sigma * sigma).exp_m1()
            }
            FrozenKernel::BirnbaumSaunders { sigma, lambda, .. } => {
                let s2 = sigma * sigma;
                s2 * (4.0 + 5.0 * s2) / (4.0 * lambda * lambda)
            }
            FrozenKernel::InverseGaussian { mu, lambda, .. } => mu * mu * mu / lambda,
            FrozenKernel::ReciprocalInverseGaussian { mu, lambda, .. } => {
                1.0 / (lambda * mu) + 2.0 / (lambda * lambda)
            }
        }
    }
}

fn check_arg(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        Err(Error::domain(format!(
            "density argument must be non-negative, got {t}"
        )))
    } else {
        Ok(())
    }
}

fn check_param(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} must be finite and > 0, got {v}"
        )))
    }
}

/// Gamma density `θ^{-k} t^{k-1} e^{-t/θ} / Γ(k)`.
pub fn pdf_gamma(t: f64, shape: f64, scale: f64) -> Result<f64> {
    check_arg(t)?;
    check_param("shape", shape)?;
    check_param("scale", scale)?;
    Ok(FrozenKernel::gamma(shape, scale).pdf(t))
}

/// Log-normal density with log-mean `mu` and log-standard-deviation `sigma`.
pub fn pdf_lognormal(t: f64, mu: f64, sigma: f64) -> Result<f64> {
    check_arg(t)?;
    if !mu.is_finite() {
        return Err(Error::domain(format!("mu must be finite, got {mu}")));
    }
    check_param("sigma", sigma)?;
    Ok(FrozenKernel::lognormal(mu, sigma).pdf(t))
}

/// Birnbaum–Saunders density `BS(t; σ, λ)` with mean `(2 + σ²)/(2λ)`.
pub fn pdf_birnbaum_saunders(t: f64, sigma: f64, lambda: f64) -> Result<f64> {
    check_arg(t)?;
    check_param("sigma", sigma)?;
    check_param("lambda", lambda)?;
    Ok(FrozenKernel::birnbaum_saunders(sigma, lambda).pdf(t))
}

/// Inverse Gaussian density with mean `mu` and shape `lambda`.
pub fn pdf_inverse_gaussian(t: f64, mu: f64, lambda: f64) -> Result<f64> {
    check_arg(t)?;
    check_param("mu", mu)?;
    check_param("lambda", lambda)?;
    Ok(FrozenKernel::inverse_gaussian(mu, lambda).pdf(t))
}

/// Reciprocal inverse Gaussian density with mean `1/mu + 1/lambda`.
pub fn pdf_reciprocal_inverse_gaussian(t: f64, mu: f64, lambda: f64) -> Result<f64> {
    check_arg(t)?;
    check_param("mu", mu)?;
    check_param("lambda", lambda)?;
    Ok(FrozenKernel::reciprocal_inverse_gaussian(mu, lambda).pdf(t))
}

/// Weight function `W(y, x)` for sample `y` and evaluation point `x`.
pub fn weight(spec: &KernelSpec, y: f64, x: f64) -> Result<f64> {
    check_arg(y)?;
    check_arg(x)?;
    let (anchor, arg) = match spec.role {
        Role::Improper => (x, y),
        Role::Proper => (y, x),
    };
    Ok(spec.freeze(anchor)?.pdf(arg))
}

/// Standard deviation `h(a)` of the kernel frozen at `at` (see the module table).
/// For the proper role `at` is the sample.
pub fn effective_bandwidth(spec: &KernelSpec, at: f64) -> Result<f64> {
    spec.freeze(at)?;
    let s = spec.sigma;
    let s2 = s * s;
    Ok(match spec.family {
        KernelFamily::Gamma | KernelFamily::ReciprocalInverseGaussian => s * (at + s2).sqrt(),
        KernelFamily::LogNormal => at * (0.5 * s2).exp() * s2.exp_m1().sqrt(),
        KernelFamily::BirnbaumSaunders => at * s * (1.0 + 1.25 * s2).sqrt(),
        KernelFamily::InverseGaussian => s * at.powf(1.5),
        KernelFamily::Gaussian => unreachable!(),
    })
}

/// Offset `h²δ(a)` between the kernel mean and its anchor.
pub fn shift_term(spec: &KernelSpec, at: f64) -> Result<f64> {
    spec.freeze(at)?;
    let s2 = spec.sigma * spec.sigma;
    Ok(match spec.family {
        KernelFamily::Gamma => s2,
        KernelFamily::LogNormal => at * (0.5 * s2).exp_m1(),
        KernelFamily::BirnbaumSaunders => 0.5 * at * s2,
        KernelFamily::InverseGaussian | KernelFamily::ReciprocalInverseGaussian => 0.0,
        KernelFamily::Gaussian => unreachable!(),
    })
}

/// A kernel on the real line for the generic (symmetric-kernel) estimators.
#[derive(Clone)]
pub enum SymmetricKernel {
    /// Standard normal density.
    Gaussian,
    /// Epanechnikov kernel rescaled to unit variance, supported on [−√5, √5].
    Epanechnikov,
    Custom(CustomKernel),
}

/// A user-supplied kernel with an optional compact support.
#[derive(Clone)]
pub struct CustomKernel {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    support: Option<(f64, f64)>,
}

impl CustomKernel {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            support: None,
        }
    }

    pub fn with_support(mut self, lo: f64, hi: f64) -> Self {
        self.support = Some((lo, hi));
        self
    }
}

impl fmt::Debug for SymmetricKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymmetricKernel::Gaussian => f.write_str("Gaussian"),
            SymmetricKernel::Epanechnikov => f.write_str("Epanechnikov"),
            SymmetricKernel::Custom(c) => write!(f, "Custom(support = {:?})", c.support),
        }
    }
}

const SQRT_5: f64 = 2.236_067_977_499_79;

impl SymmetricKernel {
    #[inline]
    pub fn eval(&self, z: f64) -> f64 {
        match self {
            SymmetricKernel::Gaussian => normal_pdf(z),
            SymmetricKernel::Epanechnikov => {
                let u = z / SQRT_5;
                if u.abs() < 1.0 {
                    0.75 * (1.0 - u * u) / SQRT_5
                } else {
                    0.0
                }
            }
            SymmetricKernel::Custom(c) => match c.support {
                Some((lo, hi)) if z < lo || z > hi => 0.0,
                _ => (c.f)(z),
            },
        }
    }

    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            SymmetricKernel::Gaussian => None,
            SymmetricKernel::Epanechnikov => Some((-SQRT_5, SQRT_5)),
            SymmetricKernel::Custom(c) => c.support,
        }
    }

    fn integrate(&self, g: impl Fn(f64) -> f64 + Sync, opts: &QuadratureOptions) -> Result<f64> {
        let r = match self.support() {
            Some((lo, hi)) => crate::oracle::quadrature::integrate(&g, lo, hi, opts)?,
            None => integrate_real_line(&g, opts)?,
        };
        Ok(r.value)
    }
}

/// Moments `m_0..m_p` and `κ = ∫K²` of an order-`p` kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMoments {
    pub order: usize,
    pub kappa: f64,
    pub moments: Vec<f64>,
}

/// Default tolerance for order detection.
pub const ORDER_TOLERANCE: f64 = 1e-6;

/// Computes the moments of `kernel` by quadrature and classifies its order:
/// the smallest `k > 0` with `m_k ≈ 1` after every `m_j`, `0 < j < k`,
/// vanished.
pub fn kernel_moments(
    kernel: &SymmetricKernel,
    p_max: usize,
    tolerance: f64,
) -> Result<KernelMoments> {
    if p_max < 2 {
        return Err(Error::invalid("p_max must be at least 2"));
    }
    let opts = QuadratureOptions::default();
    let m0 = kernel.integrate(|z| kernel.eval(z), &opts)?;
    if (m0 - 1.0).abs() >= tolerance {
        return Err(Error::invalid(format!("kernel integrates to {m0}, not 1")));
    }
    let mut moments = vec![m0];
    let mut order = None;
    for k in 1..=p_max {
        let mk = kernel.integrate(|z| kernel.eval(z) * z.powi(k as i32), &opts)?;
        moments.push(mk);
        if (mk - 1.0).abs() < tolerance {
            order = Some(k);
            break;
        }
        if mk.abs() >= tolerance {
            return Err(Error::invalid(format!(
                "moment m_{k} = {mk} neither vanishes nor equals 1; not an order-p kernel"
            )));
        }
    }
    let order = order.ok_or_else(|| Error::invalid(format!("no kernel order <= {p_max} found")))?;
    let kappa = kernel.integrate(|z| kernel.eval(z).powi(2), &opts)?;
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::invalid(format!(
            "kappa = {kappa} must lie in (0, inf)"
        )));
    }
    Ok(KernelMoments {
        order,
        kappa,
        moments,
    })
}
