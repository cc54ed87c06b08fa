use thiserror::Error;

use crate::kernels::{KernelFamily, Role};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of a density or parametrization.
    #[error("domain error: {0}")]
    Domain(String),

    /// The asymptotic machinery does not apply to this kernel/role pair.
    #[error("asymptotics unavailable for {family:?} kernel in {role:?} role")]
    UnsupportedAsymptotics { family: KernelFamily, role: Role },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    /// The change of variables z(y, x) used by the sample-smoothing lemma is not
    /// monotone in y.
    #[error("z(y, x) is not monotone in y near y = {y} (x = {x})")]
    MonotonicityViolation { x: f64, y: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Finite-difference noise, overflow or a similar numerical breakdown.
    #[error("numerical failure: {0}")]
    Numeric(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
