//! Density estimation for positive random variables with asymmetric kernels.
//!
//! The crate covers the gamma, log-normal, Birnbaum–Saunders, inverse Gaussian
//! and reciprocal inverse Gaussian kernels in both the *improper* role (the
//! kernel is a density in the sample) and the *proper* role (the kernel is a
//! density in the evaluation point, so estimates integrate to one). Around the
//! estimators sit:
//!
//! - [`asymptotics`]: leading-order bias, variance and MISE predictions, both
//!   for the generic shifted balloon / sample-smoothing estimators and for each
//!   concrete kernel;
//! - [`bandwidth`]: closed-form plugin bandwidths under a log-normal reference
//!   and leave-one-out cross-validation;
//! - [`oracle`]: adaptive quadrature and Monte Carlo machinery used to check
//!   every asymptotic claim numerically.
//!
//! With the default `parallel` feature, batch work (grid evaluation,
//! replications, pairwise cross-validation sums) runs on rayon. Results are
//! bit-identical to the sequential build: partial sums are always merged in a
//! fixed order.

// `!(a > b)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod bandwidth;
mod error;
pub mod estimators;
pub mod kernels;
pub mod numdiff;
pub mod oracle;
pub mod par;
pub mod reference;
pub mod special;

pub use error::{Error, Result};
pub use estimators::{DensityEstimate, Grid, SampleSet, Spacing};
pub use kernels::{KernelFamily, KernelSpec, Role};
pub use reference::LogNormalRef;

/// Library version, recorded in emitted tables.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
