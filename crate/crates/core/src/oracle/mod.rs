//! Numerical ground truth: quadrature, Monte Carlo replication and rate fits.
//!
//! Nothing here uses an asymptotic formula, so these routines can be used to
//! test the [`asymptotics`](crate::asymptotics) predictions.

pub mod monte_carlo;
pub mod quadrature;
pub mod rate;

pub use monte_carlo::{mc_estimator_summary, McOptions, McSummary};
pub use quadrature::{
    integrate, integrate_positive, integrate_positive_with_breaks, integrate_real_line,
    QuadratureOptions, QuadratureResult,
};
pub use rate::fit_rate;
