//! Executable checks of the quantitative inequalities the construction
//! rests on, reported with measured constants and pass/fail margins.

mod embeddings;
mod hessian;
mod monotonicity;
mod report;
mod solution;
pub mod suites;
mod uniqueness;

pub use embeddings::{check_embeddings, interpolation_exponent};
pub use hessian::check_hessian_inequalities;
pub use monotonicity::check_monotonicity;
pub use report::{CheckReport, Provenance};
pub use solution::{check_homogeneity, check_solution_estimates};
pub use uniqueness::check_uniqueness;

/// Multiplicative slack on analytically exact identities.
pub const SLACK_EXACT: f64 = 1e-9;
/// Multiplicative slack where a lower-bound estimator sits on the favorable
/// side of the inequality.
pub const SLACK_ESTIMATOR: f64 = 0.05;
