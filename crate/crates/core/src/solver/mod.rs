//! Recovery programs: ℓ1 minimization over CPTP process matrices consistent
//! with the data, and the constrained least-squares baseline.
//!
//! Internally `χ` lives in `d⁴` real coordinates (see
//! [`crate::linalg::herm_to_coords`]), so every projection is real-linear.

mod anderson;
pub mod constraints;
pub mod cqpt;
pub mod ls;
pub mod problem;
pub mod prox;

pub use constraints::{project_tp, TpConstraint};
pub use cqpt::solve_cqpt;
pub use ls::solve_constrained_ls;
pub use problem::{RecoveryProblem, RecoveryResult, ResultFile, SolverOptions};
pub use prox::{project_psd, soft_threshold};

/// `ε = factor·√m·σ` in outcome units, where `σ` is the root-mean-square
/// residual per configuration of the full-data fit. Because `Φ` carries a
/// `1/√M` factor, the scaled residual of the fit already equals `σ`.
pub fn calibrate_epsilon(full_fit: &RecoveryResult, m: usize, factor: f64) -> f64 {
    epsilon_from_sigma(full_fit.residual, m, factor)
}

pub fn epsilon_from_sigma(sigma: f64, m: usize, factor: f64) -> f64 {
    factor * (m as f64).sqrt() * sigma
}

/// Converts an outcome-unit `ε` to the scaled units of a problem with `m`
/// rows.
pub fn scaled_epsilon(epsilon: f64, m: usize) -> f64 {
    epsilon / (m as f64).sqrt()
}
