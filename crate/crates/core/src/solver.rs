//! Budgets and tolerances shared by every fixed-point computation, and the
//! convergence metadata they report.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolverSettings {
    /// Sup-norm change between successive iterates that counts as converged.
    pub tol: f64,
    pub max_iter: usize,
    /// Iterates above this magnitude (cost units) are declared divergent.
    pub divergence_cap: f64,
    /// Largest |F| that exhaustive enumeration accepts.
    pub policy_cap: u64,
    /// Allowed residual of an optimality equation at a reported solution.
    pub residual_tol: f64,
    /// Horizon N of the finite-horizon lower bound V_N / N.
    pub lower_bound_horizon: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 100_000,
            divergence_cap: 1e6,
            policy_cap: 1_000_000,
            residual_tol: 1e-8,
            lower_bound_horizon: 500,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// Sup-norm change at the last iteration (or the final residual, where
    /// the operation says so).
    #[serde(with = "crate::model::extended_floats::scalar")]
    pub residual: f64,
    pub converged: bool,
    pub diverged: bool,
}
