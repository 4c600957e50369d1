//! Risk-sensitive average-cost analysis for finite Markov decision
//! processes.
//!
//! For a risk coefficient λ > 0 the cost of a policy is the long-run growth
//! rate of the certain equivalent `(1/λ) log E[exp(λ Σ C)]`. The crate
//! computes the optimal value J* by enumerating stationary policies,
//! checks the simultaneous Doeblin condition, probes the risk-sensitive
//! optimality equation, and certifies upper bounds of J* through the
//! min–max / witness characterisation of J* as the infimum of a family of
//! functions.
//!
//! ```
//! use rsmdp::{example22, optimal_average, RiskCoefficient, SolverSettings};
//!
//! let m = example22(0.5).unwrap();
//! let sol = optimal_average(&m, RiskCoefficient::new(1.0).unwrap(), &SolverSettings::default()).unwrap();
//! assert!((sol.jstar[2] - 2.0 * (1.0 + 0.5f64.ln())).abs() < 1e-9);
//! ```

pub mod certify;
pub mod chain;
pub mod cli;
pub mod error;
pub mod evaluation;
pub mod example22;
mod excursion;
pub mod gen;
pub mod logspace;
pub mod model;
pub mod optimal;
pub mod simulate;
pub mod solver;

pub use certify::{
    action_restriction, check_membership, construct_g_alpha, deviation_function, extract_policy,
    monotone_trajectory_check, verify_theorem35, verify_theorem35_with, ActionRestriction,
    Certificate, CertificateStatus, DeviationFunction, ExtractedPolicy, MonotoneCheck,
    Theorem35Report, DEFAULT_ALPHAS,
};
pub use chain::{
    check_doeblin, expected_hitting_time, find_doeblin_state, log_spectral_radius, reachable_set,
    spectral_radius, strongly_connected_components, survival_curve, taboo_matrix, tail_bound,
    DoeblinReport, NonnegativeMatrix, TailBound,
};
pub use error::{Error, ModelError, Result};
pub use evaluation::{
    certain_equivalent, finite_horizon_cost, long_run_average, risk_matrix, verify_growth,
    FiniteCostDistribution, MarkovPolicy,
};
pub use example22::{closed_form, example22, ClosedForm, Regime};
pub use gen::{random_doeblin_model, RandomModel, RandomModelSpec};
pub use model::{
    enumerate_stationary_policies, load_model, max_cost_norm, Choice, Mdp, RiskCoefficient,
    StationaryPolicy, ValueFunction,
};
pub use optimal::{
    level_sets, optimal_average, optimal_finite_horizon, relative_value,
    solve_optimality_equation, verify_minmax, LevelSets, MinMaxCheck, OptimalSolution,
    OptimalityFailure, OptimalityOutcome, RelativeValue,
};
pub use simulate::{
    mc_certain_equivalent, mc_hitting_tail, sample_trajectory, sample_trajectory_stream,
    McEstimate, Trajectory,
};
pub use solver::{SolveReport, SolverSettings};
