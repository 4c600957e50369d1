//! Optimal risk-sensitive average cost J*(λ, ·), the min–max equation it
//! satisfies, its level sets, and the multiplicative optimality equation
//! with its relative value function.
//!
//! # Why enumerating stationary policies gives J*
//!
//! Every member g of the certificate family is an upper bound of J*, and
//! the policy extracted from g's witness (a minimizer inside B_g) is a
//! stationary f with J(λ, f, ·) ≤ g. Since the infimum of the family is
//! exactly J*, for every ε > 0 some stationary policy is ε-optimal at each
//! state. F is finite, so the per-state minimum over F is attained and
//! equals J*(λ, x). This requires the simultaneous Doeblin condition.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evaluation::{long_run_average, MarkovPolicy};
use crate::excursion::ExcursionProblem;
use crate::logspace::log_sum_exp;
use crate::model::{checked_policy_count, policy_at, Mdp, RiskCoefficient, StationaryPolicy, ValueFunction};
use crate::solver::{SolveReport, SolverSettings};

/// Values closer than this are treated as one level.
pub const LEVEL_TOL: f64 = 1e-9;

/// One application of the multiplicative DP operator, in cost units:
/// `min_a (1/λ) log[e^{λC(x,a)} Σ_y p_xy(a) e^{λ w(y)}]`, lowest action on ties.
pub(crate) fn bellman_step(m: &Mdp, l: f64, w: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let n = m.n_states();
    let mut out = vec![0.0; n];
    let mut arg = vec![0; n];
    for x in 0..n {
        let mut best = f64::INFINITY;
        for (k, c) in m.choices(x).iter().enumerate() {
            let v = c.cost + log_sum_exp(c.support().map(|(y, p)| p.ln() + l * w[y])) / l;
            if v < best {
                best = v;
                arg[x] = k;
            }
        }
        out[x] = best;
    }
    (out, arg)
}

/// V_n(λ, ·) by backward induction from V_0 = 0, with the minimizing
/// decision rule of every epoch.
pub fn optimal_finite_horizon(
    m: &Mdp,
    lambda: RiskCoefficient,
    n: usize,
) -> Result<(ValueFunction, MarkovPolicy)> {
    if n == 0 {
        return Err(Error::Precondition("horizon must be at least 1".into()));
    }
    let l = lambda.get();
    let mut v = vec![0.0; m.n_states()];
    let mut rules = Vec::with_capacity(n);
    for _ in 0..n {
        let (next, arg) = bellman_step(m, l, &v);
        rules.push(StationaryPolicy::from_choice_indices(m, arg)?);
        v = next;
    }
    // rules[k] was computed with k epochs to go after it; epoch t has n-1-t
    rules.reverse();
    Ok((ValueFunction::new(v), MarkovPolicy::from_decision_rules(m, &rules)?))
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimalSolution {
    pub jstar: ValueFunction,
    /// For each state, a stationary policy attaining J* there.
    #[serde(skip)]
    pub per_state_policy: Vec<StationaryPolicy>,
    /// V_N / N at the configured horizon N.
    pub lower_bound: ValueFunction,
    pub lower_bound_horizon: usize,
    /// max_x (J*(x) − V_N(x) / N).
    pub gap: f64,
    pub policies_enumerated: u64,
}

/// J*(λ, ·) as the pointwise minimum of J(λ, f, ·) over all f ∈ F.
///
/// Assumes the simultaneous Doeblin condition holds (see module docs).
pub fn optimal_average(
    m: &Mdp,
    lambda: RiskCoefficient,
    settings: &SolverSettings,
) -> Result<OptimalSolution> {
    let count = checked_policy_count(m, settings.policy_cap)?;
    let n = m.n_states();
    let init = || vec![(f64::INFINITY, u64::MAX); n];
    let best = (0..count)
        .into_par_iter()
        .fold(init, |mut acc, i| {
            let j = long_run_average(m, &policy_at(m, i), lambda);
            for x in 0..n {
                if j[x] < acc[x].0 || (j[x] == acc[x].0 && i < acc[x].1) {
                    acc[x] = (j[x], i);
                }
            }
            acc
        })
        .reduce(init, |a, b| {
            a.into_iter()
                .zip(b)
                .map(|(p, q)| {
                    if p.0 < q.0 || (p.0 == q.0 && p.1 < q.1) {
                        p
                    } else {
                        q
                    }
                })
                .collect()
        });
    let jstar = ValueFunction::new(best.iter().map(|b| b.0).collect());
    let per_state_policy = best.iter().map(|b| policy_at(m, b.1)).collect();

    let horizon = settings.lower_bound_horizon.max(1);
    let (vn, _) = optimal_finite_horizon(m, lambda, horizon)?;
    let lower_bound = vn.map(|v| v / horizon as f64);
    let gap = (0..n)
        .map(|x| jstar[x] - lower_bound[x])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(OptimalSolution {
        jstar,
        per_state_policy,
        lower_bound,
        lower_bound_horizon: horizon,
        gap,
        policies_enumerated: count,
    })
}

/// Level index of every entry: values within [`LEVEL_TOL`] of their sorted
/// neighbour share a level.
pub(crate) fn snap_levels(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut level = vec![0; values.len()];
    let mut current = 0;
    for (k, &i) in order.iter().enumerate() {
        if k > 0 && values[i] - values[order[k - 1]] > LEVEL_TOL {
            current += 1;
        }
        level[i] = current;
    }
    level
}

/// Level of `max{g(y) | p_xy(a) > 0}` for one admissible pair.
pub(crate) fn support_max_level(levels: &[usize], row: &[f64]) -> usize {
    row.iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(y, _)| levels[y])
        .max()
        .expect("rows are nonempty")
}

#[derive(Clone, Debug, Serialize)]
pub struct MinMaxCheck {
    pub holds: bool,
    /// `g(x) − min_a max{g(y) | p_xy(a) > 0}` per state.
    pub residuals: Vec<f64>,
    /// States where the snapped levels disagree.
    pub violations: Vec<usize>,
}

/// Checks `g(x) = min_{a∈A(x)} max{g(y) | p_xy(a) > 0}` after snapping
/// the values of g into levels.
pub fn verify_minmax(m: &Mdp, g: &ValueFunction) -> Result<MinMaxCheck> {
    g.check_len(m)?;
    let levels = snap_levels(g.as_slice());
    let mut residuals = Vec::with_capacity(m.n_states());
    let mut violations = Vec::new();
    for x in 0..m.n_states() {
        let mut best_level = usize::MAX;
        let mut best_value = f64::INFINITY;
        for c in m.choices(x) {
            best_level = best_level.min(support_max_level(&levels, &c.row));
            let v = c
                .support()
                .map(|(y, _)| g[y])
                .fold(f64::NEG_INFINITY, f64::max);
            best_value = best_value.min(v);
        }
        residuals.push(g[x] - best_value);
        if best_level != levels[x] {
            violations.push(x);
        }
    }
    Ok(MinMaxCheck {
        holds: violations.is_empty(),
        residuals,
        violations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSets {
    /// Distinct values γ_0 < γ_1 < … < γ_d (mean of each group).
    pub gammas: Vec<f64>,
    /// G_i: states at level i, ascending.
    pub sets: Vec<Vec<usize>>,
    /// Smallest gap between consecutive levels; 1 when there is one level.
    pub xi1: f64,
}

pub fn level_sets(jstar: &ValueFunction) -> LevelSets {
    let levels = snap_levels(jstar.as_slice());
    let count = levels.iter().copied().max().map_or(0, |d| d + 1);
    let mut sets = vec![Vec::new(); count];
    for (x, &l) in levels.iter().enumerate() {
        sets[l].push(x);
    }
    let gammas: Vec<f64> = sets
        .iter()
        .map(|s| s.iter().map(|&x| jstar[x]).sum::<f64>() / s.len() as f64)
        .collect();
    let xi1 = if gammas.len() <= 1 {
        1.0
    } else {
        gammas
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    };
    LevelSets { gammas, sets, xi1 }
}

/// Why relative value iteration stopped without a solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OptimalityFailure {
    /// The span of the normalized iterate exceeded the divergence cap.
    Growth,
    /// No convergence within the iteration budget.
    Budget,
    /// Converged iterate fails the residual check.
    Residual,
}

#[derive(Clone, Debug, Serialize)]
pub enum OptimalityOutcome {
    Solved {
        gamma: f64,
        h: ValueFunction,
        /// max_x |γ + h(x) − (T h)(x)|.
        residual: f64,
        report: SolveReport,
    },
    /// No solution found within budget. This is not a proof of
    /// non-existence.
    NotFound {
        reason: OptimalityFailure,
        last_gamma: f64,
        report: SolveReport,
    },
}

impl OptimalityOutcome {
    pub fn is_solved(&self) -> bool {
        matches!(self, OptimalityOutcome::Solved { .. })
    }
}

/// Relative value iteration for `e^{λ[γ + h(x)]} = min_a e^{λC(x,a)} Σ_y p_xy(a) e^{λh(y)}`,
/// normalized by `h(z) = 0`.
pub fn solve_optimality_equation(
    m: &Mdp,
    lambda: RiskCoefficient,
    z: usize,
    settings: &SolverSettings,
) -> Result<OptimalityOutcome> {
    if z >= m.n_states() {
        return Err(Error::Precondition(format!("state index {z} out of range")));
    }
    let l = lambda.get();
    let n = m.n_states();
    let mut w = vec![0.0; n];
    let mut gamma = f64::NAN;
    let mut report = SolveReport {
        iterations: 0,
        residual: f64::INFINITY,
        converged: false,
        diverged: false,
    };
    for it in 1..=settings.max_iter {
        let (raw, _) = bellman_step(m, l, &w);
        gamma = raw[z];
        let next: Vec<f64> = raw.iter().map(|v| v - gamma).collect();
        let change = next
            .iter()
            .zip(&w)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        w = next;
        report.iterations = it;
        report.residual = change;
        let span = w.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - w.iter().copied().fold(f64::INFINITY, f64::min);
        if !span.is_finite() || span > settings.divergence_cap {
            report.diverged = true;
            return Ok(OptimalityOutcome::NotFound {
                reason: OptimalityFailure::Growth,
                last_gamma: gamma,
                report,
            });
        }
        if change < settings.tol {
            report.converged = true;
            break;
        }
    }
    if !report.converged {
        return Ok(OptimalityOutcome::NotFound {
            reason: OptimalityFailure::Budget,
            last_gamma: gamma,
            report,
        });
    }
    let (th, _) = bellman_step(m, l, &w);
    let residual = (0..n)
        .map(|x| (gamma + w[x] - th[x]).abs())
        .fold(0.0, f64::max);
    if residual > settings.residual_tol {
        return Ok(OptimalityOutcome::NotFound {
            reason: OptimalityFailure::Residual,
            last_gamma: gamma,
            report,
        });
    }
    Ok(OptimalityOutcome::Solved {
        gamma,
        h: ValueFunction::new(w),
        residual,
        report,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RelativeValue {
    /// `+∞` where the excursion functional diverges.
    pub h: ValueFunction,
    pub divergent: Vec<bool>,
    pub report: SolveReport,
}

/// `h(x) = inf_π (1/λ) log E_x^π[exp(λ Σ_{t<T} (C(X_t, A_t) − γ))]`, T the
/// first positive arrival at `z`.
pub fn relative_value(
    m: &Mdp,
    lambda: RiskCoefficient,
    gamma: f64,
    z: usize,
    settings: &SolverSettings,
) -> Result<RelativeValue> {
    if z >= m.n_states() {
        return Err(Error::Precondition(format!("state index {z} out of range")));
    }
    let n = m.n_states();
    let problem = ExcursionProblem {
        m,
        z,
        theta: lambda.get(),
        allowed: (0..n).map(|x| (0..m.choices(x).len()).collect()).collect(),
        stage: (0..n)
            .map(|x| m.choices(x).iter().map(|c| c.cost - gamma).collect())
            .collect(),
    };
    let sol = problem.solve(settings)?;
    let divergent = sol.values.iter().map(|v| !v.is_finite()).collect();
    Ok(RelativeValue {
        h: sol.values,
        divergent,
        report: sol.report,
    })
}
