//! Optimal exponential excursion cost until the first positive arrival at a
//! state `z`:
//!
//! ```text
//! u(x) = min_{a ∈ B(x)} [ c(x, a) + (1/θ) log( p_xz(a) + Σ_{y≠z} p_xy(a) e^{θ u(y)} ) ]
//! ```
//!
//! Both the relative value function (c = C − γ, θ = λ, B = A) and the
//! deviation function (c = C − J*, θ = λα, B = B*) are instances.
//!
//! Infinite values are decided exactly before iterating: `u*(x) < ∞` iff
//! some stationary policy inside B has a finite excursion value at x, which
//! holds iff no taboo component reachable from x has Perron root ≥ 1 for
//! the weighted matrix `e^{θ c(x, f(x))} p_xy`. Value iteration from `u = 0`
//! then runs on the finite states only, where it converges.

use crate::chain::{log_spectral_radius, strongly_connected_components, NonnegativeMatrix};
use crate::error::{Error, Result};
use crate::logspace::log_sum_exp;
use crate::model::{Mdp, ValueFunction};
use crate::solver::{SolveReport, SolverSettings};

/// Perron roots within this (log) distance of 1 count as ≥ 1.
const CRITICAL_LOG_TOL: f64 = 1e-12;

pub(crate) struct ExcursionProblem<'a> {
    pub m: &'a Mdp,
    pub z: usize,
    pub theta: f64,
    /// Allowed choice indices per state, ascending.
    pub allowed: Vec<Vec<usize>>,
    /// Stage cost per state and allowed entry, aligned with `allowed`.
    pub stage: Vec<Vec<f64>>,
}

pub(crate) struct ExcursionSolution {
    pub values: ValueFunction,
    pub report: SolveReport,
}

impl ExcursionProblem<'_> {
    fn policy_count(&self) -> u128 {
        self.allowed
            .iter()
            .fold(1u128, |acc, l| acc.saturating_mul(l.len() as u128))
    }

    /// States with a finite optimal excursion value.
    fn finite_states(&self, policy_cap: u64) -> Result<Vec<bool>> {
        let n = self.m.n_states();
        let count = self.policy_count();
        if count > policy_cap as u128 {
            return Err(Error::EnumerationCap {
                count,
                cap: policy_cap,
            });
        }
        let keep: Vec<usize> = (0..n).filter(|&y| y != self.z).collect();
        let mut finite = vec![false; n];
        let mut digits = vec![0usize; n];
        for _ in 0..count as u64 {
            // weighted taboo matrix of this policy
            let mut log_entries = Vec::with_capacity(keep.len() * keep.len());
            for &x in &keep {
                let k = digits[x];
                let c = &self.m.choices(x)[self.allowed[x][k]];
                let w = self.theta * self.stage[x][k];
                log_entries.extend(keep.iter().map(|&y| w + c.row[y].ln()));
            }
            let q = NonnegativeMatrix::from_log_entries(keep.clone(), log_entries)
                .expect("finite weights");
            let sccs = strongly_connected_components(&q);
            let mut comp = vec![0usize; keep.len()];
            for (ci, members) in sccs.iter().enumerate() {
                for &i in members {
                    comp[i] = ci;
                }
            }
            let mut bad = vec![false; sccs.len()];
            for ci in (0..sccs.len()).rev() {
                let members = &sccs[ci];
                let mut b = {
                    let idx: Vec<usize> = members.clone();
                    let mut block = Vec::with_capacity(idx.len() * idx.len());
                    for &i in &idx {
                        for &j in &idx {
                            block.push(q.log_entry(i, j));
                        }
                    }
                    let sub = NonnegativeMatrix::from_log_entries(idx, block).expect("block");
                    log_spectral_radius(&sub) >= -CRITICAL_LOG_TOL
                };
                for &i in members {
                    for j in 0..keep.len() {
                        if comp[j] != ci && q.log_entry(i, j) > f64::NEG_INFINITY && bad[comp[j]] {
                            b = true;
                        }
                    }
                }
                bad[ci] = b;
            }
            for (i, &x) in keep.iter().enumerate() {
                if !bad[comp[i]] {
                    finite[x] = true;
                }
            }
            // advance odometer over non-z states
            for &x in keep.iter().rev() {
                digits[x] += 1;
                if digits[x] < self.allowed[x].len() {
                    break;
                }
                digits[x] = 0;
            }
        }
        finite[self.z] = self.allowed[self.z].iter().any(|&k| {
            self.m.choices(self.z)[k]
                .support()
                .all(|(y, _)| y == self.z || finite[y])
        });
        Ok(finite)
    }

    pub fn solve(&self, settings: &SolverSettings) -> Result<ExcursionSolution> {
        let n = self.m.n_states();
        let mut finite = self.finite_states(settings.policy_cap)?;
        // usable entries: all non-z successors finite
        let usable: Vec<Vec<usize>> = (0..n)
            .map(|x| {
                (0..self.allowed[x].len())
                    .filter(|&k| {
                        self.m.choices(x)[self.allowed[x][k]]
                            .support()
                            .all(|(y, _)| y == self.z || finite[y])
                    })
                    .collect()
            })
            .collect();

        let theta = self.theta;
        let mut u = vec![0.0f64; n];
        let mut report = SolveReport {
            iterations: 0,
            residual: f64::INFINITY,
            converged: false,
            diverged: false,
        };
        for it in 1..=settings.max_iter {
            let mut next = u.clone();
            let mut change = 0.0f64;
            for x in 0..n {
                if !finite[x] {
                    continue;
                }
                let mut best = f64::INFINITY;
                for &k in &usable[x] {
                    let c = &self.m.choices(x)[self.allowed[x][k]];
                    let tail = log_sum_exp(c.support().map(|(y, p)| {
                        if y == self.z {
                            p.ln()
                        } else {
                            p.ln() + theta * u[y]
                        }
                    }));
                    let v = self.stage[x][k] + tail / theta;
                    if v < best {
                        best = v;
                    }
                }
                next[x] = best;
                change = change.max((best - u[x]).abs());
            }
            u = next;
            report.iterations = it;
            report.residual = change;
            if let Some(x) = (0..n).find(|&x| finite[x] && u[x].abs() > settings.divergence_cap) {
                // numerically divergent despite the spectral screen
                finite[x] = false;
                report.diverged = true;
                break;
            }
            if change < settings.tol {
                report.converged = true;
                break;
            }
        }
        let values = ValueFunction::new(
            (0..n)
                .map(|x| if finite[x] { u[x] } else { f64::INFINITY })
                .collect(),
        );
        if !values.is_finite() {
            report.diverged = true;
        }
        Ok(ExcursionSolution { values, report })
    }
}
