//! Risk-sensitive evaluation of given policies: certain equivalents,
//! finite-horizon certain-equivalent costs by exponential backward
//! recursion, and long-run averages of stationary policies from Perron roots.

use serde::Serialize;

use crate::chain::{log_spectral_radius, strongly_connected_components, NonnegativeMatrix};
use crate::error::{Error, Result};
use crate::logspace::log_sum_exp;
use crate::model::{Mdp, RiskCoefficient, StationaryPolicy, ValueFunction};

/// Longest horizon a [`MarkovPolicy`] may carry.
pub const MAX_HORIZON: usize = 100_000;

const PROB_TOL: f64 = 1e-10;

/// A random cost with finitely many outcomes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiniteCostDistribution {
    outcomes: Vec<(f64, f64)>,
}

impl FiniteCostDistribution {
    /// `outcomes` are `(value, probability)` pairs.
    pub fn new(outcomes: Vec<(f64, f64)>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        for &(v, p) in &outcomes {
            if !v.is_finite() || !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidDistribution(format!("bad outcome ({v}, {p})")));
            }
        }
        let total: f64 = outcomes.iter().map(|o| o.1).sum();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self { outcomes })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            outcomes: vec![(value, 1.0)],
        }
    }

    pub fn outcomes(&self) -> &[(f64, f64)] {
        &self.outcomes
    }

    pub fn mean(&self) -> f64 {
        self.outcomes.iter().map(|(v, p)| v * p).sum()
    }
}

/// E(λ, Y) = (1/λ) log E[e^{λY}].
pub fn certain_equivalent(lambda: RiskCoefficient, y: &FiniteCostDistribution) -> f64 {
    let l = lambda.get();
    log_sum_exp(
        y.outcomes
            .iter()
            .filter(|(_, p)| *p > 0.0)
            .map(|(v, p)| p.ln() + l * v),
    ) / l
}

/// A Markov (history-independent, possibly randomized) policy over a finite
/// horizon. `rows[t][x][k]` is the probability of the `k`-th admissible
/// action of state `x` at epoch `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovPolicy {
    rows: Vec<Vec<Vec<f64>>>,
}

impl MarkovPolicy {
    pub fn new(m: &Mdp, rows: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if rows.len() > MAX_HORIZON {
            return Err(Error::HorizonTooLong(rows.len()));
        }
        for epoch in &rows {
            if epoch.len() != m.n_states() {
                return Err(Error::DimensionMismatch {
                    expected: m.n_states(),
                    got: epoch.len(),
                });
            }
            for (x, row) in epoch.iter().enumerate() {
                if row.len() != m.choices(x).len() {
                    return Err(Error::DimensionMismatch {
                        expected: m.choices(x).len(),
                        got: row.len(),
                    });
                }
                let total: f64 = row.iter().sum();
                if row.iter().any(|p| !(p.is_finite() && *p >= 0.0))
                    || (total - 1.0).abs() > PROB_TOL
                {
                    return Err(Error::InvalidDistribution(format!(
                        "action row at state `{}` is not a probability vector",
                        m.state_name(x)
                    )));
                }
            }
        }
        Ok(Self { rows })
    }

    /// `f` repeated for `horizon` epochs.
    pub fn stationary(m: &Mdp, f: &StationaryPolicy, horizon: usize) -> Result<Self> {
        if horizon > MAX_HORIZON {
            return Err(Error::HorizonTooLong(horizon));
        }
        let epoch: Vec<Vec<f64>> = (0..m.n_states())
            .map(|x| {
                let mut row = vec![0.0; m.choices(x).len()];
                row[f.choice_indices()[x]] = 1.0;
                row
            })
            .collect();
        Ok(Self {
            rows: vec![epoch; horizon],
        })
    }

    /// Deterministic policy from per-epoch stationary decision rules.
    pub fn from_decision_rules(m: &Mdp, rules: &[StationaryPolicy]) -> Result<Self> {
        if rules.len() > MAX_HORIZON {
            return Err(Error::HorizonTooLong(rules.len()));
        }
        let rows = rules
            .iter()
            .map(|f| {
                (0..m.n_states())
                    .map(|x| {
                        let mut row = vec![0.0; m.choices(x).len()];
                        row[f.choice_indices()[x]] = 1.0;
                        row
                    })
                    .collect()
            })
            .collect();
        Ok(Self { rows })
    }

    pub fn horizon(&self) -> usize {
        self.rows.len()
    }

    /// Action probabilities at epoch `t`, state `x`, by choice index.
    pub fn row(&self, t: usize, x: usize) -> &[f64] {
        &self.rows[t][x]
    }
}

/// J_n(λ, π, ·): the certain equivalent of the cost accumulated over
/// epochs `0..n`, by backward recursion in the log domain.
pub fn finite_horizon_cost(
    m: &Mdp,
    pi: &MarkovPolicy,
    lambda: RiskCoefficient,
    n: usize,
) -> Result<ValueFunction> {
    if n > pi.horizon() {
        return Err(Error::Precondition(format!(
            "horizon {n} exceeds the policy horizon {}",
            pi.horizon()
        )));
    }
    let l = lambda.get();
    let size = m.n_states();
    // w holds λ W_k
    let mut w = vec![0.0; size];
    for k in 0..n {
        let t = n - 1 - k;
        let next: Vec<f64> = (0..size)
            .map(|x| {
                log_sum_exp(m.choices(x).iter().zip(pi.row(t, x)).filter(|(_, &q)| q > 0.0).map(
                    |(c, &q)| {
                        q.ln()
                            + l * c.cost
                            + log_sum_exp(c.support().map(|(y, p)| p.ln() + w[y]))
                    },
                ))
            })
            .collect();
        w = next;
    }
    Ok(ValueFunction::new(w.into_iter().map(|v| v / l).collect()))
}

/// Q_f(x, y) = e^{λC(x, f(x))} p_xy(f(x)) over all states, in log form.
pub fn risk_matrix(m: &Mdp, f: &StationaryPolicy, lambda: RiskCoefficient) -> NonnegativeMatrix {
    let n = m.n_states();
    let l = lambda.get();
    let mut log_entries = Vec::with_capacity(n * n);
    for x in 0..n {
        let c = f.choice(m, x);
        log_entries.extend(c.row.iter().map(|&p| l * c.cost + p.ln()));
    }
    NonnegativeMatrix::from_log_entries((0..n).collect(), log_entries)
        .expect("risk matrix entries are finite or zero")
}

/// J(λ, f, x) = (1/λ) log sp(Q_f restricted to the states reachable from
/// x): the largest Perron root over components reachable from x.
pub fn long_run_average(m: &Mdp, f: &StationaryPolicy, lambda: RiskCoefficient) -> ValueFunction {
    let q = risk_matrix(m, f, lambda);
    let n = m.n_states();
    let sccs = strongly_connected_components(&q);
    let mut component = vec![0usize; n];
    for (c, members) in sccs.iter().enumerate() {
        for &x in members {
            component[x] = c;
        }
    }
    // components are topologically ordered, so successors come later
    let mut best = vec![f64::NEG_INFINITY; sccs.len()];
    for c in (0..sccs.len()).rev() {
        let members = &sccs[c];
        let own = if members.len() == 1 {
            q.log_entry(members[0], members[0])
        } else {
            let index: Vec<usize> = members.clone();
            let mut block = Vec::with_capacity(index.len() * index.len());
            for &i in &index {
                for &j in &index {
                    block.push(q.log_entry(i, j));
                }
            }
            log_spectral_radius(
                &NonnegativeMatrix::from_log_entries(index, block).expect("sub-block"),
            )
        };
        let mut v = own;
        for &x in members {
            for (y, _) in f.choice(m, x).support() {
                if component[y] != c {
                    v = v.max(best[component[y]]);
                }
            }
        }
        best[c] = v;
    }
    let l = lambda.get();
    ValueFunction::new((0..n).map(|x| best[component[x]] / l).collect())
}

/// `(J_n(λ, f, x) / n, J(λ, f, x))`, for checking that the running average
/// approaches the Perron-root value.
pub fn verify_growth(
    m: &Mdp,
    f: &StationaryPolicy,
    lambda: RiskCoefficient,
    x: usize,
    n: usize,
) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::Precondition("growth check needs n ≥ 1".into()));
    }
    let pi = MarkovPolicy::stationary(m, f, n)?;
    let jn = finite_horizon_cost(m, &pi, lambda, n)?;
    let j = long_run_average(m, f, lambda);
    Ok((jn[x] / n as f64, j[x]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example22::example22;
    use crate::model::load_model;

    fn lam(v: f64) -> RiskCoefficient {
        RiskCoefficient::new(v).unwrap()
    }

    #[test]
    fn certain_equivalent_examples() {
        assert_eq!(
            certain_equivalent(lam(2.0), &FiniteCostDistribution::constant(3.25)),
            3.25
        );
        let y = FiniteCostDistribution::new(vec![(0.0, 0.5), (2.0, 0.5)]).unwrap();
        let expected = (0.5 * (1.0 + 2f64.exp())).ln();
        assert!((certain_equivalent(lam(1.0), &y) - expected).abs() < 1e-14);
        assert!((expected - 1.433_780_830_483_027).abs() < 1e-12);
        assert!(certain_equivalent(lam(1.0), &y) > y.mean());
    }

    #[test]
    fn distribution_validation() {
        assert!(FiniteCostDistribution::new(vec![]).is_err());
        assert!(FiniteCostDistribution::new(vec![(1.0, 0.5)]).is_err());
        assert!(FiniteCostDistribution::new(vec![(1.0, -0.5), (0.0, 1.5)]).is_err());
    }

    #[test]
    fn one_step_cost() {
        let m = example22(0.5).unwrap();
        let f = StationaryPolicy::from_names(&m, &[("1", "1")]).unwrap();
        let pi = MarkovPolicy::stationary(&m, &f, 1).unwrap();
        let j1 = finite_horizon_cost(&m, &pi, lam(1.7), 1).unwrap();
        assert_eq!(j1.as_slice(), &[0.0, 1.0, 2.0]);
    }

    #[test]
    fn two_step_cost_from_two() {
        let m = example22(0.5).unwrap();
        let f = StationaryPolicy::from_names(&m, &[("1", "0")]).unwrap();
        let pi = MarkovPolicy::stationary(&m, &f, 2).unwrap();
        let j2 = finite_horizon_cost(&m, &pi, lam(1.0), 2).unwrap();
        let e2 = 2f64.exp();
        let expected = (e2 * (0.25 * e2 + 0.75)).ln();
        assert!((j2[2] - expected).abs() < 1e-13);
        assert!((expected - 2.954_458_6).abs() < 1e-7);
    }

    #[test]
    fn horizon_checks() {
        let m = example22(0.5).unwrap();
        let f = StationaryPolicy::from_names(&m, &[("1", "0")]).unwrap();
        let pi = MarkovPolicy::stationary(&m, &f, 2).unwrap();
        assert!(finite_horizon_cost(&m, &pi, lam(1.0), 3).is_err());
        assert!(matches!(
            MarkovPolicy::stationary(&m, &f, MAX_HORIZON + 1),
            Err(Error::HorizonTooLong(_))
        ));
    }

    #[test]
    fn long_run_example_regimes() {
        let m = example22(0.5).unwrap();
        let f = StationaryPolicy::from_names(&m, &[("1", "0")]).unwrap();
        let j = long_run_average(&m, &f, lam(1.0));
        let j1 = 1.0 + 0.5f64.ln();
        assert_eq!(j[0], 0.0);
        assert!((j[1] - j1).abs() < 1e-14);
        assert!((j[2] - 2.0 * j1).abs() < 1e-14);
        let j = long_run_average(&m, &f, lam(0.5));
        assert!(j.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn single_state_average_is_its_cost() {
        let m = load_model(
            r#"{"states":["s"],"actions":["a"],"admissible":{"s":["a"]},
            "cost":{"s":{"a":-1.25}},"transitions":{"s":{"a":{"s":1}}}}"#,
        )
        .unwrap();
        let f = StationaryPolicy::from_choice_indices(&m, vec![0]).unwrap();
        for l in [0.1, 1.0, 30.0] {
            assert!((long_run_average(&m, &f, lam(l))[0] + 1.25).abs() < 1e-14);
        }
    }

    #[test]
    fn growth_approaches_perron_value() {
        let m = example22(0.5).unwrap();
        let f = StationaryPolicy::from_names(&m, &[("1", "0")]).unwrap();
        let (avg, limit) = verify_growth(&m, &f, lam(1.0), 2, 200).unwrap();
        assert!((avg - 0.613_705_6).abs() < 0.05);
        assert!((limit - 0.613_705_6).abs() < 1e-7);
        let (avg, limit) = verify_growth(&m, &f, lam(1.0), 0, 50).unwrap();
        assert_eq!((avg, limit), (0.0, 0.0));
    }
}
