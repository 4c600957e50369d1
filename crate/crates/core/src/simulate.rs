//! Seeded Monte Carlo over stationary policies, used to cross-check the
//! analytic quantities.
//!
//! Every sampled path draws from its own ChaCha8 stream selected by
//! `(seed, stream index)`, so results do not depend on sampling order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logspace::LogSumExp;
use crate::model::{Mdp, RiskCoefficient, StationaryPolicy};

pub const MIN_SAMPLES: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Step {
    pub state: usize,
    pub action: usize,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    /// X_n, the state after the last step.
    pub final_state: usize,
    pub seed: u64,
    pub stream: u64,
}

impl Trajectory {
    /// X_0, …, X_n.
    pub fn states(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps
            .iter()
            .map(|s| s.state)
            .chain(std::iter::once(self.final_state))
    }

    pub fn total_cost(&self) -> f64 {
        self.steps.iter().map(|s| s.cost).sum()
    }
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn next_state(rng: &mut ChaCha8Rng, row: &[f64]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (y, &p) in row.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = y;
            if u < acc {
                return y;
            }
        }
    }
    last
}

/// Path of `n` steps from `x` under `f`, using stream 0 of `seed`.
pub fn sample_trajectory(
    m: &Mdp,
    f: &StationaryPolicy,
    x: usize,
    n: usize,
    seed: u64,
) -> Result<Trajectory> {
    sample_trajectory_stream(m, f, x, n, seed, 0)
}

pub fn sample_trajectory_stream(
    m: &Mdp,
    f: &StationaryPolicy,
    x: usize,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<Trajectory> {
    if n == 0 {
        return Err(Error::Precondition("trajectory length must be at least 1".into()));
    }
    let mut rng = rng_for(seed, stream);
    let mut steps = Vec::with_capacity(n);
    let mut state = x;
    for _ in 0..n {
        let c = f.choice(m, state);
        steps.push(Step {
            state,
            action: c.action,
            cost: c.cost,
        });
        state = next_state(&mut rng, &c.row);
    }
    Ok(Trajectory {
        steps,
        final_state: state,
        seed,
        stream,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    /// Delta-method standard error of the estimate.
    pub stderr: f64,
    pub samples: usize,
    /// The top 1% of sample weights carry more than half of the total.
    pub heavy_tail: bool,
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::Precondition(format!(
            "need at least {MIN_SAMPLES} samples, got {samples}"
        )));
    }
    Ok(())
}

/// Estimates J_n(λ, f, x) = (1/λ) log E[exp(λ Σ_{t<n} C(X_t, A_t))].
pub fn mc_certain_equivalent(
    m: &Mdp,
    f: &StationaryPolicy,
    lambda: RiskCoefficient,
    x: usize,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    check_samples(samples)?;
    let l = lambda.get();
    let mut logw = Vec::with_capacity(samples);
    for i in 0..samples {
        let path = sample_trajectory_stream(m, f, x, n, seed, i as u64)?;
        logw.push(l * path.total_cost());
    }
    let mut acc = LogSumExp::new();
    for &v in &logw {
        acc.push(v);
    }
    let count = samples as f64;
    let log_mean = acc.value() - count.ln();
    let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = logw.iter().map(|v| (v - top).exp()).collect();
    let mean = w.iter().sum::<f64>() / count;
    let var = w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
    let stderr = (var / count).sqrt() / mean / l;

    w.sort_by(|a, b| b.total_cmp(a));
    let top_k = samples.div_ceil(100);
    let total: f64 = w.iter().sum();
    let heavy_tail = w[..top_k].iter().sum::<f64>() > 0.5 * total;
    Ok(McEstimate {
        estimate: log_mean / l,
        stderr,
        samples,
        heavy_tail,
    })
}

/// Empirical `P_x[T ≥ k]` for `k = 0..=n`, one curve per start state.
pub fn mc_hitting_tail(
    m: &Mdp,
    f: &StationaryPolicy,
    z: usize,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    check_samples(samples)?;
    let states = m.n_states();
    let mut curves = Vec::with_capacity(states);
    for x in 0..states {
        // at_least[k] counts paths with T ≥ k
        let mut at_least = vec![0usize; n + 1];
        for i in 0..samples {
            let mut rng = rng_for(seed, (x * samples + i) as u64);
            let mut state = x;
            let mut t_hit = n + 1;
            for t in 1..=n {
                state = next_state(&mut rng, &f.choice(m, state).row);
                if state == z {
                    t_hit = t;
                    break;
                }
            }
            for slot in at_least.iter_mut().take(t_hit.min(n) + 1) {
                *slot += 1;
            }
        }
        curves.push(at_least.iter().map(|&c| c as f64 / samples as f64).collect());
    }
    Ok(curves)
}
