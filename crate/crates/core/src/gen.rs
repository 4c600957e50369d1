//! Random models for property tests and experiments.

use rand::seq::index::sample;
use rand::Rng;

use crate::chain::find_doeblin_state;
use crate::error::Result;
use crate::model::{Choice, Mdp};
use crate::simulate::rng_for;

/// Shape of generated models.
#[derive(Clone, Copy, Debug)]
pub struct RandomModelSpec {
    pub states: usize,
    pub actions: usize,
    /// Costs are drawn uniformly from `[-cost_bound, cost_bound]`.
    pub cost_bound: f64,
    /// Largest support of a transition row.
    pub max_support: usize,
}

impl Default for RandomModelSpec {
    fn default() -> Self {
        Self {
            states: 4,
            actions: 2,
            cost_bound: 2.0,
            max_support: 3,
        }
    }
}

/// A generated model together with a state satisfying the Doeblin condition.
#[derive(Clone, Debug)]
pub struct RandomModel {
    pub mdp: Mdp,
    pub z: usize,
    /// Rejected draws before this one.
    pub rejected: usize,
}

fn draw(spec: &RandomModelSpec, rng: &mut impl Rng) -> Result<Mdp> {
    let n = spec.states;
    let states = (0..n).map(|i| format!("s{i}")).collect();
    let actions = (0..spec.actions).map(|i| format!("a{i}")).collect();
    let choices = (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=spec.actions);
            let mut acts: Vec<usize> = sample(rng, spec.actions, k).into_vec();
            acts.sort_unstable();
            acts.into_iter()
                .map(|action| {
                    let support = rng.gen_range(1..=spec.max_support.min(n));
                    let targets = sample(rng, n, support).into_vec();
                    let weights: Vec<f64> = targets.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
                    let total: f64 = weights.iter().sum();
                    let mut row = vec![0.0; n];
                    for (&y, w) in targets.iter().zip(&weights) {
                        row[y] = w / total;
                    }
                    let cost = (rng.gen_range(-spec.cost_bound..=spec.cost_bound) * 100.0).round() / 100.0;
                    Choice { action, cost, row }
                })
                .collect()
        })
        .collect();
    Ok(Mdp::from_parts(states, actions, choices)?)
}

/// Draws models from `(seed, index)` until one passes the Doeblin check.
pub fn random_doeblin_model(spec: &RandomModelSpec, seed: u64, index: u64) -> Result<RandomModel> {
    let mut rng = rng_for(seed, index);
    let mut rejected = 0;
    loop {
        let mdp = draw(spec, &mut rng)?;
        if let Some(report) = find_doeblin_state(&mdp, 1_000_000)? {
            return Ok(RandomModel {
                mdp,
                z: report.z,
                rejected,
            });
        }
        rejected += 1;
    }
}
