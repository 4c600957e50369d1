//! Oracles shared by the test targets.

#![allow(dead_code, clippy::too_many_arguments)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rsmdp::*;

pub fn lam(v: f64) -> RiskCoefficient {
    RiskCoefficient::new(v).unwrap()
}

/// Small fixtures with at most three states.
pub fn small_fixtures() -> Vec<(String, Mdp)> {
    let mut out = Vec::new();
    for rho in [0.3, 0.5, 0.8] {
        out.push((format!("fixture rho={rho}"), example22(rho).unwrap()));
    }
    out.push((
        "single state".into(),
        load_model(
            r#"{"states":["s"],"actions":["a","b"],"admissible":{"s":["a","b"]},
            "cost":{"s":{"a":1.25,"b":-0.5}},"transitions":{"s":{"a":{"s":1},"b":{"s":1}}}}"#,
        )
        .unwrap(),
    ));
    out.push((
        "two-cycle".into(),
        load_model(
            r#"{"states":["a","b"],"actions":["go","wait"],"admissible":{"a":["go","wait"],"b":["go"]},
            "cost":{"a":{"go":0,"wait":0.4},"b":{"go":2}},
            "transitions":{"a":{"go":{"b":1},"wait":{"a":0.5,"b":0.5}},"b":{"go":{"a":1}}}}"#,
        )
        .unwrap(),
    ));
    let spec = RandomModelSpec {
        states: 3,
        ..RandomModelSpec::default()
    };
    for i in 0..8 {
        out.push((
            format!("random #{i}"),
            random_doeblin_model(&spec, 77, i).unwrap().mdp,
        ));
    }
    out
}

/// Randomised Markov policy with `n` epochs drawn from `rng`.
pub fn random_markov_policy(m: &Mdp, n: usize, rng: &mut ChaCha8Rng) -> MarkovPolicy {
    let rows = (0..n)
        .map(|_| {
            (0..m.n_states())
                .map(|x| {
                    let w: Vec<f64> = m.choices(x).iter().map(|_| rng.gen_range(0.0..1.0)).collect();
                    let total: f64 = w.iter().sum();
                    w.iter().map(|v| v / total).collect()
                })
                .collect()
        })
        .collect();
    MarkovPolicy::new(m, rows).unwrap()
}

/// Σ over all (state, action) paths of length n of weight · e^{λ·cost}.
pub fn enumerate_paths(m: &Mdp, pi: &MarkovPolicy, l: f64, x: usize, n: usize) -> f64 {
    fn go(m: &Mdp, pi: &MarkovPolicy, l: f64, t: usize, n: usize, x: usize, w: f64, cost: f64) -> f64 {
        if t == n {
            return w * (l * cost).exp();
        }
        let mut total = 0.0;
        for (k, c) in m.choices(x).iter().enumerate() {
            let pk = pi.row(t, x)[k];
            if pk == 0.0 {
                continue;
            }
            for (y, &p) in c.row.iter().enumerate() {
                if p > 0.0 {
                    total += go(m, pi, l, t + 1, n, y, w * pk * p, cost + c.cost);
                }
            }
        }
        total
    }
    go(m, pi, l, 0, n, x, 1.0, 0.0)
}



/// Minimum truncation depth; enumeration continues past it until the mass
/// still in flight is negligible.
pub const TRUNCATION: usize = 60;
pub const IN_FLIGHT_TOL: f64 = 1e-12;
pub const MAX_DEPTH: usize = 200_000;

/// Truncated excursion value under a stationary f:
/// `(1/θ) log Σ_{k ≤ N} E[e^{θ Σ_{t<T} s(X_t)}; T = k]`, plus the
/// weighted mass still in flight after N steps and N itself.
pub fn truncated_excursion(
    m: &Mdp,
    f: &StationaryPolicy,
    stage: &[f64],
    theta: f64,
    z: usize,
    x: usize,
    min_depth: usize,
    in_flight_tol: f64,
) -> (f64, f64, usize) {
    let n = m.n_states();
    let mut alive = vec![0.0; n];
    alive[x] = 1.0;
    let mut arrived = 0.0;
    let mut steps = 0;
    while steps < min_depth || (alive.iter().sum::<f64>() > in_flight_tol && steps < MAX_DEPTH) {
        steps += 1;
        let mut next = vec![0.0; n];
        for (y, &w) in alive.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let c = f.choice(m, y);
            let w = w * (theta * stage[y]).exp();
            for (v, &p) in c.row.iter().enumerate() {
                if p > 0.0 {
                    if v == z {
                        arrived += w * p;
                    } else {
                        next[v] += w * p;
                    }
                }
            }
        }
        alive = next;
    }
    (arrived.ln() / theta, alive.iter().sum(), steps)
}

/// Worst disagreement between `finite_horizon_cost` and path enumeration
/// over the small fixtures, λ ∈ {0.3, 1, 2.5}, n ≤ 6, random Markov
/// policies; and the number of comparisons.
pub fn finite_horizon_worst() -> (f64, String, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut worst, mut at, mut checked) = (0.0f64, String::new(), 0);
    for (name, m) in small_fixtures() {
        for l in [0.3, 1.0, 2.5] {
            for n in 1..=6 {
                let pi = random_markov_policy(&m, n, &mut rng);
                let j = finite_horizon_cost(&m, &pi, lam(l), n).unwrap();
                for x in 0..m.n_states() {
                    let oracle = enumerate_paths(&m, &pi, l, x, n).ln() / l;
                    let err = (j[x] - oracle).abs();
                    if err.is_nan() || err > worst {
                        worst = err;
                        at = format!("{name}, λ={l}, n={n}, x={x}");
                    }
                    checked += 1;
                }
            }
        }
    }
    (worst, at, checked)
}

pub struct DeviationAgreement {
    pub worst: f64,
    pub at: String,
    /// Largest mass still in flight for the minimising policy.
    pub in_flight: f64,
    pub post_checks: bool,
    pub checked: usize,
}

/// Deviation function against truncated enumeration over every
/// restricted stationary policy on the small Doeblin fixtures.
pub fn deviation_agreement() -> DeviationAgreement {
    let settings = SolverSettings::default();
    let mut out = DeviationAgreement {
        worst: 0.0,
        at: String::new(),
        in_flight: 0.0,
        post_checks: true,
        checked: 0,
    };
    for (name, m) in small_fixtures() {
        let Some(doeblin) = find_doeblin_state(&m, 1_000).unwrap() else {
            continue;
        };
        let z = doeblin.z;
        for l in [0.5, 1.0] {
            let jstar = optimal_average(&m, lam(l), &settings).unwrap().jstar;
            let b = action_restriction(&m, &jstar).unwrap();
            for alpha in [0.5, 0.9] {
                let theta = l * alpha;
                let dev = deviation_function(&m, lam(l), alpha, &jstar, z, &settings).unwrap();
                out.post_checks &= dev.post_checks_pass();
                for x in 0..m.n_states() {
                    let mut best = f64::INFINITY;
                    let mut best_alive = 0.0;
                    for f in enumerate_stationary_policies(&m).filter(|f| b.contains(&m, f)) {
                        let stage: Vec<f64> =
                            (0..m.n_states()).map(|y| f.choice(&m, y).cost - jstar[y]).collect();
                        let (v, alive, _) =
                            truncated_excursion(&m, &f, &stage, theta, z, x, TRUNCATION, IN_FLIGHT_TOL);
                        if v < best {
                            best = v;
                            best_alive = alive;
                        }
                    }
                    out.in_flight = out.in_flight.max(best_alive);
                    let err = (dev.h[x] - best).abs();
                    if err.is_nan() || err > out.worst {
                        out.worst = err;
                        out.at = format!("{name}, λ={l}, α={alpha}, x={x}");
                    }
                    out.checked += 1;
                }
            }
        }
    }
    out
}
