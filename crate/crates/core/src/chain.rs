//! Graph and linear-algebra substrate for fixed stationary policies:
//! reachability, strongly connected components, expected hitting times, the
//! simultaneous Doeblin check, Perron roots and geometric tail envelopes.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use petgraph::graph::DiGraph;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::logspace::{log_add_exp, log_sum_exp};
use crate::model::{checked_policy_count, policy_at, Mdp, StationaryPolicy, ValueFunction};

const POWER_MAX_ITER: usize = 100_000;
const POWER_REL_TOL: f64 = 1e-12;

/// Square nonnegative matrix over a subset of states. Entries are kept as
/// natural logarithms (`-∞` for zero) so that matrices like
/// `e^{λC(x)} p_xy` stay representable for large λ‖C‖.
#[derive(Clone, Debug, PartialEq)]
pub struct NonnegativeMatrix {
    index: Vec<usize>,
    log_entries: Vec<f64>,
}

impl NonnegativeMatrix {
    /// `entries` is row-major, `index.len()` squared long, all ≥ 0.
    pub fn from_entries(index: Vec<usize>, entries: &[f64]) -> Result<Self> {
        let n = index.len();
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        if let Some(&bad) = entries.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::OutOfRange {
                what: "matrix entry",
                range: "[0, ∞)",
                value: bad,
            });
        }
        Ok(Self {
            index,
            log_entries: entries.iter().map(|v| v.ln()).collect(),
        })
    }

    /// Row-major natural logarithms of the entries; `-∞` marks zeros.
    pub fn from_log_entries(index: Vec<usize>, log_entries: Vec<f64>) -> Result<Self> {
        let n = index.len();
        if log_entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: log_entries.len(),
            });
        }
        if let Some(&bad) = log_entries.iter().find(|v| v.is_nan() || **v == f64::INFINITY) {
            return Err(Error::OutOfRange {
                what: "log matrix entry",
                range: "[-∞, ∞)",
                value: bad,
            });
        }
        Ok(Self { index, log_entries })
    }

    /// Dense square matrix with index `0..n`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_entries((0..n).collect(), &flat)
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    /// State labels of the rows/columns.
    pub fn index(&self) -> &[usize] {
        &self.index
    }

    pub fn log_entry(&self, i: usize, j: usize) -> f64 {
        self.log_entries[i * self.dim() + j]
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.log_entry(i, j).exp()
    }

    fn positive(&self, i: usize, j: usize) -> bool {
        self.log_entry(i, j) > f64::NEG_INFINITY
    }

    /// Sub-block on local positions `keep`.
    fn restrict(&self, keep: &[usize]) -> NonnegativeMatrix {
        let mut log_entries = Vec::with_capacity(keep.len() * keep.len());
        for &i in keep {
            for &j in keep {
                log_entries.push(self.log_entry(i, j));
            }
        }
        NonnegativeMatrix {
            index: keep.iter().map(|&i| self.index[i]).collect(),
            log_entries,
        }
    }
}

/// Strongly connected components of the positive-entry digraph of `g`, as
/// lists of local positions, in topological order (a component only has
/// edges into components listed after it).
pub fn strongly_connected_components(g: &NonnegativeMatrix) -> Vec<Vec<usize>> {
    let n = g.dim();
    let mut graph = DiGraph::<(), ()>::with_capacity(n, n * n);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if g.positive(i, j) {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    // tarjan_scc yields reverse topological order.
    let mut sccs: Vec<Vec<usize>> = petgraph::algo::tarjan_scc(&graph)
        .into_iter()
        .map(|c| {
            let mut v: Vec<usize> = c.into_iter().map(|ix| ix.index()).collect();
            v.sort_unstable();
            v
        })
        .collect();
    sccs.reverse();
    sccs
}

/// Natural log of the spectral radius; `-∞` for a nilpotent matrix.
pub fn log_spectral_radius(q: &NonnegativeMatrix) -> f64 {
    strongly_connected_components(q)
        .iter()
        .map(|scc| block_log_radius(&q.restrict(scc)))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Perron root sp(q), computed per strongly connected component.
pub fn spectral_radius(q: &NonnegativeMatrix) -> f64 {
    log_spectral_radius(q).exp()
}

/// Log Perron root of an irreducible block by shifted power iteration in
/// the log domain. The iterate is bracketed by the Collatz–Wielandt bounds
/// `min_i (Qv)_i / v_i ≤ sp(Q) ≤ max_i (Qv)_i / v_i`; the shift tracks the
/// bracket midpoint, which removes periodicity without changing the Perron
/// vector.
fn block_log_radius(q: &NonnegativeMatrix) -> f64 {
    let n = q.dim();
    if n == 1 {
        return q.log_entry(0, 0);
    }
    let mut v = vec![0.0f64; n];
    let mut qv = vec![0.0f64; n];
    let mut previous = f64::NAN;
    let mut estimate = f64::NAN;
    for _ in 0..POWER_MAX_ITER {
        for (i, out) in qv.iter_mut().enumerate() {
            *out = log_sum_exp((0..n).map(|j| q.log_entry(i, j) + v[j]));
        }
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..n {
            let r = qv[i] - v[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        estimate = 0.5 * (lo + hi);
        if hi - lo <= POWER_REL_TOL || (estimate - previous).abs() <= POWER_REL_TOL * 1e-3 {
            return estimate;
        }
        previous = estimate;
        let mut top = f64::NEG_INFINITY;
        for i in 0..n {
            v[i] = log_add_exp(qv[i], estimate + v[i]);
            top = top.max(v[i]);
        }
        for vi in v.iter_mut() {
            *vi -= top;
        }
    }
    estimate
}

/// Positive-probability successor lists of the chain driven by `f`.
pub(crate) fn successors(m: &Mdp, f: &StationaryPolicy) -> Vec<Vec<usize>> {
    (0..m.n_states())
        .map(|x| f.choice(m, x).support().map(|(y, _)| y).collect())
        .collect()
}

fn reach_from(succ: &[Vec<usize>], start: usize, blocked: Option<usize>) -> Vec<bool> {
    let mut seen = vec![false; succ.len()];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(u) = stack.pop() {
        if Some(u) == blocked && u != start {
            continue;
        }
        for &w in &succ[u] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    seen
}

/// States reachable from `x` with positive probability under `f`,
/// including `x` itself.
pub fn reachable_set(m: &Mdp, f: &StationaryPolicy, x: usize) -> BTreeSet<usize> {
    reach_from(&successors(m, f), x, None)
        .into_iter()
        .enumerate()
        .filter_map(|(y, r)| r.then_some(y))
        .collect()
}

/// States `y ≠ z` from which the first positive visit to `z` happens with
/// probability one under the chain `succ`.
fn sure_arrival(succ: &[Vec<usize>], z: usize) -> Vec<bool> {
    let n = succ.len();
    // can_reach[y]: some path y -> ... -> z
    let mut pred = vec![Vec::new(); n];
    for (u, list) in succ.iter().enumerate() {
        for &w in list {
            pred[w].push(u);
        }
    }
    let mut can_reach = vec![false; n];
    let mut stack = vec![z];
    while let Some(w) = stack.pop() {
        for &u in &pred[w] {
            if !can_reach[u] {
                can_reach[u] = true;
                stack.push(u);
            }
        }
    }
    (0..n)
        .map(|y| {
            y != z
                && reach_from(succ, y, Some(z))
                    .iter()
                    .enumerate()
                    .all(|(w, &r)| !r || w == z || can_reach[w])
        })
        .collect()
}

/// E_x^f[T] for every start state, T the first positive arrival time at
/// `z`. States from which `z` is missed with positive probability get `+∞`.
pub fn expected_hitting_time(m: &Mdp, f: &StationaryPolicy, z: usize) -> ValueFunction {
    let n = m.n_states();
    let succ = successors(m, f);
    let sure = sure_arrival(&succ, z);
    let finite: Vec<usize> = (0..n).filter(|&y| sure[y]).collect();
    let pos: Vec<Option<usize>> = {
        let mut pos = vec![None; n];
        for (k, &y) in finite.iter().enumerate() {
            pos[y] = Some(k);
        }
        pos
    };

    // (I - P_taboo) u = 1 on the sure-arrival states.
    let k = finite.len();
    let mut taboo_times = vec![f64::INFINITY; n];
    if k > 0 {
        let mut a = DMatrix::<f64>::identity(k, k);
        for (r, &x) in finite.iter().enumerate() {
            for (y, p) in f.choice(m, x).support() {
                if let Some(c) = pos[y] {
                    a[(r, c)] -= p;
                }
            }
        }
        let u = a
            .lu()
            .solve(&DVector::from_element(k, 1.0))
            .expect("taboo system is nonsingular on sure-arrival states");
        for (r, &x) in finite.iter().enumerate() {
            taboo_times[x] = u[r];
        }
    }

    let mut out = ValueFunction::zeros(n);
    for x in 0..n {
        if x != z && !sure[x] {
            out[x] = f64::INFINITY;
            continue;
        }
        if x != z {
            out[x] = taboo_times[x];
            continue;
        }
        let mut t = 1.0;
        for (y, p) in f.choice(m, z).support() {
            if y != z {
                t += p * taboo_times[y];
            }
        }
        out[z] = t;
    }
    out
}

/// Outcome of the simultaneous Doeblin check at a candidate state `z`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoeblinReport {
    pub z: usize,
    pub pass: bool,
    /// max over f ∈ F and x ∈ S of E_x^f[T], when finite.
    pub bound_m: Option<f64>,
    /// Policy attaining the maximum (or an infinite hitting time on failure).
    #[serde(skip)]
    pub worst_policy: Option<StationaryPolicy>,
    pub worst_state: Option<usize>,
    pub policies_checked: u64,
}

/// Checks `E_x^f[T] ≤ M < ∞` over every stationary policy and start state
/// by exhaustive enumeration of F (capped at `policy_cap` policies).
pub fn check_doeblin(m: &Mdp, z: usize, policy_cap: u64) -> Result<DoeblinReport> {
    let count = checked_policy_count(m, policy_cap)?;
    // (hitting time, policy index, state); larger time wins, then lower index.
    let worst = (0..count)
        .into_par_iter()
        .map(|i| {
            let f = policy_at(m, i);
            let times = expected_hitting_time(m, &f, z);
            let (x, t) = times
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (x, &t)| {
                    if t > best.1 {
                        (x, t)
                    } else {
                        best
                    }
                });
            (t, i, x)
        })
        .reduce(
            || (f64::NEG_INFINITY, u64::MAX, 0),
            |a, b| {
                if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
                    a
                } else {
                    b
                }
            },
        );
    let (t, i, x) = worst;
    let pass = t.is_finite();
    Ok(DoeblinReport {
        z,
        pass,
        bound_m: pass.then_some(t),
        worst_policy: Some(policy_at(m, i)),
        worst_state: Some(x),
        policies_checked: count,
    })
}

/// First state (in state order) at which the Doeblin check passes.
pub fn find_doeblin_state(m: &Mdp, policy_cap: u64) -> Result<Option<DoeblinReport>> {
    for z in 0..m.n_states() {
        let report = check_doeblin(m, z, policy_cap)?;
        if report.pass {
            return Ok(Some(report));
        }
    }
    Ok(None)
}

/// Transition matrix of `f` restricted to states other than `z`.
pub fn taboo_matrix(m: &Mdp, f: &StationaryPolicy, z: usize) -> NonnegativeMatrix {
    let keep: Vec<usize> = (0..m.n_states()).filter(|&y| y != z).collect();
    let mut entries = Vec::with_capacity(keep.len() * keep.len());
    for &x in &keep {
        let row = &f.choice(m, x).row;
        entries.extend(keep.iter().map(|&y| row[y]));
    }
    NonnegativeMatrix::from_entries(keep, &entries).expect("kernel rows are valid")
}

/// Exact survival curve `P_x^f[T ≥ k]` for `k = 0..=horizon`, per start state.
pub fn survival_curve(m: &Mdp, f: &StationaryPolicy, z: usize, horizon: usize) -> Vec<Vec<f64>> {
    let n = m.n_states();
    // mass[y]: P_x[X_1..X_{k-1} ≠ z, X_{k-1} = y] propagated forward
    (0..n)
        .map(|x| {
            let mut curve = Vec::with_capacity(horizon + 1);
            let mut mass = vec![0.0; n];
            for (y, p) in f.choice(m, x).support() {
                mass[y] += p;
            }
            for k in 0..=horizon {
                if k <= 1 {
                    curve.push(1.0);
                    continue;
                }
                // T ≥ k  ⟺  X_1, …, X_{k-1} ≠ z
                mass[z] = 0.0;
                curve.push(mass.iter().sum());
                let mut next = vec![0.0; n];
                for (y, &w) in mass.iter().enumerate() {
                    if w > 0.0 {
                        for (t, p) in f.choice(m, y).support() {
                            next[t] += w * p;
                        }
                    }
                }
                mass = next;
            }
            curve
        })
        .collect()
}

/// Per-policy geometric envelope `P_x^f[T ≥ n] ≤ β0 βⁿ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailBound {
    /// Spectral radius of the taboo matrix.
    pub beta: f64,
    pub beta0: f64,
    /// Largest n at which β0 was fitted.
    pub horizon: usize,
    #[serde(skip)]
    n_states: usize,
}

impl TailBound {
    /// The envelope at `n`. A nilpotent taboo matrix (β = 0) means arrival
    /// within |S| steps surely; the envelope is then 1 up to |S| and 0 after.
    pub fn envelope(&self, n: usize) -> f64 {
        if self.beta > 0.0 {
            self.beta0 * self.beta.powi(n as i32)
        } else if n <= self.n_states {
            1.0
        } else {
            0.0
        }
    }
}

/// Geometric tail envelope of the arrival time at `z` under `f`.
///
/// β is the Perron root of the taboo matrix. β0 is the largest ratio
/// `P_x[T ≥ n] / βⁿ` over start states and `n ≤ 16|S| + 256`. These are
/// constants for this one stationary policy, not uniform over policies.
pub fn tail_bound(m: &Mdp, f: &StationaryPolicy, z: usize) -> Result<TailBound> {
    let times = expected_hitting_time(m, f, z);
    if let Some(x) = times.iter().position(|t| !t.is_finite()) {
        return Err(Error::Precondition(format!(
            "state `{}` does not reach `{}` surely under {}",
            m.state_name(x),
            m.state_name(z),
            f.display(m)
        )));
    }
    let n = m.n_states();
    let taboo = taboo_matrix(m, f, z);
    let beta = spectral_radius(&taboo);
    let horizon = 16 * n + 256;
    if beta <= 0.0 {
        return Ok(TailBound {
            beta: 0.0,
            beta0: 1.0,
            horizon: n,
            n_states: n,
        });
    }
    // w_k = (P_taboo / β)^k 1 over states ≠ z, embedded with w(z) = 0
    let mut w: Vec<f64> = (0..n).map(|y| if y == z { 0.0 } else { 1.0 }).collect();
    let mut beta0 = 1.0f64.max(1.0 / beta);
    for k in 2..=horizon {
        for x in 0..n {
            let s: f64 = f.choice(m, x).support().map(|(y, p)| p * w[y]).sum();
            beta0 = beta0.max(s / (beta * beta));
        }
        if k == horizon {
            break;
        }
        let mut next = vec![0.0; n];
        for y in 0..n {
            if y != z {
                next[y] = f.choice(m, y).support().map(|(t, p)| p * w[t]).sum::<f64>() / beta;
            }
        }
        w = next;
    }
    Ok(TailBound {
        beta,
        beta0,
        horizon,
        n_states: n,
    })
}
