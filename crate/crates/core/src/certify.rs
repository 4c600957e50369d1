//! Certificates for the family G of upper bounds of J*.
//!
//! A function g belongs to G when
//!
//! 1. `g(x) = min_{a∈A(x)} max{g(y) | p_xy(a) > 0}` (the min–max equation), and
//! 2. some finite h satisfies
//!    `e^{λg(x) + λh(x)} ≥ min_{a∈B_g(x)} e^{λC(x,a)} Σ_y p_xy(a) e^{λh(y)}`,
//!    where `B_g(x)` keeps the actions whose transition support does not
//!    raise g.
//!
//! J* itself satisfies (1) but may fail (2). Every
//! `g_α = α J* + (1 − α) ‖C‖`, α ∈ (0, 1), is a member, with the deviation
//! function (an optimal damped excursion cost over B*-restricted policies)
//! as the witness, so the infimum of G is J*. This module checks both
//! conditions numerically, computes the deviation function, extracts the
//! policy a certificate implies, and runs the whole experiment over a grid
//! of α.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evaluation::long_run_average;
use crate::excursion::ExcursionProblem;
use crate::logspace::log_sum_exp;
use crate::model::{max_cost_norm, Mdp, RiskCoefficient, StationaryPolicy, ValueFunction};
use crate::optimal::{optimal_average, snap_levels, support_max_level, verify_minmax};
use crate::simulate::sample_trajectory_stream;
use crate::solver::{SolveReport, SolverSettings};

/// Default α grid of [`verify_theorem35`].
pub const DEFAULT_ALPHAS: [f64; 4] = [0.5, 0.9, 0.99, 0.999];

/// Smallest accepted slack of the witness inequality at a certified state.
pub const SLACK_TOL: f64 = 1e-9;

/// B_g(x): per state, the choice indices whose transition support keeps g
/// at its current level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ActionRestriction {
    sets: Vec<Vec<usize>>,
}

impl ActionRestriction {
    /// Choice indices allowed at `x`.
    pub fn choices(&self, x: usize) -> &[usize] {
        &self.sets[x]
    }

    /// Action indices allowed at `x`.
    pub fn actions(&self, m: &Mdp, x: usize) -> Vec<usize> {
        self.sets[x].iter().map(|&k| m.choices(x)[k].action).collect()
    }

    pub fn contains(&self, m: &Mdp, f: &StationaryPolicy) -> bool {
        (0..m.n_states()).all(|x| self.sets[x].contains(&f.choice_indices()[x]))
    }
}

/// B_g for a g satisfying the min–max equation; errors at the first state
/// where it does not.
pub fn action_restriction(m: &Mdp, g: &ValueFunction) -> Result<ActionRestriction> {
    let check = verify_minmax(m, g)?;
    if let Some(&x) = check.violations.first() {
        return Err(Error::MinMaxViolation {
            state: m.state_name(x).to_string(),
            value: g[x],
            minmax: g[x] - check.residuals[x],
        });
    }
    let levels = snap_levels(g.as_slice());
    let sets = (0..m.n_states())
        .map(|x| {
            m.choices(x)
                .iter()
                .enumerate()
                .filter(|(_, c)| support_max_level(&levels, &c.row) == levels[x])
                .map(|(k, _)| k)
                .collect()
        })
        .collect();
    Ok(ActionRestriction { sets })
}

/// The deviation function at one α, with its diagnostic checks.
#[derive(Clone, Debug, Serialize)]
pub struct DeviationFunction {
    pub alpha: f64,
    /// `(1/(λα)) log inf E[exp(λα Σ_{t<T} (C − J*))]`, cost units.
    pub h: ValueFunction,
    /// The same quantity in `(1/λ) log` form, i.e. `α h`.
    pub h_raw: ValueFunction,
    pub report: SolveReport,
    /// All entries finite.
    pub finite: bool,
    /// `h(z) ≤ 1e-9`.
    pub nonpositive_at_z: bool,
}

impl DeviationFunction {
    pub fn post_checks_pass(&self) -> bool {
        self.finite && self.nonpositive_at_z
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "alpha",
            range: "(0, 1)",
            value: alpha,
        })
    }
}

/// Fixed point of
/// `h(x) = min_{b∈B*(x)} (1/(λα)) log[e^{λα(C(x,b) − J*(x))}(p_xz(b) + Σ_{y≠z} p_xy(b) e^{λα h(y)})]`
/// from `h = 0`.
pub fn deviation_function(
    m: &Mdp,
    lambda: RiskCoefficient,
    alpha: f64,
    jstar: &ValueFunction,
    z: usize,
    settings: &SolverSettings,
) -> Result<DeviationFunction> {
    check_alpha(alpha)?;
    if z >= m.n_states() {
        return Err(Error::Precondition(format!("state index {z} out of range")));
    }
    let restriction = action_restriction(m, jstar)?;
    let n = m.n_states();
    let problem = ExcursionProblem {
        m,
        z,
        theta: lambda.get() * alpha,
        allowed: restriction.sets.clone(),
        stage: (0..n)
            .map(|x| {
                restriction.sets[x]
                    .iter()
                    .map(|&k| m.choices(x)[k].cost - jstar[x])
                    .collect()
            })
            .collect(),
    };
    let sol = problem.solve(settings)?;
    let h = sol.values;
    let finite = h.is_finite();
    let nonpositive_at_z = h[z] <= 1e-9;
    Ok(DeviationFunction {
        alpha,
        h_raw: h.map(|v| alpha * v),
        h,
        report: sol.report,
        finite,
        nonpositive_at_z,
    })
}

/// g_α = α J* + (1 − α) ‖C‖.
pub fn construct_g_alpha(jstar: &ValueFunction, cnorm: f64, alpha: f64) -> Result<ValueFunction> {
    check_alpha(alpha)?;
    Ok(jstar.map(|j| alpha * j + (1.0 - alpha) * cnorm))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum CertificateStatus {
    /// (g, h) satisfies both membership conditions: g ∈ G.
    Certified,
    /// No witness found within budget. Not a disproof.
    Inconclusive,
    /// The min–max equation fails, so g ∉ G.
    MinMaxViolated { state: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub g: ValueFunction,
    /// Witness h (normalized to h(z) = 0); meaningful when certified.
    pub h: ValueFunction,
    pub restriction: Option<ActionRestriction>,
    /// `h(x) − (T h)(x)`: slack of the witness inequality in cost units.
    #[serde(with = "crate::model::extended_floats")]
    pub residuals: Vec<f64>,
    pub status: CertificateStatus,
    pub report: SolveReport,
}

impl Certificate {
    pub fn is_certified(&self) -> bool {
        self.status == CertificateStatus::Certified
    }
}

/// `(T u)(x) = min_{a∈B(x)} [C(x,a) − g(x) + (1/λ) log Σ_y p_xy(a) e^{λ u(y)}]`,
/// with the minimizing choice index.
fn witness_operator(
    m: &Mdp,
    l: f64,
    g: &ValueFunction,
    restriction: &ActionRestriction,
    u: &[f64],
) -> (Vec<f64>, Vec<usize>) {
    let n = m.n_states();
    let mut out = vec![f64::INFINITY; n];
    let mut arg = vec![0; n];
    for x in 0..n {
        for &k in restriction.choices(x) {
            let c = &m.choices(x)[k];
            let v = c.cost - g[x] + log_sum_exp(c.support().map(|(y, p)| p.ln() + l * u[y])) / l;
            if v < out[x] {
                out[x] = v;
                arg[x] = k;
            }
        }
    }
    (out, arg)
}

/// Semi-decision procedure for g ∈ G.
///
/// After checking the min–max equation, iterates the averaged map
/// `u ← (u + T u)/2` from u = 0 and stops at the first iterate with
/// `T u ≤ u + 1e-9`: that iterate is a witness of the inequality. Averaging
/// keeps the fixed points and the supersolution test of T while damping
/// periodic oscillation. Iterates are shifted by a constant each round
/// (T commutes with constant shifts), so drifting toward −∞ does not
/// overflow. Running out of budget, or a span above the divergence cap,
/// yields `Inconclusive`.
pub fn check_membership(
    m: &Mdp,
    lambda: RiskCoefficient,
    g: &ValueFunction,
    z: usize,
    settings: &SolverSettings,
) -> Result<Certificate> {
    g.check_len(m)?;
    if z >= m.n_states() {
        return Err(Error::Precondition(format!("state index {z} out of range")));
    }
    let n = m.n_states();
    let mut report = SolveReport {
        iterations: 0,
        residual: f64::INFINITY,
        converged: false,
        diverged: false,
    };
    let minmax = verify_minmax(m, g)?;
    if let Some(&x) = minmax.violations.first() {
        return Ok(Certificate {
            g: g.clone(),
            h: ValueFunction::zeros(n),
            restriction: None,
            residuals: vec![f64::NAN; n],
            status: CertificateStatus::MinMaxViolated { state: x },
            report,
        });
    }
    let restriction = action_restriction(m, g)?;
    let l = lambda.get();
    let mut u = vec![0.0f64; n];
    let mut status = CertificateStatus::Inconclusive;
    let mut slack = vec![f64::NAN; n];
    for it in 0..=settings.max_iter {
        let (tu, _) = witness_operator(m, l, g, &restriction, &u);
        let mut worst = f64::INFINITY;
        let mut change = 0.0f64;
        for x in 0..n {
            slack[x] = u[x] - tu[x];
            worst = worst.min(slack[x]);
            change = change.max((tu[x] - u[x]).abs());
        }
        report.iterations = it;
        report.residual = change;
        if worst >= -SLACK_TOL {
            status = CertificateStatus::Certified;
            report.converged = change < settings.tol;
            break;
        }
        if it == settings.max_iter {
            break;
        }
        let mut next: Vec<f64> = u.iter().zip(&tu).map(|(a, b)| 0.5 * (a + b)).collect();
        let top = next.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let bottom = next.iter().copied().fold(f64::INFINITY, f64::min);
        if !(top - bottom).is_finite() || top - bottom > settings.divergence_cap {
            report.diverged = true;
            break;
        }
        for v in next.iter_mut() {
            *v -= top;
        }
        u = next;
    }
    let shift = u[z];
    Ok(Certificate {
        g: g.clone(),
        h: ValueFunction::new(u.iter().map(|v| v - shift).collect()),
        restriction: Some(restriction),
        residuals: slack,
        status,
        report,
    })
}

/// The stationary policy a certificate yields, with its long-run value.
#[derive(Clone, Debug, Serialize)]
pub struct ExtractedPolicy {
    #[serde(skip)]
    pub policy: StationaryPolicy,
    /// J(λ, f, ·).
    pub bound_check: ValueFunction,
    /// `max_x (J(λ, f, x) − g(x))`.
    pub max_excess: f64,
    /// `bound_check ≤ g + 1e-8` at every state.
    pub holds: bool,
}

/// Picks, at each state, the action of B_g(x) minimizing the bracket
/// `e^{λC(x,a)} Σ_y p_xy(a) e^{λh(y)}` at the witness h (lowest index on
/// ties), and evaluates the resulting stationary policy.
pub fn extract_policy(
    m: &Mdp,
    lambda: RiskCoefficient,
    cert: &Certificate,
) -> Result<ExtractedPolicy> {
    let restriction = match (&cert.status, &cert.restriction) {
        (CertificateStatus::Certified, Some(r)) => r,
        _ => {
            return Err(Error::Precondition(
                "policy extraction needs a certified certificate".into(),
            ))
        }
    };
    let (_, arg) = witness_operator(m, lambda.get(), &cert.g, restriction, cert.h.as_slice());
    let policy = StationaryPolicy::from_choice_indices(m, arg)?;
    let bound_check = long_run_average(m, &policy, lambda);
    let max_excess = (0..m.n_states())
        .map(|x| bound_check[x] - cert.g[x])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ExtractedPolicy {
        policy,
        bound_check,
        max_excess,
        holds: max_excess <= 1e-8,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LevelIncrease {
    pub path: usize,
    pub t: usize,
    pub from: usize,
    pub to: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotoneCheck {
    pub paths: usize,
    pub violations: usize,
    pub first_violation: Option<LevelIncrease>,
    /// Whether `f(x) ∈ B_g(x)` at every state.
    pub policy_within_restriction: bool,
}

impl MonotoneCheck {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Samples `paths` trajectories of length `horizon` from `x` under `f` and
/// counts those on which `g(X_{t+1}) > g(X_t) + 1e-12` for some t.
#[allow(clippy::too_many_arguments)]
pub fn monotone_trajectory_check(
    m: &Mdp,
    g: &ValueFunction,
    restriction: &ActionRestriction,
    f: &StationaryPolicy,
    x: usize,
    horizon: usize,
    paths: usize,
    seed: u64,
) -> Result<MonotoneCheck> {
    g.check_len(m)?;
    let mut violations = 0;
    let mut first_violation = None;
    for p in 0..paths {
        let path = sample_trajectory_stream(m, f, x, horizon, seed, p as u64)?;
        let states: Vec<usize> = path.states().collect();
        if let Some(t) = states.windows(2).position(|w| g[w[1]] > g[w[0]] + 1e-12) {
            violations += 1;
            first_violation.get_or_insert(LevelIncrease {
                path: p,
                t,
                from: states[t],
                to: states[t + 1],
            });
        }
    }
    Ok(MonotoneCheck {
        paths,
        violations,
        first_violation,
        policy_within_restriction: restriction.contains(m, f),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AlphaResult {
    pub alpha: f64,
    pub g_alpha: ValueFunction,
    pub certificate: Certificate,
    /// `max_x (g_α(x) − J*(x))`.
    pub gap: f64,
    /// `max_x |g_α(x) − J*(x) − (1 − α)(‖C‖ − J*(x))|`.
    pub identity_error: f64,
    pub extracted: ExtractedPolicy,
}

#[derive(Clone, Debug, Serialize)]
pub struct Theorem35Report {
    pub z: usize,
    pub cnorm: f64,
    pub jstar: ValueFunction,
    pub alphas: Vec<f64>,
    pub results: Vec<AlphaResult>,
    /// Gaps are nonincreasing in α and the largest-α gap is the smallest.
    pub monotone: bool,
}

impl Theorem35Report {
    /// Every g_α certified, pointwise identity within 1e-12, gap equal to
    /// `(1 − α) max_x (‖C‖ − J*(x))` within 1e-9, extracted policies
    /// bounded by g_α, gaps monotone.
    pub fn all_pass(&self) -> bool {
        let spread = self.cnorm - self.jstar.min();
        self.monotone
            && self.results.iter().all(|r| {
                r.certificate.is_certified()
                    && r.identity_error <= 1e-12
                    && (r.gap - (1.0 - r.alpha) * spread).abs() <= 1e-9
                    && r.extracted.holds
            })
    }
}

/// Builds g_α for every α, certifies each, and records the gaps to J*.
/// Any g_α that does not certify is an error.
pub fn verify_theorem35(
    m: &Mdp,
    lambda: RiskCoefficient,
    z: usize,
    alphas: &[f64],
    settings: &SolverSettings,
) -> Result<Theorem35Report> {
    for &a in alphas {
        check_alpha(a)?;
    }
    let jstar = optimal_average(m, lambda, settings)?.jstar;
    verify_theorem35_with(m, lambda, z, alphas, &jstar, settings)
}

/// As [`verify_theorem35`], with J* supplied by the caller.
pub fn verify_theorem35_with(
    m: &Mdp,
    lambda: RiskCoefficient,
    z: usize,
    alphas: &[f64],
    jstar: &ValueFunction,
    settings: &SolverSettings,
) -> Result<Theorem35Report> {
    let cnorm = max_cost_norm(m);
    let mut results = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let g_alpha = construct_g_alpha(jstar, cnorm, alpha)?;
        let certificate = check_membership(m, lambda, &g_alpha, z, settings)?;
        if !certificate.is_certified() {
            return Err(Error::CertificationFailed { alpha });
        }
        let gap = (0..m.n_states())
            .map(|x| g_alpha[x] - jstar[x])
            .fold(f64::NEG_INFINITY, f64::max);
        let identity_error = (0..m.n_states())
            .map(|x| ((g_alpha[x] - jstar[x]) - (1.0 - alpha) * (cnorm - jstar[x])).abs())
            .fold(0.0, f64::max);
        let extracted = extract_policy(m, lambda, &certificate)?;
        results.push(AlphaResult {
            alpha,
            g_alpha,
            certificate,
            gap,
            identity_error,
            extracted,
        });
    }
    let mut by_alpha: Vec<(f64, f64)> = results.iter().map(|r| (r.alpha, r.gap)).collect();
    by_alpha.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = by_alpha.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12);
    Ok(Theorem35Report {
        z,
        cnorm,
        jstar: jstar.clone(),
        alphas: alphas.to_vec(),
        results,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::example22::example22;
    use crate::model::load_model;

    fn lam(v: f64) -> RiskCoefficient {
        RiskCoefficient::new(v).unwrap()
    }

    fn jstar_above() -> ValueFunction {
        let j1 = 1.0 + 0.5f64.ln();
        ValueFunction::new(vec![0.0, j1, 2.0 * j1])
    }

    #[test]
    fn restriction_of_jstar() {
        let m = example22(0.5).unwrap();
        let b = action_restriction(&m, &jstar_above()).unwrap();
        for x in 0..3 {
            assert_eq!(b.actions(&m, x), vec![0]);
        }
        let flat = action_restriction(&m, &ValueFunction::constant(3, 1.0)).unwrap();
        assert_eq!(flat.actions(&m, 1), vec![0, 1]);
        assert!(matches!(
            action_restriction(&m, &ValueFunction::new(vec![0.0, 1.0, 0.0])),
            Err(Error::MinMaxViolation { state, .. }) if state == "1"
        ));
    }

    #[test]
    fn g_alpha_arithmetic() {
        let g = construct_g_alpha(&jstar_above(), 2.0, 0.5).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-15);
        assert!((g[1] - 1.153_426_4).abs() < 1e-7);
        assert!((g[2] - 1.306_852_8).abs() < 1e-7);
        let near_one = construct_g_alpha(&jstar_above(), 2.0, 1.0 - 1e-12).unwrap();
        for x in 0..3 {
            assert!((near_one[x] - jstar_above()[x]).abs() < 1e-11);
        }
        let flat = construct_g_alpha(&ValueFunction::constant(2, 0.3), 2.0, 0.25).unwrap();
        assert_eq!(flat.as_slice(), &[0.25 * 0.3 + 0.75 * 2.0; 2]);
        assert!(construct_g_alpha(&jstar_above(), 2.0, 1.0).is_err());
        assert!(construct_g_alpha(&jstar_above(), 2.0, 0.0).is_err());
    }

    #[test]
    fn norm_function_is_certified_with_zero_witness() {
        let m = example22(0.5).unwrap();
        let g = ValueFunction::constant(3, max_cost_norm(&m));
        let cert = check_membership(&m, lam(1.0), &g, 0, &SolverSettings::default()).unwrap();
        assert!(cert.is_certified());
        assert_eq!(cert.report.iterations, 0);
        assert!(cert.h.iter().all(|&v| v == 0.0));
        let ex = extract_policy(&m, lam(1.0), &cert).unwrap();
        assert!(ex.holds);
    }

    #[test]
    fn g_half_certifies_and_jstar_does_not() {
        let m = example22(0.5).unwrap();
        let s = SolverSettings::default();
        let g = construct_g_alpha(&jstar_above(), 2.0, 0.5).unwrap();
        let cert = check_membership(&m, lam(1.0), &g, 0, &s).unwrap();
        assert!(cert.is_certified());
        assert!(cert.residuals.iter().all(|&r| r >= -SLACK_TOL));
        assert!(cert.h.is_finite());
        let ex = extract_policy(&m, lam(1.0), &cert).unwrap();
        assert_eq!(ex.policy.action(&m, 1), 0);
        assert!(ex.holds);
        for x in 0..3 {
            assert!((ex.bound_check[x] - jstar_above()[x]).abs() < 1e-12);
        }

        let s_small = SolverSettings {
            max_iter: 20_000,
            ..s
        };
        let probe = check_membership(&m, lam(1.0), &jstar_above(), 0, &s_small).unwrap();
        assert_eq!(probe.status, CertificateStatus::Inconclusive);
        assert!(extract_policy(&m, lam(1.0), &probe).is_err());
    }

    #[test]
    fn min_max_violation_is_reported() {
        let m = example22(0.5).unwrap();
        let g = ValueFunction::new(vec![0.0, 1.0, 0.0]);
        let cert = check_membership(&m, lam(1.0), &g, 0, &SolverSettings::default()).unwrap();
        assert_eq!(cert.status, CertificateStatus::MinMaxViolated { state: 1 });
    }

    #[test]
    fn periodic_chain_certifies() {
        // deterministic two-cycle with costs 0 and 2
        let m = load_model(
            r#"{"states":["a","b"],"actions":["go"],"admissible":{"a":["go"],"b":["go"]},
            "cost":{"a":{"go":0},"b":{"go":2}},
            "transitions":{"a":{"go":{"b":1}},"b":{"go":{"a":1}}}}"#,
        )
        .unwrap();
        let s = SolverSettings::default();
        let jstar = optimal_average(&m, lam(1.0), &s).unwrap().jstar;
        assert!((jstar[0] - 1.0).abs() < 1e-12);
        let g = construct_g_alpha(&jstar, 2.0, 0.9).unwrap();
        assert!(check_membership(&m, lam(1.0), &g, 0, &s).unwrap().is_certified());
    }

    #[test]
    fn deviation_function_example() {
        let m = example22(0.5).unwrap();
        let s = SolverSettings::default();
        let d = deviation_function(&m, lam(1.0), 0.5, &jstar_above(), 0, &s).unwrap();
        assert!(d.post_checks_pass());
        assert!(d.h[0].abs() < 1e-12);
        assert!((d.h[1] - 1.762_747_2).abs() < 1e-6);
        assert!((d.h[2] - 2.0 * 3f64.ln()).abs() < 1e-6);
        assert!((d.h_raw[2] - 3f64.ln()).abs() < 1e-6);
    }

    #[test]
    fn deviation_function_near_one() {
        let m = example22(0.5).unwrap();
        let d = deviation_function(&m, lam(1.0), 0.999, &jstar_above(), 0, &SolverSettings::default())
            .unwrap();
        assert!(d.report.converged);
        assert!(d.post_checks_pass());
        // (1/α) log[ρ^{-2α}(1 − ρ²)/(1 − ρ^{2(1−α)})]
        let (a, r) = (0.999f64, 0.5f64);
        let e2 = r.powf(-2.0 * a) * (1.0 - r * r) / (1.0 - r.powf(2.0 * (1.0 - a)));
        assert!((d.h[2] - e2.ln() / a).abs() < 1e-6);
    }

    #[test]
    fn deviation_function_constant_cost() {
        let m = load_model(
            r#"{"states":["a","b"],"actions":["x","y"],"admissible":{"a":["x","y"],"b":["x"]},
            "cost":{"a":{"x":1.5,"y":1.5},"b":{"x":1.5}},
            "transitions":{"a":{"x":{"a":0.5,"b":0.5},"y":{"b":1}},"b":{"x":{"a":0.3,"b":0.7}}}}"#,
        )
        .unwrap();
        let jstar = ValueFunction::constant(2, 1.5);
        let d = deviation_function(&m, lam(2.0), 0.7, &jstar, 0, &SolverSettings::default()).unwrap();
        assert!(d.h.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn monotone_paths() {
        let m = example22(0.5).unwrap();
        let j = jstar_above();
        let b = action_restriction(&m, &j).unwrap();
        let good = StationaryPolicy::from_names(&m, &[("1", "0")]).unwrap();
        for x in 0..3 {
            let c = monotone_trajectory_check(&m, &j, &b, &good, x, 30, 200, 5).unwrap();
            assert!(c.passed() && c.policy_within_restriction);
        }
        let flat = ValueFunction::constant(3, 0.0);
        let bf = action_restriction(&m, &flat).unwrap();
        let bad = StationaryPolicy::from_names(&m, &[("1", "1")]).unwrap();
        assert!(monotone_trajectory_check(&m, &flat, &bf, &bad, 1, 10, 50, 1).unwrap().passed());
        let c = monotone_trajectory_check(&m, &j, &b, &bad, 1, 10, 50, 1).unwrap();
        assert!(!c.passed());
        assert!(!c.policy_within_restriction);
        let v = c.first_violation.unwrap();
        assert_eq!((v.from, v.to, v.t), (1, 2, 0));
    }

    #[test]
    fn theorem35_example() {
        let m = example22(0.5).unwrap();
        let s = SolverSettings::default();
        let rep = verify_theorem35(&m, lam(1.0), 0, &[0.5, 0.9, 0.99], &s).unwrap();
        assert!(rep.all_pass());
        let gaps: Vec<f64> = rep.results.iter().map(|r| r.gap).collect();
        for (g, e) in gaps.iter().zip([1.0, 0.2, 0.02]) {
            assert!((g - e).abs() < 1e-9);
        }
        let rep = verify_theorem35(&m, lam(0.5), 0, &[0.5, 0.9, 0.99], &s).unwrap();
        assert!(rep.all_pass());
    }

    #[test]
    fn theorem35_constant_cost() {
        let m = load_model(
            r#"{"states":["a","b"],"actions":["x"],"admissible":{"a":["x"],"b":["x"]},
            "cost":{"a":{"x":0.75},"b":{"x":0.75}},
            "transitions":{"a":{"x":{"b":1}},"b":{"x":{"a":0.5,"b":0.5}}}}"#,
        )
        .unwrap();
        let rep = verify_theorem35(&m, lam(1.0), 0, &DEFAULT_ALPHAS, &SolverSettings::default()).unwrap();
        assert!(rep.all_pass());
        for r in &rep.results {
            assert!(r.gap.abs() < 1e-12);
            assert!(r.certificate.h.iter().all(|v| v.abs() < 1e-12));
        }
    }
}
