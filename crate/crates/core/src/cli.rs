//! Command-line front end. The `rsmdp` binary is a thin wrapper around
//! [`run`].
//!
//! Every command prints one report (JSON by default, or `section,state,value`
//! CSV rows) and exits with
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | bad arguments or I/O failure |
//! | 2 | invalid model |
//! | 3 | the Doeblin condition fails |
//! | 4 | a certification result contradicts the characterisation of J* |
//! | 5 | an enumeration or iteration budget was exceeded |

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::certify::{
    check_membership, deviation_function, verify_theorem35_with, CertificateStatus,
    DEFAULT_ALPHAS,
};
use crate::chain::{check_doeblin, expected_hitting_time, find_doeblin_state, tail_bound, DoeblinReport};
use crate::error::Error;
use crate::evaluation::{finite_horizon_cost, long_run_average, MarkovPolicy};
use crate::example22::{closed_form, example22, Regime};
use crate::model::{extended_floats, max_cost_norm, Mdp, RiskCoefficient, StationaryPolicy, ValueFunction};
use crate::optimal::{
    level_sets, optimal_average, solve_optimality_equation, verify_minmax, OptimalityOutcome,
};
use crate::simulate::{mc_certain_equivalent, sample_trajectory};
use crate::solver::SolverSettings;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_INVALID_MODEL: u8 = 2;
pub const EXIT_DOEBLIN: u8 = 3;
pub const EXIT_CONTRADICTION: u8 = 4;
pub const EXIT_BUDGET: u8 = 5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "rsmdp", version, about = "Risk-sensitive average-cost analysis of finite MDPs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Model file (JSON).
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    /// Risk coefficient λ > 0.
    #[arg(long, global = true, default_value_t = 1.0, allow_hyphen_values = true)]
    pub lambda: f64,
    /// Damping factor α ∈ (0, 1); repeatable.
    #[arg(long = "alpha", global = true, allow_hyphen_values = true)]
    pub alphas: Vec<f64>,
    /// Distinguished state; searched for when absent.
    #[arg(long, global = true)]
    pub z: Option<String>,
    /// Convergence tolerance of the iterative solvers [default: 1e-9]
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    /// Iteration budget of the iterative solvers [default: 100000]
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Seed for sampling commands
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Report format; JSON is canonical, CSV has (section, state, value) rows
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub output: OutputFormat,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and validate a model.
    Validate,
    /// Compute J*, optimal policies, level sets and diagnostics.
    Solve,
    /// Certify g_α = αJ* + (1−α)‖C‖ for each α and probe J* itself.
    Certify,
    /// Write the three-state fixture and its closed-form values.
    Example22 {
        #[arg(long)]
        rho: f64,
    },
    /// Check the simultaneous Doeblin condition.
    Doeblin,
    /// Evaluate one stationary policy.
    Evaluate {
        /// `state=action` pairs, comma separated; unlisted states take
        /// their first admissible action.
        #[arg(long, default_value = "")]
        policy: String,
        /// Also report the n-step certain equivalent.
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Monte Carlo estimate of the n-step certain equivalent.
    Simulate {
        /// `state=action` pairs, as for `evaluate`
        #[arg(long, default_value = "")]
        policy: String,
        /// Start state
        #[arg(long)]
        state: String,
        #[arg(long, default_value_t = 10)]
        horizon: usize,
        /// Number of sampled trajectories
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
}

/// Validated settings shared by all commands.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub model: Option<PathBuf>,
    pub lambda: f64,
    pub alphas: Vec<f64>,
    pub z: Option<String>,
    pub settings: SolverSettings,
    pub seed: u64,
    pub output: OutputFormat,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_args(a: &CommonArgs) -> Result<Self, Failure> {
        let lambda = RiskCoefficient::new(a.lambda).map_err(Failure::from)?.get();
        let alphas = if a.alphas.is_empty() {
            DEFAULT_ALPHAS.to_vec()
        } else {
            a.alphas.clone()
        };
        if let Some(&bad) = alphas.iter().find(|&&v| !(v > 0.0 && v < 1.0)) {
            return Err(Failure::usage(format!("alpha must lie in (0, 1), got {bad}")));
        }
        let mut settings = SolverSettings::default();
        if let Some(tol) = a.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Failure::usage(format!("tol must be positive, got {tol}")));
            }
            settings.tol = tol;
        }
        if let Some(n) = a.max_iter {
            settings.max_iter = n;
        }
        Ok(Self {
            model: a.model.clone(),
            lambda,
            alphas,
            z: a.z.clone(),
            settings,
            seed: a.seed,
            output: a.output,
            out: a.out.clone(),
        })
    }

    fn risk(&self) -> RiskCoefficient {
        RiskCoefficient::new(self.lambda).expect("validated")
    }
}

/// A command outcome that is not success: exit code, message, and an
/// optional partial report (e.g. the Doeblin witness).
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
    pub report: Option<Value>,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
            report: None,
        }
    }

    fn with_report(code: u8, message: impl Into<String>, report: Value) -> Self {
        Self {
            code,
            message: message.into(),
            report: Some(report),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Model(_) => EXIT_INVALID_MODEL,
            Error::EnumerationCap { .. } | Error::HorizonTooLong(_) => EXIT_BUDGET,
            Error::MinMaxViolation { .. } | Error::CertificationFailed { .. } => EXIT_CONTRADICTION,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
            report: None,
        }
    }
}

type CmdResult = Result<Value, Failure>;

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

/// Value function as a `{state: value}` object.
fn named(m: &Mdp, v: &ValueFunction) -> Value {
    let mut map = Map::new();
    for x in 0..m.n_states() {
        map.insert(m.state_name(x).to_string(), float(v[x]));
    }
    Value::Object(map)
}

fn float(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(extended_floats::format(v))
    }
}

fn load(config: &RunConfig) -> Result<(Mdp, PathBuf), Failure> {
    let path = config
        .model
        .clone()
        .ok_or_else(|| Failure::usage("--model is required"))?;
    let text = std::fs::read_to_string(&path).map_err(|e| Failure {
        code: EXIT_INVALID_MODEL,
        message: format!("cannot read {}: {e}", path.display()),
        report: None,
    })?;
    let m = Mdp::from_json(&text).map_err(|e| Failure::from(Error::from(e)))?;
    Ok((m, path))
}

/// Recognises the built-in fixture and returns its ρ.
fn fixture_rho(m: &Mdp) -> Option<f64> {
    if m.n_states() != 3 || m.state_names() != ["0", "1", "2"] {
        return None;
    }
    let rho = m.choices(1).first()?.row[1];
    let reference = example22(rho).ok()?;
    (reference.to_json() == m.to_json()).then_some(rho)
}

fn provenance(config: &RunConfig, m: &Mdp, path: &Path) -> Value {
    let mut v = json!({
        "model": path.display().to_string(),
        "states": m.n_states(),
        "lambda": config.lambda,
        "settings": to_value(&config.settings),
        "seed": config.seed,
    });
    if let Some(rho) = fixture_rho(m) {
        v["fixture"] = json!({
            "rho": rho,
            "regime": Regime::classify(rho, config.lambda).label(),
        });
    }
    v
}

fn doeblin_value(m: &Mdp, r: &DoeblinReport) -> Value {
    let mut v = to_value(r);
    v["z"] = json!(m.state_name(r.z));
    if let Some(f) = &r.worst_policy {
        v["worst_policy"] = to_value(&f.to_named(m));
    }
    if let Some(x) = r.worst_state {
        v["worst_state"] = json!(m.state_name(x));
    }
    v
}

/// Resolves `--z`, or searches for a Doeblin state; fails with exit 3 and
/// the witness when the condition does not hold.
fn doeblin_state(config: &RunConfig, m: &Mdp) -> Result<(usize, Value), Failure> {
    let cap = config.settings.policy_cap;
    let report = match &config.z {
        Some(name) => check_doeblin(m, m.resolve_state(name)?, cap)?,
        None => match find_doeblin_state(m, cap)? {
            Some(r) => r,
            None => check_doeblin(m, 0, cap)?,
        },
    };
    let value = doeblin_value(m, &report);
    if !report.pass {
        let witness = report.worst_policy.as_ref().map(|f| f.display(m).to_string());
        let message = match (&config.z, witness, report.worst_state) {
            (Some(z), Some(f), Some(x)) => format!(
                "Doeblin condition fails at z = {z}: from state {} under {f} the hitting time is infinite",
                m.state_name(x)
            ),
            _ => "no state satisfies the Doeblin condition".to_string(),
        };
        return Err(Failure::with_report(EXIT_DOEBLIN, message, json!({ "doeblin": value })));
    }
    Ok((report.z, value))
}

fn parse_policy(m: &Mdp, spec: &str) -> Result<StationaryPolicy, Failure> {
    let mut pairs = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (s, a) = item
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("policy entry `{item}` is not state=action")))?;
        pairs.push((s.trim(), a.trim()));
    }
    Ok(StationaryPolicy::from_names(m, &pairs)?)
}

pub fn cmd_validate(config: &RunConfig) -> CmdResult {
    let path = config
        .model
        .clone()
        .ok_or_else(|| Failure::usage("--model is required"))?;
    match load(config) {
        Ok((m, _)) => Ok(json!({
            "valid": true,
            "model": path.display().to_string(),
            "states": m.state_names(),
            "actions": m.action_names(),
            "stationary_policies": m.policy_count().to_string(),
            "cost_norm": max_cost_norm(&m),
        })),
        Err(f) => {
            let report = json!({
                "valid": false,
                "model": path.display().to_string(),
                "error": f.message,
            });
            Err(Failure::with_report(f.code, f.message.clone(), report))
        }
    }
}

pub fn cmd_solve(config: &RunConfig) -> CmdResult {
    let (m, path) = load(config)?;
    let (z, doeblin) = doeblin_state(config, &m)?;
    let lambda = config.risk();
    let sol = optimal_average(&m, lambda, &config.settings)?;
    let levels = level_sets(&sol.jstar);
    let minmax = verify_minmax(&m, &sol.jstar)?;
    let equation = solve_optimality_equation(&m, lambda, z, &config.settings)?;
    let policies: Map<String, Value> = sol
        .per_state_policy
        .iter()
        .enumerate()
        .map(|(x, f)| (m.state_name(x).to_string(), to_value(&f.to_named(&m))))
        .collect();
    let jz_is_min = (sol.jstar[z] - sol.jstar.min()).abs() <= 1e-9;
    let mut report = json!({
        "command": "solve",
        "provenance": provenance(config, &m, &path),
        "doeblin": doeblin,
        "jstar": named(&m, &sol.jstar),
        "optimal_policy": policies,
        "level_sets": {
            "gammas": levels.gammas,
            "sets": levels.sets.iter()
                .map(|s| s.iter().map(|&x| m.state_name(x)).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "xi1": levels.xi1,
        },
        "lower_bound": {
            "horizon": sol.lower_bound_horizon,
            "values": named(&m, &sol.lower_bound),
            "gap": sol.gap,
        },
        "minmax": {
            "holds": minmax.holds,
            "violations": minmax.violations.iter().map(|&x| m.state_name(x)).collect::<Vec<_>>(),
        },
        "jstar_min_at_z": jz_is_min,
        "optimality_equation": optimality_value(&m, &equation),
        "policies_enumerated": sol.policies_enumerated,
    });
    if !minmax.holds || !jz_is_min {
        report["error"] = json!("computed J* violates a structural property");
        return Err(Failure::with_report(
            EXIT_CONTRADICTION,
            "computed J* violates the min-max equation or is not minimal at z",
            report,
        ));
    }
    Ok(report)
}

fn optimality_value(m: &Mdp, o: &OptimalityOutcome) -> Value {
    match o {
        OptimalityOutcome::Solved {
            gamma,
            h,
            residual,
            report,
        } => json!({
            "status": "solved",
            "gamma": gamma,
            "h": named(m, h),
            "residual": residual,
            "report": to_value(report),
        }),
        OptimalityOutcome::NotFound {
            reason,
            last_gamma,
            report,
        } => json!({
            "status": "not_found",
            "reason": to_value(reason),
            "last_gamma": float(*last_gamma),
            "report": to_value(report),
        }),
    }
}

pub fn cmd_certify(config: &RunConfig) -> CmdResult {
    let (m, path) = load(config)?;
    let (z, doeblin) = doeblin_state(config, &m)?;
    let lambda = config.risk();
    let s = &config.settings;
    let jstar = optimal_average(&m, lambda, s)?.jstar;
    let mut base = json!({
        "command": "certify",
        "provenance": provenance(config, &m, &path),
        "doeblin": doeblin,
        "jstar": named(&m, &jstar),
    });

    let family = match verify_theorem35_with(&m, lambda, z, &config.alphas, &jstar, s) {
        Ok(t) => t,
        Err(Error::CertificationFailed { alpha }) => {
            let g = crate::certify::construct_g_alpha(&jstar, max_cost_norm(&m), alpha)?;
            let cert = check_membership(&m, lambda, &g, z, s)?;
            let budget = cert.report.iterations >= s.max_iter;
            base["error"] = json!(format!("g_alpha not certified at alpha = {alpha}"));
            base["failed_certificate"] = to_value(&cert);
            let code = if budget { EXIT_BUDGET } else { EXIT_CONTRADICTION };
            return Err(Failure::with_report(
                code,
                format!("g_alpha was not certified at alpha = {alpha}"),
                base,
            ));
        }
        Err(e) => return Err(e.into()),
    };

    let mut post_ok = true;
    let mut per_alpha = Vec::new();
    for r in &family.results {
        let dev = deviation_function(&m, lambda, r.alpha, &jstar, z, s)?;
        post_ok &= dev.post_checks_pass();
        per_alpha.push(json!({
            "alpha": r.alpha,
            "g_alpha": named(&m, &r.g_alpha),
            "status": to_value(&r.certificate.status),
            "witness_h": named(&m, &r.certificate.h),
            "residuals": named(&m, &ValueFunction::new(r.certificate.residuals.clone())),
            "iterations": r.certificate.report.iterations,
            "gap": r.gap,
            "identity_error": r.identity_error,
            "extracted_policy": to_value(&r.extracted.policy.to_named(&m)),
            "extracted_value": named(&m, &r.extracted.bound_check),
            "extracted_bound_holds": r.extracted.holds,
            "deviation_function": {
                "h": named(&m, &dev.h),
                "h_raw": named(&m, &dev.h_raw),
                "finite": dev.finite,
                "nonpositive_at_z": dev.nonpositive_at_z,
                "report": to_value(&dev.report),
            },
        }));
    }

    // J* itself is generally not a member; a bounded search is expected to
    // come back inconclusive.
    let probe_settings = SolverSettings {
        max_iter: s.max_iter.min(20_000),
        ..*s
    };
    let probe = check_membership(&m, lambda, &jstar, z, &probe_settings)?;
    let probe_status = match probe.status {
        CertificateStatus::Certified => "certified",
        CertificateStatus::Inconclusive => "inconclusive",
        CertificateStatus::MinMaxViolated { .. } => "minmax_violated",
    };

    base["z"] = json!(m.state_name(z));
    base["cost_norm"] = json!(family.cnorm);
    base["alphas"] = per_alpha.into();
    base["gaps_monotone"] = json!(family.monotone);
    base["all_pass"] = json!(family.all_pass() && post_ok);
    base["jstar_membership_probe"] = json!({
        "status": probe_status,
        "iterations": probe.report.iterations,
    });
    if !(family.all_pass() && post_ok) {
        return Err(Failure::with_report(
            EXIT_CONTRADICTION,
            "certification diagnostics failed",
            base,
        ));
    }
    Ok(base)
}

/// Path of the closed-form sidecar written next to a fixture file.
pub fn sidecar_path(model: &Path) -> PathBuf {
    let stem = model.file_stem().map_or_else(|| "example22".into(), |s| s.to_os_string());
    let mut name = stem;
    name.push(".expected.json");
    model.with_file_name(name)
}

pub fn cmd_example22(config: &RunConfig, rho: f64) -> CmdResult {
    let m = example22(rho)?;
    let cf = closed_form(rho, config.lambda)?;
    let mut doc = m.to_document();
    doc.name = Some(format!("example22 rho={rho}"));
    let model = to_value(&doc);
    let expected = json!({
        "rho": rho,
        "lambda": config.lambda,
        "regime": cf.regime.label(),
        "jstar": {"0": cf.jstar[0], "1": cf.jstar[1], "2": cf.jstar[2]},
        "z": cf.z,
        "doeblin_bound": cf.doeblin_bound,
        "relative_value": cf.relative_value.map(|h| json!({"0": h[0], "1": h[1], "2": h[2]})),
    });
    match &config.out {
        Some(path) => {
            let sidecar = sidecar_path(path);
            write_file(path, &pretty(&model))?;
            write_file(&sidecar, &pretty(&expected))?;
            Ok(json!({
                "command": "example22",
                "model": path.display().to_string(),
                "sidecar": sidecar.display().to_string(),
                "expected": expected,
            }))
        }
        None => Ok(json!({ "model": model, "expected": expected })),
    }
}

pub fn cmd_doeblin(config: &RunConfig) -> CmdResult {
    let (m, path) = load(config)?;
    let (z, doeblin) = doeblin_state(config, &m)?;
    let _ = z;
    Ok(json!({
        "command": "doeblin",
        "provenance": provenance(config, &m, &path),
        "doeblin": doeblin,
    }))
}

pub fn cmd_evaluate(config: &RunConfig, policy: &str, horizon: Option<usize>) -> CmdResult {
    let (m, path) = load(config)?;
    let f = parse_policy(&m, policy)?;
    let lambda = config.risk();
    let mut report = json!({
        "command": "evaluate",
        "provenance": provenance(config, &m, &path),
        "policy": to_value(&f.to_named(&m)),
        "average": named(&m, &long_run_average(&m, &f, lambda)),
    });
    if let Some(n) = horizon {
        let pi = MarkovPolicy::stationary(&m, &f, n)?;
        report["finite_horizon"] = json!({
            "horizon": n,
            "values": named(&m, &finite_horizon_cost(&m, &pi, lambda, n)?),
        });
    }
    if let Some(name) = &config.z {
        let z = m.resolve_state(name)?;
        let times = expected_hitting_time(&m, &f, z);
        report["hitting_time"] = named(&m, &times);
        if times.is_finite() {
            report["tail_bound"] = to_value(&tail_bound(&m, &f, z)?);
        }
    }
    Ok(report)
}

pub fn cmd_simulate(
    config: &RunConfig,
    policy: &str,
    state: &str,
    horizon: usize,
    samples: usize,
) -> CmdResult {
    let (m, path) = load(config)?;
    let f = parse_policy(&m, policy)?;
    let x = m.resolve_state(state)?;
    let lambda = config.risk();
    let est = mc_certain_equivalent(&m, &f, lambda, x, horizon, samples, config.seed)?;
    let pi = MarkovPolicy::stationary(&m, &f, horizon)?;
    let exact = finite_horizon_cost(&m, &pi, lambda, horizon)?[x];
    let path_states: Vec<&str> = sample_trajectory(&m, &f, x, horizon, config.seed)?
        .states()
        .map(|y| m.state_name(y))
        .collect();
    Ok(json!({
        "command": "simulate",
        "provenance": provenance(config, &m, &path),
        "policy": to_value(&f.to_named(&m)),
        "state": state,
        "horizon": horizon,
        "estimate": to_value(&est),
        "exact": exact,
        "z_score": if est.stderr > 0.0 { (est.estimate - exact) / est.stderr } else { 0.0 },
        "sample_path": path_states,
    }))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text)
        .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Flattens a report into `section,state,value` rows. Keys that name a
/// model state go to the state column; other keys join the section path.
pub fn to_csv(report: &Value, states: &[String]) -> String {
    fn walk(v: &Value, path: &mut Vec<String>, states: &[String], out: &mut String) {
        match v {
            Value::Object(map) => {
                for (k, child) in map {
                    path.push(k.clone());
                    walk(child, path, states, out);
                    path.pop();
                }
            }
            Value::Array(items) => {
                for (i, child) in items.iter().enumerate() {
                    path.push(format!("[{i}]"));
                    walk(child, path, states, out);
                    path.pop();
                }
            }
            leaf => {
                let join = |parts: &[String]| {
                    let mut s = String::new();
                    for p in parts {
                        if !s.is_empty() && !p.starts_with('[') {
                            s.push('.');
                        }
                        s.push_str(p);
                    }
                    s
                };
                let (section, state) = match path.split_last() {
                    Some((last, rest)) if !rest.is_empty() && states.contains(last) => {
                        (join(rest), last.clone())
                    }
                    _ => (join(path), String::new()),
                };
                let value = match leaf {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                };
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    csv_field(&section),
                    csv_field(&state),
                    csv_field(&value)
                );
            }
        }
    }
    let mut out = String::from("section,state,value\n");
    walk(report, &mut Vec::new(), states, &mut out);
    out
}

fn render(config: &RunConfig, report: &Value) -> String {
    match config.output {
        OutputFormat::Json => pretty(report),
        OutputFormat::Csv => {
            let states = config
                .model
                .as_ref()
                .and_then(|p| std::fs::read_to_string(p).ok())
                .and_then(|t| Mdp::from_json(&t).ok())
                .map(|m| m.state_names().to_vec())
                .unwrap_or_else(|| vec!["0".into(), "1".into(), "2".into()]);
            to_csv(report, &states)
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("RSMDP_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Runs a parsed command and returns the report or the failure.
pub fn execute(cli: &Cli) -> Result<(RunConfig, Value), (Option<RunConfig>, Failure)> {
    let config = RunConfig::from_args(&cli.common).map_err(|f| (None, f))?;
    let result = match &cli.command {
        Command::Validate => cmd_validate(&config),
        Command::Solve => cmd_solve(&config),
        Command::Certify => cmd_certify(&config),
        Command::Example22 { rho } => cmd_example22(&config, *rho),
        Command::Doeblin => cmd_doeblin(&config),
        Command::Evaluate { policy, horizon } => cmd_evaluate(&config, policy, *horizon),
        Command::Simulate {
            policy,
            state,
            horizon,
            samples,
        } => cmd_simulate(&config, policy, state, *horizon, *samples),
    };
    match result {
        Ok(v) => Ok((config, v)),
        Err(f) => Err((Some(config), f)),
    }
}

/// Entry point of the binary.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    configure_threads();
    // the example22 command writes its own files to --out
    let writes_own_out = matches!(cli.command, Command::Example22 { .. });
    let (config, report, code) = match execute(&cli) {
        Ok((config, report)) => (Some(config), Some(report), EXIT_OK),
        Err((config, failure)) => {
            eprintln!("error: {}", failure.message);
            (config, failure.report, failure.code)
        }
    };
    if let (Some(config), Some(report)) = (config, report) {
        let text = render(&config, &report);
        match (&config.out, writes_own_out) {
            (Some(path), false) => {
                if let Err(f) = write_file(path, &text) {
                    eprintln!("error: {}", f.message);
                    return ExitCode::from(EXIT_USAGE);
                }
            }
            _ => print!("{text}"),
        }
    }
    ExitCode::from(code)
}
