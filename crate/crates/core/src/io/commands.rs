//! Command drivers. Each command turns an instance file into a report tree.

use std::time::Instant;

use clap::ValueEnum;
use serde_json::{json, Map, Value};

use crate::background::{solve_background, uniqueness_probe};
use crate::calculus::{difference, difference_map, generalized_young, pointwise_product, substitute_function, substitute_map};
use crate::error::{Error, Result};
use crate::field_maps::FieldMapKernel;
use crate::io::instance::InstanceFile;
use crate::io::report::{contains_violation, float, to_report, Report};
use crate::metric_space::Point;
use crate::oracle::brute_steiner;
use crate::poly::Truncation;
use crate::series_algebra::CoefficientSystem;
use crate::solver::{check_hypotheses, compare_to_linear, solve_fixed_point, solve_linear, FieldMapTuple, ImplicitSystem, SolveCertificate, SolveOptions};
use crate::verdict::BoundCheck;
use crate::weights::WeightSystem;

/// Largest `|X|` for which `steiner` also runs the brute-force oracle.
const STEINER_ORACLE_POINTS: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Norm,
    Mapnorm,
    Compose,
    Diff,
    Product,
    Young,
    Solve,
    Linear,
    Compare,
    Background,
    Uniq,
    Steiner,
    VerifyAll,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Norm => "norm",
            Command::Mapnorm => "mapnorm",
            Command::Compose => "compose",
            Command::Diff => "diff",
            Command::Product => "product",
            Command::Young => "young",
            Command::Solve => "solve",
            Command::Linear => "linear",
            Command::Compare => "compare",
            Command::Background => "background",
            Command::Uniq => "uniq",
            Command::Steiner => "steiner",
            Command::VerifyAll => "verify-all",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CommandOptions {
    pub degree_cap: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: u64,
    pub terminals: Option<Vec<Point>>,
    pub trials: Option<usize>,
    pub timing: bool,
}

/// Default number of restarts for `uniq`.
pub const DEFAULT_TRIALS: usize = 10;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    /// 0 on success or unmet hypotheses, 1 if any check was violated
    pub exit_code: i32,
}

/// Report written for a failed command.
pub fn error_report(e: &Error) -> Report {
    let mut body = Map::new();
    body.insert("code".into(), json!(e.code()));
    body.insert("message".into(), json!(e.to_string()));
    let cert = match e {
        Error::HypothesesFailed { certificate: Some(c), .. } => Some(c.as_ref()),
        Error::MaxIterExceeded { certificate, .. } => Some(certificate.as_ref()),
        _ => None,
    };
    if let Some(c) = cert.and_then(|c| to_report(c).ok()) {
        body.insert("certificate".into(), c);
    }
    json!({ "error": body })
}

pub fn run_command(cmd: Command, inst: &InstanceFile, opts: &CommandOptions) -> Result<Outcome> {
    let start = Instant::now();
    let solve = solve_options(inst, opts);
    let result = match cmd {
        Command::Norm => norm(inst)?,
        Command::Mapnorm => mapnorm(inst)?,
        Command::Compose => compose(inst, &solve.truncation)?,
        Command::Diff => diff(inst)?,
        Command::Product => product(inst, &solve.truncation)?,
        Command::Young => young(inst)?,
        Command::Solve => solve_cmd(system(inst)?, &solve, false)?,
        Command::Linear => solve_cmd(system(inst)?, &solve, true)?,
        Command::Compare => compare(system(inst)?, &solve)?,
        Command::Background => background(inst, &solve)?,
        Command::Uniq => uniq(inst, &solve, opts)?,
        Command::Steiner => steiner(inst, opts)?,
        Command::VerifyAll => verify_all(inst, &solve, opts)?,
    };
    let mut report = Map::new();
    report.insert("command".into(), json!(cmd.name()));
    report.insert("result".into(), result);
    if opts.timing {
        report.insert("timing_seconds".into(), float(start.elapsed().as_secs_f64()));
    }
    let report = Value::Object(report);
    let exit_code = i32::from(contains_violation(&report));
    Ok(Outcome { report, exit_code })
}

fn solve_options(inst: &InstanceFile, opts: &CommandOptions) -> SolveOptions {
    let mut s = inst.solve;
    if let Some(cap) = opts.degree_cap {
        s.truncation = Truncation::total(cap);
    }
    if let Some(tol) = opts.tol {
        s.tol = tol;
    }
    if let Some(m) = opts.max_iter {
        s.max_iter = m;
    }
    s
}

fn system(inst: &InstanceFile) -> Result<&ImplicitSystem> {
    inst.system
        .as_ref()
        .ok_or_else(|| Error::schema("system", "this command needs a system section"))
}

fn checks(list: &[BoundCheck]) -> Result<Value> {
    to_report(&list)
}

fn complex_value(c: num_complex::Complex64) -> Value {
    json!([float(c.re), float(c.im)])
}

fn kernel_entries(k: &FieldMapKernel) -> Value {
    Value::Array(
        k.terms()
            .map(|(x, t, c)| json!({"x": x, "tuple": t.slots(), "coeff": complex_value(c)}))
            .collect(),
    )
}

fn function_summary(f: &CoefficientSystem, w: &WeightSystem) -> Result<Value> {
    Ok(json!({
        "arity": f.arity(),
        "norm": float(f.norm(w)?),
        "max_degree": f.max_total_degree(),
        "terms": f.len(),
        "truncated": f.is_truncated(),
    }))
}

fn map_summary(k: &FieldMapKernel, w: &WeightSystem) -> Result<Value> {
    let detail: Vec<Value> = k
        .kernel_norm_detail(w)?
        .into_iter()
        .map(|p| json!({"profile": p.profile, "left": float(p.left), "right": float(p.right)}))
        .collect();
    let primed = if k.gamma_slots() > 0 { float(k.primed_norm(w)?) } else { Value::Null };
    Ok(json!({
        "arity": k.arity(),
        "gamma_slots": k.gamma_slots(),
        "kernel_norm": float(k.kernel_norm(w)?),
        "primed_norm": primed,
        "profiles": detail,
        "terms": k.len(),
        "truncated": k.is_truncated(),
    }))
}

fn norm(inst: &InstanceFile) -> Result<Value> {
    let mut out = Map::new();
    for (name, f) in &inst.functions {
        out.insert(name.clone(), function_summary(&f.system, &f.weights)?);
    }
    Ok(Value::Object(out))
}

fn mapnorm(inst: &InstanceFile) -> Result<Value> {
    let mut out = Map::new();
    for (name, m) in &inst.maps {
        out.insert(name.clone(), map_summary(&m.kernel, &m.weights)?);
    }
    Ok(Value::Object(out))
}

fn compose(inst: &InstanceFile, trunc: &Truncation) -> Result<Value> {
    let mut out = Vec::new();
    for task in &inst.compose {
        let maps: Vec<FieldMapKernel> = task.maps.iter().map(|m| inst.maps[m].kernel.clone()).collect();
        let w = match task.maps.first() {
            Some(m) => inst.maps[m].weights.clone(),
            None => return Err(Error::schema("compose", "at least one map is required")),
        };
        let w_lambda = WeightSystem::new(inst.space.clone(), task.lambda.clone())?;
        let entry = if let Some(f) = inst.functions.get(&task.outer) {
            let r = substitute_function(&f.system, &maps, &w, &w_lambda, trunc)?;
            json!({
                "checks": checks(&r.checks)?,
                "result": function_summary(&r.value, &w)?,
                "truncated": r.truncated,
            })
        } else {
            let b = &inst.maps[&task.outer].kernel;
            let r = substitute_map(b, &maps, &w, &w_lambda, trunc)?;
            json!({
                "checks": checks(&r.checks)?,
                "result": map_summary(&r.value, &w)?,
                "truncated": r.truncated,
            })
        };
        out.push(json!({"outer": task.outer, "maps": task.maps, "outcome": entry}));
    }
    Ok(Value::Array(out))
}

fn diff(inst: &InstanceFile) -> Result<Value> {
    let mut out = Vec::new();
    for task in &inst.diff {
        let entry = if let Some(f) = inst.functions.get(&task.target) {
            let lambdas = task.lambda.clone().unwrap_or_else(|| f.weights.factors().to_vec());
            let r = difference(&f.system, &f.weights, task.p, &lambdas, task.sigma)?;
            json!({"checks": checks(&r.checks)?, "terms": r.value.len()})
        } else {
            let m = &inst.maps[&task.target];
            let lambdas = task.lambda.clone().unwrap_or_else(|| m.weights.factors().to_vec());
            let r = difference_map(&m.kernel, &m.weights, &lambdas, task.sigma)?;
            json!({"checks": checks(&r.checks)?, "terms": r.value.len()})
        };
        out.push(json!({"target": task.target, "p": task.p, "sigma": float(task.sigma), "outcome": entry}));
    }
    Ok(Value::Array(out))
}

fn product(inst: &InstanceFile, trunc: &Truncation) -> Result<Value> {
    let mut out = Vec::new();
    for task in &inst.product {
        let a = &inst.maps[&task.a];
        let b = &inst.maps[&task.b];
        let r = pointwise_product(&a.kernel, &b.kernel, &a.weights, trunc)?;
        out.push(json!({
            "a": task.a,
            "b": task.b,
            "checks": checks(&r.checks)?,
            "result": map_summary(&r.value, &a.weights)?,
            "truncated": r.truncated,
        }));
    }
    Ok(Value::Array(out))
}

fn young(inst: &InstanceFile) -> Result<Value> {
    let mut out = Vec::new();
    for task in &inst.young {
        let r = generalized_young(&task.kernel, &task.functions, &task.exponents)?;
        let exps: Vec<Value> = task.exponents.iter().map(|p| if p.is_infinite() { json!("inf") } else { float(*p) }).collect();
        out.push(json!({"exponents": exps, "kernel_norm": float(r.kernel_norm), "checks": checks(&[r.check])?}));
    }
    Ok(Value::Array(out))
}

fn tuple_report(gamma: &FieldMapTuple) -> Value {
    Value::Array(gamma.entries.iter().map(kernel_entries).collect())
}

fn certificate(cert: &SolveCertificate) -> Result<Value> {
    to_report(cert)
}

fn solve_cmd(sys: &ImplicitSystem, opts: &SolveOptions, linear: bool) -> Result<Value> {
    let hypotheses = to_report(&check_hypotheses(sys)?)?;
    let (gamma, cert) = if linear { solve_linear(sys, opts)? } else { solve_fixed_point(sys, opts)? };
    Ok(json!({
        "status": "solved",
        "hypotheses": hypotheses,
        "certificate": certificate(&cert)?,
        "solution": tuple_report(&gamma),
    }))
}

fn compare(sys: &ImplicitSystem, opts: &SolveOptions) -> Result<Value> {
    let c = compare_to_linear(sys, opts)?;
    Ok(json!({"status": "solved", "comparison": to_report(&c)?}))
}

fn background_section(inst: &InstanceFile) -> Result<&crate::background::BackgroundInstance> {
    inst.background
        .as_ref()
        .ok_or_else(|| Error::schema("background", "this command needs a background section"))
}

fn background(inst: &InstanceFile, opts: &SolveOptions) -> Result<Value> {
    let sol = solve_background(background_section(inst)?, opts)?;
    Ok(json!({
        "status": "solved",
        "certificate": to_report(&sol.certificate)?,
        "gamma": tuple_report(&sol.gamma),
        "phi_high": Value::Array(sol.phi_high.iter().map(kernel_entries).collect()),
    }))
}

fn uniq(inst: &InstanceFile, opts: &SolveOptions, cmd: &CommandOptions) -> Result<Value> {
    let r = uniqueness_probe(background_section(inst)?, cmd.trials.unwrap_or(DEFAULT_TRIALS), cmd.seed, opts)?;
    Ok(json!({"status": "solved", "seed": cmd.seed, "probe": to_report(&r)?}))
}

/// Within `verify-all`, unmet hypotheses are recorded instead of aborting.
fn tolerate_hypotheses(r: Result<Value>) -> Result<Value> {
    match r {
        Err(Error::HypothesesFailed { reason, certificate: cert }) => Ok(json!({
            "status": "hypothesis_not_met",
            "reason": reason,
            "certificate": match cert {
                Some(c) => certificate(&c)?,
                None => Value::Null,
            },
        })),
        other => other,
    }
}

fn steiner(inst: &InstanceFile, opts: &CommandOptions) -> Result<Value> {
    let space = &inst.space;
    let terminals: Vec<Point> = opts.terminals.clone().unwrap_or_else(|| (0..space.len()).collect());
    let tau = space.tree_length(&terminals)?;
    let oracle = if space.len() <= STEINER_ORACLE_POINTS {
        let b = brute_steiner(space, &terminals)?;
        json!({"tau": float(b), "difference": float((b - tau).abs())})
    } else {
        Value::Null
    };
    Ok(json!({"terminals": terminals, "tau": float(tau), "brute_force": oracle}))
}

fn verify_all(inst: &InstanceFile, opts: &SolveOptions, cmd: &CommandOptions) -> Result<Value> {
    let mut out = Map::new();
    if !inst.functions.is_empty() {
        out.insert("norm".into(), norm(inst)?);
    }
    if !inst.maps.is_empty() {
        out.insert("mapnorm".into(), mapnorm(inst)?);
    }
    if !inst.compose.is_empty() {
        out.insert("compose".into(), compose(inst, &opts.truncation)?);
    }
    if !inst.diff.is_empty() {
        out.insert("diff".into(), diff(inst)?);
    }
    if !inst.product.is_empty() {
        out.insert("product".into(), product(inst, &opts.truncation)?);
    }
    if !inst.young.is_empty() {
        out.insert("young".into(), young(inst)?);
    }
    if let Some(sys) = &inst.system {
        out.insert("solve".into(), tolerate_hypotheses(solve_cmd(sys, opts, false))?);
        out.insert("linear".into(), tolerate_hypotheses(solve_cmd(sys, opts, true))?);
        out.insert("compare".into(), tolerate_hypotheses(compare(sys, opts))?);
    }
    if inst.background.is_some() {
        out.insert("background".into(), tolerate_hypotheses(background(inst, opts))?);
        out.insert("uniq".into(), tolerate_hypotheses(uniq(inst, opts, cmd))?);
    }
    if inst.space.len() <= inst.space.terminal_limit() {
        out.insert(
            "steiner".into(),
            steiner(
                inst,
                &CommandOptions {
                    terminals: None,
                    ..cmd.clone()
                },
            )?,
        );
    }
    Ok(Value::Object(out))
}
