//! Instance files: JSON documents describing a metric space, weights and the
//! objects the commands operate on. Complex numbers are `[re, im]` pairs or
//! plain reals.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Deserialize;

use crate::background::{BackgroundInstance, TripleEntry};
use crate::calculus::DiscreteKernel;
use crate::error::{Error, Result};
use crate::field_maps::{ComplexMatrix, FieldMapKernel};
use crate::metric_space::{MetricSpace, Point};
use crate::poly::Truncation;
use crate::series_algebra::{CoefficientSystem, MultiTuple};
use crate::solver::{ImplicitSystem, SolveOptions};
use crate::weights::WeightSystem;

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum RawComplex {
    Pair([f64; 2]),
    Real(f64),
}

impl From<RawComplex> for Complex64 {
    fn from(c: RawComplex) -> Self {
        match c {
            RawComplex::Pair([re, im]) => Complex64::new(re, im),
            RawComplex::Real(re) => Complex64::new(re, 0.0),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawExponent {
    Num(f64),
    Name(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    space: RawSpace,
    #[serde(default)]
    weights: RawWeights,
    #[serde(default)]
    functions: BTreeMap<String, RawFunction>,
    #[serde(default)]
    maps: BTreeMap<String, RawMap>,
    system: Option<RawSystem>,
    background: Option<RawBackground>,
    #[serde(default)]
    solve: RawSolve,
    #[serde(default)]
    compose: Vec<RawCompose>,
    #[serde(default)]
    diff: Vec<RawDiff>,
    #[serde(default)]
    product: Vec<RawProduct>,
    #[serde(default)]
    young: Vec<RawYoung>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpace {
    kind: String,
    points: Option<usize>,
    spacing: Option<f64>,
    matrix: Option<Vec<Vec<f64>>>,
    coords: Option<Vec<Vec<f64>>>,
    periods: Option<Vec<f64>>,
    mass: Option<f64>,
    terminal_limit: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeights {
    #[serde(default)]
    kappa: Vec<f64>,
    #[serde(default)]
    lambda: Vec<f64>,
    sigma: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    tuple: Vec<Vec<Point>>,
    coeff: RawComplex,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFunction {
    arity: usize,
    #[serde(default)]
    terms: Vec<RawTerm>,
    kappa: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    x: Point,
    tuple: Vec<Vec<Point>>,
    coeff: RawComplex,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMap {
    arity: usize,
    #[serde(default)]
    gamma_slots: usize,
    #[serde(default)]
    entries: Vec<RawEntry>,
    /// linear operator acting on slot `slot`
    matrix: Option<Vec<Vec<RawComplex>>>,
    #[serde(default)]
    slot: usize,
    kappa: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    f: Vec<Option<String>>,
    #[serde(rename = "L")]
    l: Vec<Option<String>>,
    #[serde(rename = "B")]
    b: Vec<Option<String>>,
    contraction: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBackground {
    #[serde(rename = "W1", default)]
    w1: Vec<(Point, Point, Point, RawComplex)>,
    #[serde(rename = "W2", default)]
    w2: Vec<(Point, Point, Point, RawComplex)>,
    #[serde(rename = "S1")]
    s1: Vec<Vec<RawComplex>>,
    #[serde(rename = "S2")]
    s2: Vec<Vec<RawComplex>>,
    w_f: f64,
    #[serde(rename = "K")]
    k: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolve {
    degree_cap: Option<usize>,
    tol: Option<f64>,
    max_iter: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCompose {
    outer: String,
    maps: Vec<String>,
    lambda: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiff {
    target: String,
    #[serde(default = "one")]
    p: usize,
    sigma: Option<f64>,
    lambda: Option<Vec<f64>>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProduct {
    a: String,
    b: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawYoung {
    measures: Vec<Vec<f64>>,
    values: Vec<RawComplex>,
    functions: Vec<Vec<RawComplex>>,
    exponents: Vec<RawExponent>,
}

/// A named function with the weight factors it is normed with.
#[derive(Debug, Clone)]
pub struct NamedFunction {
    pub system: CoefficientSystem,
    pub weights: WeightSystem,
}

#[derive(Debug, Clone)]
pub struct NamedMap {
    pub kernel: FieldMapKernel,
    pub weights: WeightSystem,
}

#[derive(Debug, Clone)]
pub struct ComposeTask {
    pub outer: String,
    pub maps: Vec<String>,
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DiffTask {
    pub target: String,
    pub p: usize,
    pub sigma: f64,
    /// δ-slot factors; the target's own factors when absent
    pub lambda: Option<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct ProductTask {
    pub a: String,
    pub b: String,
}

#[derive(Debug, Clone)]
pub struct YoungTask {
    pub kernel: DiscreteKernel,
    pub functions: Vec<Vec<Complex64>>,
    pub exponents: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct InstanceFile {
    pub space: Arc<MetricSpace>,
    pub mass: f64,
    pub kappa: Vec<f64>,
    pub lambda: Vec<f64>,
    pub sigma: f64,
    pub functions: BTreeMap<String, NamedFunction>,
    pub maps: BTreeMap<String, NamedMap>,
    pub system: Option<ImplicitSystem>,
    pub background: Option<BackgroundInstance>,
    pub solve: SolveOptions,
    pub compose: Vec<ComposeTask>,
    pub diff: Vec<DiffTask>,
    pub product: Vec<ProductTask>,
    pub young: Vec<YoungTask>,
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<InstanceFile> {
    let text = std::fs::read_to_string(path)?;
    parse_instance(&text)
}

pub fn parse_instance(text: &str) -> Result<InstanceFile> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawInstance = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::schema(path, e.into_inner().to_string())
    })?;
    build(raw)
}

fn complex_matrix(rows: &[Vec<RawComplex>], path: &str) -> Result<ComplexMatrix> {
    let n = rows.len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(Error::schema(format!("{path}[{i}]"), format!("expected {n} entries, found {}", r.len())));
        }
    }
    Ok(ComplexMatrix::from_fn(n, n, |i, j| rows[i][j].into()))
}

fn build_space(raw: &RawSpace) -> Result<MetricSpace> {
    let need_points = || raw.points.ok_or_else(|| Error::schema("space.points", "required for this kind"));
    let space = match raw.kind.as_str() {
        "line" => MetricSpace::line(need_points()?, raw.spacing.unwrap_or(1.0))?,
        "cycle" => MetricSpace::cycle(need_points()?)?,
        "matrix" => MetricSpace::from_matrix(raw.matrix.as_ref().ok_or_else(|| Error::schema("space.matrix", "required for kind matrix"))?)?,
        "euclidean" => MetricSpace::euclidean(
            raw.coords
                .as_ref()
                .ok_or_else(|| Error::schema("space.coords", "required for kind euclidean"))?,
        )?,
        "torus" => MetricSpace::torus(
            raw.coords.as_ref().ok_or_else(|| Error::schema("space.coords", "required for kind torus"))?,
            raw.periods.as_ref().ok_or_else(|| Error::schema("space.periods", "required for kind torus"))?,
        )?,
        other => return Err(Error::schema("space.kind", format!("unknown metric kind {other:?}"))),
    };
    if space.is_empty() {
        return Err(Error::schema("space", "X must have at least one point"));
    }
    Ok(match raw.terminal_limit {
        Some(limit) => space.with_terminal_limit(limit),
        None => space,
    })
}

/// Weight factors for an object of the given arity.
fn default_factors(arity: usize, kappa: &[f64], lambda: &[f64], explicit: Option<&Vec<f64>>, path: &str) -> Result<Vec<f64>> {
    if let Some(k) = explicit {
        if k.len() != arity {
            return Err(Error::schema(format!("{path}.kappa"), format!("expected {arity} factors, found {}", k.len())));
        }
        return Ok(k.clone());
    }
    if arity == kappa.len() {
        Ok(kappa.to_vec())
    } else if arity == kappa.len() + lambda.len() {
        Ok(kappa.iter().chain(lambda).copied().collect())
    } else {
        Err(Error::schema(
            format!("{path}.kappa"),
            format!("arity {arity} matches neither weights.kappa nor weights.kappa + weights.lambda"),
        ))
    }
}

fn build(raw: RawInstance) -> Result<InstanceFile> {
    let base = build_space(&raw.space)?;
    let n = base.len();
    let mass = raw.space.mass.unwrap_or(1.0);
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::schema("space.mass", "must be positive"));
    }
    let space = Arc::new(base.clone());
    let kappa = raw.weights.kappa.clone();
    let lambda = raw.weights.lambda.clone();
    let sigma = raw.weights.sigma.unwrap_or(1.0);

    let mut functions = BTreeMap::new();
    for (name, f) in &raw.functions {
        let path = format!("functions.{name}");
        let terms: Vec<(MultiTuple, Complex64)> = f.terms.iter().map(|t| (MultiTuple::new(t.tuple.clone()), t.coeff.into())).collect();
        let system = CoefficientSystem::symmetrize(f.arity, n, &terms).map_err(|e| Error::schema(format!("{path}.terms"), e.to_string()))?;
        let factors = default_factors(f.arity, &kappa, &lambda, f.kappa.as_ref(), &path)?;
        let weights = WeightSystem::new(space.clone(), factors)?;
        functions.insert(name.clone(), NamedFunction { system, weights });
    }

    let mut maps = BTreeMap::new();
    for (name, m) in &raw.maps {
        let path = format!("maps.{name}");
        let kernel = match &m.matrix {
            Some(rows) => {
                if !m.entries.is_empty() {
                    return Err(Error::schema(path, "give either entries or matrix"));
                }
                let s = complex_matrix(rows, &format!("{path}.matrix"))?;
                FieldMapKernel::linear_in_slot(&s, m.arity, m.slot)?.with_gamma_slots(m.gamma_slots)?
            }
            None => {
                let entries: Vec<(Point, MultiTuple, Complex64)> = m.entries.iter().map(|e| (e.x, MultiTuple::new(e.tuple.clone()), e.coeff.into())).collect();
                FieldMapKernel::from_entries(n, m.arity, m.gamma_slots, &entries).map_err(|e| Error::schema(format!("{path}.entries"), e.to_string()))?
            }
        };
        let factors = default_factors(m.arity, &kappa, &lambda, m.kappa.as_ref(), &path)?;
        let weights = WeightSystem::new(space.clone(), factors)?;
        maps.insert(name.clone(), NamedMap { kernel, weights });
    }

    let system = match &raw.system {
        None => None,
        Some(sys) => {
            let s = kappa.len();
            let r = lambda.len();
            let fetch = |names: &[Option<String>], arity: usize, gamma: usize, field: &str| -> Result<Vec<FieldMapKernel>> {
                names
                    .iter()
                    .enumerate()
                    .map(|(i, nm)| match nm {
                        None => Ok(FieldMapKernel::zero(n, arity, gamma)),
                        Some(nm) => maps
                            .get(nm)
                            .map(|m| m.kernel.clone())
                            .ok_or_else(|| Error::schema(format!("system.{field}[{i}]"), format!("unknown map {nm:?}"))),
                    })
                    .collect()
            };
            let f = fetch(&sys.f, s, 0, "f")?;
            let l = fetch(&sys.l, s + r, r, "L")?;
            let b = fetch(&sys.b, s + r, r, "B")?;
            Some(ImplicitSystem::new(space.clone(), f, l, b, kappa.clone(), lambda.clone(), sys.contraction)?)
        }
    };

    let background = match raw.background {
        None => None,
        Some(bg) => {
            let conv = |v: Vec<(Point, Point, Point, RawComplex)>| -> Vec<TripleEntry> { v.into_iter().map(|(x, y, z, c)| (x, y, z, c.into())).collect() };
            let s1 = complex_matrix(&bg.s1, "background.S1")?;
            let s2 = complex_matrix(&bg.s2, "background.S2")?;
            Some(BackgroundInstance::new(base, mass, conv(bg.w1), conv(bg.w2), s1, s2, bg.w_f, bg.k)?)
        }
    };

    let defaults = SolveOptions::default();
    let solve = SolveOptions {
        tol: raw.solve.tol.unwrap_or(defaults.tol),
        max_iter: raw.solve.max_iter.unwrap_or(defaults.max_iter),
        truncation: raw.solve.degree_cap.map_or(defaults.truncation, Truncation::total),
    };

    let check_name = |name: &str, path: String| -> Result<()> {
        if functions.contains_key(name) || maps.contains_key(name) {
            Ok(())
        } else {
            Err(Error::schema(path, format!("unknown function or map {name:?}")))
        }
    };
    let mut compose = Vec::new();
    for (i, c) in raw.compose.into_iter().enumerate() {
        check_name(&c.outer, format!("compose[{i}].outer"))?;
        for (k, m) in c.maps.iter().enumerate() {
            if !maps.contains_key(m) {
                return Err(Error::schema(format!("compose[{i}].maps[{k}]"), format!("unknown map {m:?}")));
            }
        }
        compose.push(ComposeTask {
            outer: c.outer,
            maps: c.maps,
            lambda: c.lambda.unwrap_or_else(|| lambda.clone()),
        });
    }
    let mut diff = Vec::new();
    for (i, d) in raw.diff.into_iter().enumerate() {
        check_name(&d.target, format!("diff[{i}].target"))?;
        diff.push(DiffTask {
            target: d.target,
            p: d.p,
            sigma: d.sigma.unwrap_or(sigma),
            lambda: d.lambda,
        });
    }
    let mut product = Vec::new();
    for (i, p) in raw.product.into_iter().enumerate() {
        for (field, nm) in [("a", &p.a), ("b", &p.b)] {
            if !maps.contains_key(nm) {
                return Err(Error::schema(format!("product[{i}].{field}"), format!("unknown map {nm:?}")));
            }
        }
        product.push(ProductTask { a: p.a, b: p.b });
    }
    let mut young = Vec::new();
    for (i, y) in raw.young.into_iter().enumerate() {
        let kernel = DiscreteKernel::new(y.measures, y.values.into_iter().map(Into::into).collect())?;
        let mut exponents = Vec::new();
        for (k, e) in y.exponents.iter().enumerate() {
            exponents.push(match e {
                RawExponent::Num(v) => *v,
                RawExponent::Name(s) if s == "inf" => f64::INFINITY,
                RawExponent::Name(s) => {
                    return Err(Error::schema(
                        format!("young[{i}].exponents[{k}]"),
                        format!("expected a number or \"inf\", found {s:?}"),
                    ))
                }
            });
        }
        young.push(YoungTask {
            kernel,
            functions: y.functions.into_iter().map(|f| f.into_iter().map(Into::into).collect()).collect(),
            exponents,
        });
    }

    Ok(InstanceFile {
        space,
        mass,
        kappa,
        lambda,
        sigma,
        functions,
        maps,
        system,
        background,
        solve,
        compose,
        diff,
        product,
        young,
    })
}
