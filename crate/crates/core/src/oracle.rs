//! Deliberately naive reference implementations for cross-checks.
//!
//! Nothing here shares norm, tree or summation code with the main modules:
//! trees are enumerated through Prüfer sequences, tuples are materialized
//! densely in every order, and sums are plain left folds.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field_maps::FieldMapKernel;
use crate::metric_space::{MetricSpace, Point};
use crate::poly::Truncation;
use crate::series_algebra::{CoefficientSystem, FieldVector, MultiTuple};
use crate::weights::WeightSystem;

pub const MAX_BRUTE_POINTS: usize = 7;
pub const MAX_DENSE_TUPLES: usize = 1 << 20;

/// Minimum over all vertex sets `S ⊇ T` and all spanning trees of `S` of
/// the total edge length.
pub fn brute_steiner(space: &MetricSpace, terminals: &[Point]) -> Result<f64> {
    let n = space.len();
    if n > MAX_BRUTE_POINTS {
        return Err(Error::TooLarge(format!("{n} points, brute force is limited to {MAX_BRUTE_POINTS}")));
    }
    let mut need = 0u32;
    for &t in terminals {
        space.check_point(t)?;
        need |= 1 << t;
    }
    if need.count_ones() <= 1 {
        return Ok(0.0);
    }
    let mut best = f64::INFINITY;
    for set in 0u32..(1 << n) {
        if set & need != need {
            continue;
        }
        let verts: Vec<Point> = (0..n).filter(|v| set & (1 << v) != 0).collect();
        best = best.min(min_spanning_by_enumeration(space, &verts)?);
    }
    Ok(best)
}

fn min_spanning_by_enumeration(space: &MetricSpace, verts: &[Point]) -> Result<f64> {
    let m = verts.len();
    if m == 1 {
        return Ok(0.0);
    }
    if m == 2 {
        return space.distance(verts[0], verts[1]);
    }
    let mut best = f64::INFINITY;
    let mut seq = vec![0usize; m - 2];
    loop {
        let mut len = 0.0;
        for (a, b) in prufer_edges(&seq, m) {
            len += space.distance(verts[a], verts[b])?;
        }
        best = best.min(len);
        // next sequence in base m
        let mut i = 0;
        loop {
            if i == seq.len() {
                return Ok(best);
            }
            seq[i] += 1;
            if seq[i] < m {
                break;
            }
            seq[i] = 0;
            i += 1;
        }
    }
}

fn prufer_edges(seq: &[usize], m: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; m];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(m - 1);
    for &s in seq {
        let leaf = (0..m).find(|&v| degree[v] == 1).expect("a leaf always exists");
        edges.push((leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..m).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

struct TreeMemo<'a> {
    space: &'a MetricSpace,
    cache: HashMap<u32, f64>,
}

impl<'a> TreeMemo<'a> {
    fn new(space: &'a MetricSpace) -> Self {
        TreeMemo { space, cache: HashMap::new() }
    }

    fn tau(&mut self, points: &[Point]) -> Result<f64> {
        let mask = points.iter().fold(0u32, |m, &p| m | (1 << p));
        if let Some(v) = self.cache.get(&mask) {
            return Ok(*v);
        }
        let v = brute_steiner(self.space, points)?;
        self.cache.insert(mask, v);
        Ok(v)
    }
}

/// All ordered tuples with the given degree profile.
fn ordered_tuples(points: usize, profile: &[usize]) -> Result<Vec<MultiTuple>> {
    let total: usize = profile.iter().sum();
    let count = points.checked_pow(total as u32).unwrap_or(usize::MAX);
    if count > MAX_DENSE_TUPLES {
        return Err(Error::TooLarge(format!("{count} ordered tuples")));
    }
    let mut out = Vec::with_capacity(count);
    for mut code in 0..count {
        let mut flat = Vec::with_capacity(total);
        for _ in 0..total {
            flat.push(code % points);
            code /= points;
        }
        let mut slots = Vec::with_capacity(profile.len());
        let mut start = 0;
        for &k in profile {
            slots.push(flat[start..start + k].to_vec());
            start += k;
        }
        out.push(MultiTuple::new(slots));
    }
    Ok(out)
}

/// All degree profiles of `arity` slots with total degree in `1..=max`.
fn profiles(arity: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0; arity];
    fn rec(i: usize, left: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == current.len() {
            if current.iter().sum::<usize>() > 0 {
                out.push(current.clone());
            }
            return;
        }
        for k in 0..=left {
            current[i] = k;
            rec(i + 1, left - k, current, out);
        }
        current[i] = 0;
    }
    rec(0, max, &mut current, &mut out);
    out
}

fn weight_factor(w: &WeightSystem, profile: &[usize]) -> f64 {
    let mut f = 1.0;
    for (k, &n) in w.factors().iter().zip(profile) {
        for _ in 0..n {
            f *= k;
        }
    }
    f
}

fn support(tuple: &MultiTuple, extra: Option<Point>) -> Vec<Point> {
    let mut s: Vec<Point> = tuple.slots().iter().flatten().copied().chain(extra).collect();
    s.sort_unstable();
    s.dedup();
    s
}

/// `‖f‖_w` from the displayed definition, over every ordered tuple.
pub fn norm_oracle(f: &CoefficientSystem, w: &WeightSystem) -> Result<f64> {
    let n = f.points();
    let space = w.space().as_ref();
    let mut memo = TreeMemo::new(space);
    let mut total = f.coefficient(&MultiTuple::empty(f.arity()))?.norm();
    let max = f.max_total_degree().unwrap_or(0);
    for profile in profiles(f.arity(), max) {
        let factor = weight_factor(w, &profile);
        // (x, j, i) -> sum
        let mut pinned: HashMap<(Point, usize, usize), f64> = HashMap::new();
        for tuple in ordered_tuples(n, &profile)? {
            let a = f.coefficient(&tuple)?.norm();
            if a == 0.0 {
                continue;
            }
            let value = a * factor * memo.tau(&support(&tuple, None))?.exp();
            for (j, slot) in tuple.slots().iter().enumerate() {
                for (i, &x) in slot.iter().enumerate() {
                    *pinned.entry((x, j, i)).or_insert(0.0) += value;
                }
            }
        }
        total += pinned.values().fold(0.0, |m, &v| if v > m { v } else { m });
    }
    Ok(total)
}

/// Per-profile `(L, R)` for a kernel, from the displayed definition.
pub fn kernel_profile_oracle(a: &FieldMapKernel, w: &WeightSystem) -> Result<Vec<(Vec<usize>, f64, f64)>> {
    let n = a.points();
    let mut memo = TreeMemo::new(w.space().as_ref());
    let max = a.max_total_degree().unwrap_or(0);
    let mut out = Vec::new();
    for profile in profiles(a.arity(), max) {
        let factor = weight_factor(w, &profile);
        let mut left = vec![0.0; n];
        let mut right: HashMap<(Point, usize, usize), f64> = HashMap::new();
        let mut any = false;
        for tuple in ordered_tuples(n, &profile)? {
            for (x, l) in left.iter_mut().enumerate() {
                let c = a.coefficient(x, &tuple)?.norm();
                if c == 0.0 {
                    continue;
                }
                any = true;
                let value = c * factor * memo.tau(&support(&tuple, Some(x)))?.exp();
                *l += value;
                for (j, slot) in tuple.slots().iter().enumerate() {
                    for (i, &xp) in slot.iter().enumerate() {
                        *right.entry((xp, j, i)).or_insert(0.0) += value;
                    }
                }
            }
        }
        if any {
            let l = left.iter().fold(0.0_f64, |m, &v| m.max(v));
            let r = right.values().fold(0.0_f64, |m, &v| m.max(v));
            out.push((profile, l, r));
        }
    }
    Ok(out)
}

pub fn kernel_norm_oracle(a: &FieldMapKernel, w: &WeightSystem) -> Result<f64> {
    Ok(kernel_profile_oracle(a, w)?.iter().fold(0.0, |s, (_, l, r)| s + l.max(*r)))
}

/// Primed norm: profile norms weighted by their degree in the gamma slots.
pub fn primed_norm_oracle(a: &FieldMapKernel, w: &WeightSystem) -> Result<f64> {
    let first = a.arity() - a.gamma_slots();
    Ok(kernel_profile_oracle(a, w)?
        .iter()
        .fold(0.0, |s, (p, l, r)| s + p[first..].iter().sum::<usize>() as f64 * l.max(*r)))
}

/// `Σ_{ordered tuples} a(x⃗) Π α(x⃗)`.
pub fn literal_evaluate(f: &CoefficientSystem, fields: &[FieldVector]) -> Result<Complex64> {
    let mut acc = f.coefficient(&MultiTuple::empty(f.arity()))?;
    for profile in profiles(f.arity(), f.max_total_degree().unwrap_or(0)) {
        for tuple in ordered_tuples(f.points(), &profile)? {
            let a = f.coefficient(&tuple)?;
            if a == Complex64::default() {
                continue;
            }
            acc += a * product(&tuple, fields);
        }
    }
    Ok(acc)
}

/// `A(α⃗)(x) = Σ_{ordered tuples} A(x; x⃗) Π α(x⃗)` at every `x`.
pub fn literal_evaluate_map(a: &FieldMapKernel, fields: &[FieldVector]) -> Result<FieldVector> {
    let n = a.points();
    let mut out = vec![Complex64::default(); n];
    for profile in profiles(a.arity(), a.max_total_degree().unwrap_or(0)) {
        for tuple in ordered_tuples(n, &profile)? {
            let p = product(&tuple, fields);
            for (x, o) in out.iter_mut().enumerate() {
                *o += a.coefficient(x, &tuple)? * p;
            }
        }
    }
    Ok(FieldVector(out))
}

fn product(tuple: &MultiTuple, fields: &[FieldVector]) -> Complex64 {
    let mut p = Complex64::new(1.0, 0.0);
    for (slot, f) in tuple.slots().iter().zip(fields) {
        for &x in slot {
            p *= f.0[x];
        }
    }
    p
}

/// `(h(A⃗(α⃗)), h̃(α⃗))`: nested literal evaluation against evaluation of the
/// composed system.
pub fn eval_compose_oracle(
    h: &CoefficientSystem,
    maps: &[FieldMapKernel],
    fields: &[FieldVector],
    w: &WeightSystem,
    w_lambda: &WeightSystem,
    trunc: &Truncation,
) -> Result<(Complex64, Complex64)> {
    let inner: Vec<FieldVector> = maps.iter().map(|a| literal_evaluate_map(a, fields)).collect::<Result<_>>()?;
    let direct = literal_evaluate(h, &inner)?;
    let composed = crate::calculus::substitute_function(h, maps, w, w_lambda, trunc)?.value;
    Ok((direct, literal_evaluate(&composed, fields)?))
}
