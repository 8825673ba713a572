//! Sparse polynomial storage shared by coefficient systems and kernels.
//!
//! A monomial is the sorted list of its variable ids, `slot * |X| + point`,
//! so one key represents a whole within-slot permutation orbit. Values are
//! monomial coefficients: the symmetric coefficient times the orbit size.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use num_complex::Complex64;

use crate::metric_space::Point;
use crate::numeric::factorial;

pub(crate) type Monomial = Vec<u32>;
pub(crate) type Terms = BTreeMap<Monomial, Complex64>;

/// Degree caps applied by every operation that can raise degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Truncation {
    pub max_total_degree: usize,
    pub max_slot_degree: Option<usize>,
}

pub const DEFAULT_DEGREE_CAP: usize = 6;

impl Default for Truncation {
    fn default() -> Self {
        Truncation {
            max_total_degree: DEFAULT_DEGREE_CAP,
            max_slot_degree: None,
        }
    }
}

impl Truncation {
    pub fn total(max_total_degree: usize) -> Self {
        Truncation {
            max_total_degree,
            max_slot_degree: None,
        }
    }

    pub(crate) fn admits(&self, mono: &[u32], points: usize) -> bool {
        if mono.len() > self.max_total_degree {
            return false;
        }
        match self.max_slot_degree {
            None => true,
            Some(cap) => slot_runs(mono, points).all(|(_, len)| len <= cap),
        }
    }
}

#[inline]
pub(crate) fn var(slot: usize, point: Point, points: usize) -> u32 {
    u32::try_from(slot * points + point).expect("variable id overflow")
}

#[inline]
pub(crate) fn slot_of(v: u32, points: usize) -> usize {
    v as usize / points
}

#[inline]
pub(crate) fn point_of(v: u32, points: usize) -> Point {
    v as usize % points
}

/// `(slot, degree in that slot)` for the slots present in `mono`.
pub(crate) fn slot_runs(mono: &[u32], points: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
    let mut i = 0;
    std::iter::from_fn(move || {
        if i >= mono.len() {
            return None;
        }
        let slot = slot_of(mono[i], points);
        let start = i;
        while i < mono.len() && slot_of(mono[i], points) == slot {
            i += 1;
        }
        Some((slot, i - start))
    })
}

/// `(variable, multiplicity)` runs of a sorted monomial.
pub(crate) fn var_runs(mono: &[u32]) -> impl Iterator<Item = (u32, usize)> + '_ {
    let mut i = 0;
    std::iter::from_fn(move || {
        if i >= mono.len() {
            return None;
        }
        let v = mono[i];
        let start = i;
        while i < mono.len() && mono[i] == v {
            i += 1;
        }
        Some((v, i - start))
    })
}

pub(crate) fn profile(mono: &[u32], slots: usize, points: usize) -> Vec<usize> {
    let mut p = vec![0; slots];
    for &v in mono {
        p[slot_of(v, points)] += 1;
    }
    p
}

/// Number of distinct ordered tuples in the within-slot permutation orbit.
pub(crate) fn orbit_size(mono: &[u32], points: usize) -> u64 {
    let mut size = 1u64;
    let mut start = 0;
    for (_, len) in slot_runs(mono, points) {
        let slot = &mono[start..start + len];
        let denom: u64 = var_runs(slot).map(|(_, m)| factorial(m as u64)).product();
        size *= factorial(len as u64) / denom;
        start += len;
    }
    size
}

pub(crate) fn mul_monomials(a: &[u32], b: &[u32]) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

pub(crate) fn add_term(acc: &mut Terms, mono: Monomial, c: Complex64) {
    if c == Complex64::new(0.0, 0.0) {
        return;
    }
    let slot = acc.entry(mono).or_insert(Complex64::new(0.0, 0.0));
    *slot += c;
}

pub(crate) fn add_scaled(acc: &mut Terms, other: &Terms, scale: Complex64) {
    for (m, c) in other {
        add_term(acc, m.clone(), c * scale);
    }
}

pub(crate) fn drop_zeros(terms: &mut Terms) {
    terms.retain(|_, c| *c != Complex64::new(0.0, 0.0));
}

/// Truncated product; sets `truncated` when a nonzero product term is dropped.
pub(crate) fn mul(a: &Terms, b: &Terms, points: usize, trunc: &Truncation, truncated: &mut bool) -> Terms {
    let mut out = Terms::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            if ma.len() + mb.len() > trunc.max_total_degree {
                *truncated = true;
                continue;
            }
            let m = mul_monomials(ma, mb);
            if !trunc.admits(&m, points) {
                *truncated = true;
                continue;
            }
            add_term(&mut out, m, ca * cb);
        }
    }
    drop_zeros(&mut out);
    out
}

pub(crate) fn truncate(terms: &mut Terms, points: usize, trunc: &Truncation) -> bool {
    let before = terms.len();
    terms.retain(|m, _| trunc.admits(m, points));
    before != terms.len()
}

pub(crate) fn min_degree(terms: &Terms) -> Option<usize> {
    terms.keys().map(Vec::len).min()
}

pub(crate) fn one() -> Terms {
    let mut t = Terms::new();
    t.insert(Vec::new(), Complex64::new(1.0, 0.0));
    t
}

/// Evaluates `Σ c_m Π fields[slot][point]`.
pub(crate) fn evaluate(terms: &Terms, fields: &[&[Complex64]], points: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (m, c) in terms {
        let mut prod = *c;
        for &v in m {
            prod *= fields[slot_of(v, points)][point_of(v, points)];
        }
        acc += prod;
    }
    acc
}

/// Replaces each outer variable by a polynomial over the inner variables,
/// memoizing products of monomial prefixes so that repeated factors shared
/// across terms and output points are multiplied once.
pub(crate) struct Substituter<'a> {
    inner: &'a [Terms],
    min_degree: Vec<Option<usize>>,
    points: usize,
    trunc: Truncation,
    memo: HashMap<Monomial, Rc<Terms>>,
    pub truncated: bool,
}

impl<'a> Substituter<'a> {
    /// `inner[v]` is the polynomial substituted for outer variable `v`;
    /// `points` is `|X|` of the inner layout.
    pub fn new(inner: &'a [Terms], points: usize, trunc: Truncation) -> Self {
        Substituter {
            inner,
            min_degree: inner.iter().map(min_degree).collect(),
            points,
            trunc,
            memo: HashMap::new(),
            truncated: false,
        }
    }

    fn expand(&mut self, mono: &[u32]) -> Rc<Terms> {
        if let Some(t) = self.memo.get(mono) {
            return t.clone();
        }
        let result = match mono.split_last() {
            None => Rc::new(one()),
            Some((&last, prefix)) => {
                let head = self.expand(prefix);
                let mut trunc_flag = false;
                let t = mul(&head, &self.inner[last as usize], self.points, &self.trunc, &mut trunc_flag);
                self.truncated |= trunc_flag;
                Rc::new(t)
            }
        };
        self.memo.insert(mono.to_vec(), result.clone());
        result
    }

    /// `Σ c_m Π_{v ∈ m} inner[v]`, truncated.
    pub fn apply(&mut self, outer: &Terms) -> Terms {
        let mut out = Terms::new();
        for (m, c) in outer {
            let mut lower = 0usize;
            let mut vanishes = false;
            for &v in m {
                match self.min_degree[v as usize] {
                    Some(d) => lower += d,
                    None => vanishes = true,
                }
            }
            if vanishes {
                continue;
            }
            if lower > self.trunc.max_total_degree {
                self.truncated = true;
                continue;
            }
            let expanded = self.expand(m);
            add_scaled(&mut out, &expanded, *c);
        }
        drop_zeros(&mut out);
        out
    }
}
