//! The finite metric set `X` and its tree lengths.
//!
//! `tree_length(T)` is the length of the shortest tree whose vertex set is a
//! subset of `X` containing every point of `T` (a Steiner tree with Steiner
//! points restricted to `X`). It is computed exactly with the Dreyfus–Wagner
//! recursion over subsets of the terminals and memoized per terminal set.

use std::collections::HashMap;
use std::fmt;
use std::sync::RwLock;

use crate::error::{Error, Result};

/// Dense index of a point of `X`.
pub type Point = usize;

pub const DEFAULT_TERMINAL_LIMIT: usize = 12;

/// Relative slack used when validating metric axioms of floating point input.
const AXIOM_SLACK: f64 = 1e-12;

/// How the distance matrix was obtained; kept for reports.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricKind {
    Explicit,
    Euclidean,
    /// Quotient of a rectangular lattice by the given periods.
    Torus {
        periods: Vec<f64>,
    },
}

pub struct MetricSpace {
    n: usize,
    dist: Vec<f64>,
    kind: MetricKind,
    terminal_limit: usize,
    tau_cache: RwLock<HashMap<Vec<Point>, f64>>,
}

impl MetricSpace {
    /// Builds a space from an explicit distance matrix, validating the
    /// metric axioms.
    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut dist = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::MetricViolation(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            dist.extend_from_slice(row);
        }
        Self::from_flat(n, dist, MetricKind::Explicit)
    }

    /// Euclidean distances between the given coordinates.
    pub fn euclidean(coords: &[Vec<f64>]) -> Result<Self> {
        let dim = check_coords(coords)?;
        let n = coords.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let d2: f64 = (0..dim).map(|k| (coords[i][k] - coords[j][k]).powi(2)).sum();
                dist[i * n + j] = d2.sqrt();
            }
        }
        Self::from_flat(n, dist, MetricKind::Euclidean)
    }

    /// Distance induced on `R^D / (L_1 Z × … × L_D Z)`: the Euclidean distance
    /// minimized over all lattice translates.
    pub fn torus(coords: &[Vec<f64>], periods: &[f64]) -> Result<Self> {
        let dim = check_coords(coords)?;
        if periods.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: periods.len(),
            });
        }
        if let Some(p) = periods.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::MetricViolation(format!("torus period {p} must be positive")));
        }
        let n = coords.len();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let d2: f64 = (0..dim)
                    .map(|k| {
                        let raw = (coords[i][k] - coords[j][k]).rem_euclid(periods[k]);
                        raw.min(periods[k] - raw).powi(2)
                    })
                    .sum();
                dist[i * n + j] = d2.sqrt();
            }
        }
        Self::from_flat(n, dist, MetricKind::Torus { periods: periods.to_vec() })
    }

    /// `n` equally spaced points on a line.
    pub fn line(n: usize, spacing: f64) -> Result<Self> {
        let coords: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64 * spacing]).collect();
        Self::euclidean(&coords)
    }

    /// Cycle `Z/n` with unit spacing.
    pub fn cycle(n: usize) -> Result<Self> {
        let coords: Vec<Vec<f64>> = (0..n).map(|i| vec![i as f64]).collect();
        Self::torus(&coords, &[n as f64])
    }

    fn from_flat(n: usize, dist: Vec<f64>, kind: MetricKind) -> Result<Self> {
        let space = MetricSpace {
            n,
            dist,
            kind,
            terminal_limit: DEFAULT_TERMINAL_LIMIT,
            tau_cache: RwLock::new(HashMap::new()),
        };
        space.validate()?;
        Ok(space)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return Err(Error::MetricViolation("X must be non-empty".into()));
        }
        let scale = self.dist.iter().fold(1.0_f64, |m, d| m.max(d.abs()));
        let tol = AXIOM_SLACK * scale;
        for i in 0..n {
            for j in 0..n {
                let d = self.d(i, j);
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::MetricViolation(format!("d({i},{j}) = {d} is not a finite non-negative number")));
                }
                if i == j && d != 0.0 {
                    return Err(Error::MetricViolation(format!("d({i},{i}) = {d} is not zero")));
                }
                if (d - self.d(j, i)).abs() > tol {
                    return Err(Error::MetricViolation(format!(
                        "asymmetric: d({i},{j}) = {d} but d({j},{i}) = {}",
                        self.d(j, i)
                    )));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.d(i, k) > self.d(i, j) + self.d(j, k) + tol {
                        return Err(Error::MetricViolation(format!(
                            "triangle inequality fails: d({i},{k}) > d({i},{j}) + d({j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// The same point set with every distance multiplied by `mass`.
    pub fn scaled(&self, mass: f64) -> Result<Self> {
        if !(mass.is_finite() && mass >= 0.0) {
            return Err(Error::MetricViolation(format!("mass scale {mass} must be non-negative")));
        }
        let dist = self.dist.iter().map(|d| d * mass).collect();
        let mut s = Self::from_flat(self.n, dist, self.kind.clone())?;
        s.terminal_limit = self.terminal_limit;
        Ok(s)
    }

    pub fn with_terminal_limit(mut self, limit: usize) -> Self {
        self.terminal_limit = limit;
        self
    }

    pub fn terminal_limit(&self) -> usize {
        self.terminal_limit
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn kind(&self) -> &MetricKind {
        &self.kind
    }

    #[inline]
    fn d(&self, x: Point, y: Point) -> f64 {
        self.dist[x * self.n + y]
    }

    pub fn check_point(&self, x: Point) -> Result<()> {
        if x < self.n {
            Ok(())
        } else {
            Err(Error::UnknownPoint { point: x, size: self.n })
        }
    }

    pub fn distance(&self, x: Point, y: Point) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.d(x, y))
    }

    /// Exact tree length `τ_d` of a terminal set. Duplicates are ignored and
    /// the empty set has length zero.
    pub fn tree_length(&self, terminals: &[Point]) -> Result<f64> {
        let mut set = terminals.to_vec();
        set.sort_unstable();
        set.dedup();
        for &t in &set {
            self.check_point(t)?;
        }
        self.tree_length_of_set(&set)
    }

    /// `terminals` must be sorted, deduplicated and in range.
    pub(crate) fn tree_length_of_set(&self, terminals: &[Point]) -> Result<f64> {
        match terminals.len() {
            0 | 1 => return Ok(0.0),
            2 => return Ok(self.d(terminals[0], terminals[1])),
            k if k > self.terminal_limit => {
                return Err(Error::TerminalLimitExceeded {
                    count: k,
                    limit: self.terminal_limit,
                })
            }
            _ => {}
        }
        if let Some(&v) = self.tau_cache.read().expect("tau cache poisoned").get(terminals) {
            return Ok(v);
        }
        let v = self.dreyfus_wagner(terminals);
        self.tau_cache.write().expect("tau cache poisoned").insert(terminals.to_vec(), v);
        Ok(v)
    }

    fn dreyfus_wagner(&self, terminals: &[Point]) -> f64 {
        let n = self.n;
        let (root, rest) = terminals.split_last().expect("at least three terminals");
        let k = rest.len();
        let full = (1usize << k) - 1;
        // best[mask * n + v]: shortest tree spanning {rest[i] : i ∈ mask} ∪ {v}
        let mut best = vec![f64::INFINITY; (full + 1) * n];
        for (i, &t) in rest.iter().enumerate() {
            let row = &mut best[(1 << i) * n..(1 << i) * n + n];
            for (v, slot) in row.iter_mut().enumerate() {
                *slot = self.d(t, v);
            }
        }
        let mut merged = vec![f64::INFINITY; n];
        for mask in 1..=full {
            if mask.count_ones() < 2 {
                continue;
            }
            merged.iter_mut().for_each(|m| *m = f64::INFINITY);
            let low = mask & mask.wrapping_neg();
            // enumerate splits containing the lowest bit to visit each pair once
            let mut sub = (mask - 1) & mask;
            while sub > 0 {
                if sub & low != 0 {
                    let other = mask ^ sub;
                    for (u, m) in merged.iter_mut().enumerate() {
                        let c = best[sub * n + u] + best[other * n + u];
                        if c < *m {
                            *m = c;
                        }
                    }
                }
                sub = (sub - 1) & mask;
            }
            for v in 0..n {
                let mut b = f64::INFINITY;
                for (u, m) in merged.iter().enumerate() {
                    let c = m + self.d(u, v);
                    if c < b {
                        b = c;
                    }
                }
                best[mask * n + v] = b;
            }
        }
        best[full * n + root]
    }
}

fn check_coords(coords: &[Vec<f64>]) -> Result<usize> {
    let dim = coords.first().map_or(0, Vec::len);
    for (i, c) in coords.iter().enumerate() {
        if c.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: c.len() });
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::MetricViolation(format!("coordinates of point {i} are not finite")));
        }
    }
    Ok(dim)
}

impl Clone for MetricSpace {
    fn clone(&self) -> Self {
        MetricSpace {
            n: self.n,
            dist: self.dist.clone(),
            kind: self.kind.clone(),
            terminal_limit: self.terminal_limit,
            tau_cache: RwLock::new(self.tau_cache.read().expect("tau cache poisoned").clone()),
        }
    }
}

impl fmt::Debug for MetricSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricSpace")
            .field("n", &self.n)
            .field("kind", &self.kind)
            .field("terminal_limit", &self.terminal_limit)
            .finish_non_exhaustive()
    }
}
