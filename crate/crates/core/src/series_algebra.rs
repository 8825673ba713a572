//! Scalar analytic functions of `s` fields, stored as truncated symmetric
//! coefficient systems, with the weighted norm `‖f‖_w` and evaluation.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::metric_space::Point;
use crate::numeric::{lp_norm, reciprocal_sum, CompensatedSum};
use crate::poly::{self, Monomial, Terms};
use crate::verdict::BoundCheck;
use crate::weights::{DegreeProfile, WeightSystem};

/// An element `(x⃗_1, …, x⃗_s)` of `X^{n_1} × ⋯ × X^{n_s}`; empty slots are allowed.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiTuple(Vec<Vec<Point>>);

impl MultiTuple {
    pub fn new(slots: Vec<Vec<Point>>) -> Self {
        MultiTuple(slots)
    }

    /// The tuple with `arity` empty slots.
    pub fn empty(arity: usize) -> Self {
        MultiTuple(vec![Vec::new(); arity])
    }

    pub fn slots(&self) -> &[Vec<Point>] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn profile(&self) -> DegreeProfile {
        DegreeProfile(self.0.iter().map(Vec::len).collect())
    }

    pub fn total_degree(&self) -> usize {
        self.0.iter().map(Vec::len).sum()
    }

    /// Each slot sorted; the representative of the permutation orbit.
    pub fn canonical(&self) -> Self {
        MultiTuple(
            self.0
                .iter()
                .map(|s| {
                    let mut s = s.clone();
                    s.sort_unstable();
                    s
                })
                .collect(),
        )
    }

    /// Slot-wise concatenation `x⃗ ∘ y⃗`.
    pub fn concat(&self, other: &MultiTuple) -> Result<Self> {
        if self.arity() != other.arity() {
            return Err(Error::arity(self.arity(), other.arity()));
        }
        Ok(MultiTuple(
            self.0.iter().zip(&other.0).map(|(a, b)| a.iter().chain(b).copied().collect()).collect(),
        ))
    }

    pub(crate) fn to_monomial(&self, points: usize) -> Result<Monomial> {
        let mut m = Vec::with_capacity(self.total_degree());
        for (slot, pts) in self.0.iter().enumerate() {
            for &p in pts {
                if p >= points {
                    return Err(Error::UnknownPoint { point: p, size: points });
                }
                m.push(poly::var(slot, p, points));
            }
        }
        m.sort_unstable();
        Ok(m)
    }

    pub(crate) fn from_monomial(mono: &[u32], arity: usize, points: usize) -> Self {
        let mut slots = vec![Vec::new(); arity];
        for &v in mono {
            slots[poly::slot_of(v, points)].push(poly::point_of(v, points));
        }
        MultiTuple(slots)
    }
}

/// A complex field on `X`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldVector(pub Vec<Complex64>);

impl FieldVector {
    pub fn zeros(points: usize) -> Self {
        FieldVector(vec![Complex64::new(0.0, 0.0); points])
    }

    pub fn from_real(values: &[f64]) -> Self {
        FieldVector(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm(&self.0, p)
    }

    pub fn sup_norm(&self) -> f64 {
        lp_norm(&self.0, f64::INFINITY)
    }
}

pub(crate) fn field_slices(fields: &[FieldVector], arity: usize, points: usize) -> Result<Vec<&[Complex64]>> {
    if fields.len() != arity {
        return Err(Error::arity(arity, fields.len()));
    }
    fields
        .iter()
        .map(|f| {
            if f.len() == points {
                Ok(f.values())
            } else {
                Err(Error::DimensionMismatch {
                    expected: points,
                    found: f.len(),
                })
            }
        })
        .collect()
}

/// Symmetric coefficient system of a polynomial in `s` fields on `X`.
///
/// One representative per within-slot permutation orbit is stored; its value
/// is the coefficient of the corresponding monomial, i.e. the symmetric
/// coefficient `a(x⃗)` times the orbit size.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSystem {
    arity: usize,
    points: usize,
    terms: Terms,
    truncated: bool,
}

impl CoefficientSystem {
    pub fn zero(arity: usize, points: usize) -> Self {
        CoefficientSystem {
            arity,
            points,
            terms: Terms::new(),
            truncated: false,
        }
    }

    pub fn constant(arity: usize, points: usize, c: Complex64) -> Self {
        let mut f = Self::zero(arity, points);
        poly::add_term(&mut f.terms, Vec::new(), c);
        f
    }

    /// Symmetrizes arbitrary ordered-tuple coefficients: each entry is spread
    /// evenly over the permutations of its tuple.
    pub fn symmetrize(arity: usize, points: usize, raw: &[(MultiTuple, Complex64)]) -> Result<Self> {
        let mut terms = Terms::new();
        for (tuple, c) in raw {
            if tuple.arity() != arity {
                return Err(Error::arity(arity, tuple.arity()));
            }
            poly::add_term(&mut terms, tuple.to_monomial(points)?, *c);
        }
        poly::drop_zeros(&mut terms);
        Ok(Self::from_terms(arity, points, terms))
    }

    /// Builds `Σ c · α_1(x⃗_1)⋯α_s(x⃗_s)` from monomial coefficients.
    pub fn from_monomials(arity: usize, points: usize, monomials: &[(MultiTuple, Complex64)]) -> Result<Self> {
        Self::symmetrize(arity, points, monomials)
    }

    pub(crate) fn from_terms(arity: usize, points: usize, terms: Terms) -> Self {
        CoefficientSystem {
            arity,
            points,
            terms,
            truncated: false,
        }
    }

    pub(crate) fn with_truncated(mut self, truncated: bool) -> Self {
        self.truncated |= truncated;
        self
    }

    pub(crate) fn raw_terms(&self) -> &Terms {
        &self.terms
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Whether degree caps dropped terms while building this system.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> Complex64 {
        self.terms.get(&Vec::new()).copied().unwrap_or_default()
    }

    /// Canonical tuples with their symmetric coefficient and orbit size.
    pub fn terms(&self) -> impl Iterator<Item = (MultiTuple, Complex64, u64)> + '_ {
        self.terms.iter().map(|(m, c)| {
            let orbit = poly::orbit_size(m, self.points);
            (MultiTuple::from_monomial(m, self.arity, self.points), c / orbit as f64, orbit)
        })
    }

    /// Canonical tuples with their monomial coefficients.
    pub fn monomials(&self) -> impl Iterator<Item = (MultiTuple, Complex64)> + '_ {
        self.terms.iter().map(|(m, c)| (MultiTuple::from_monomial(m, self.arity, self.points), *c))
    }

    /// Symmetric coefficient `a(x⃗_1, …, x⃗_s)` of an arbitrary ordered tuple.
    pub fn coefficient(&self, tuple: &MultiTuple) -> Result<Complex64> {
        if tuple.arity() != self.arity {
            return Err(Error::arity(self.arity, tuple.arity()));
        }
        let m = tuple.to_monomial(self.points)?;
        Ok(self.terms.get(&m).map(|c| c / poly::orbit_size(&m, self.points) as f64).unwrap_or_default())
    }

    pub fn max_total_degree(&self) -> Option<usize> {
        self.terms.keys().map(Vec::len).max()
    }

    /// Smallest degree in slot `slot` over all stored terms.
    pub fn min_slot_degree(&self, slot: usize) -> Option<usize> {
        self.terms
            .keys()
            .map(|m| m.iter().filter(|&&v| poly::slot_of(v, self.points) == slot).count())
            .min()
    }

    fn check_weights(&self, w: &WeightSystem) -> Result<()> {
        w.expect_arity(self.arity)?;
        if w.points() != self.points {
            return Err(Error::DimensionMismatch {
                expected: self.points,
                found: w.points(),
            });
        }
        Ok(())
    }

    /// `‖f‖_w`: `|a(−)|` plus, for each degree profile, the largest pinned
    /// weighted sum over pin point, pinned slot and position.
    pub fn norm(&self, w: &WeightSystem) -> Result<f64> {
        self.check_weights(w)?;
        let n = self.points;
        let mut constant = 0.0;
        // profile -> (slot, point) -> pinned sum
        let mut pinned: BTreeMap<Vec<usize>, BTreeMap<u32, CompensatedSum>> = BTreeMap::new();
        for (m, c) in &self.terms {
            if m.is_empty() {
                constant = c.norm();
                continue;
            }
            let value = c.norm() * w.monomial_weight(m, None)?;
            let prof = poly::profile(m, self.arity, n);
            let sums = pinned.entry(prof.clone()).or_default();
            for (v, mult) in poly::var_runs(m) {
                let slot_deg = prof[poly::slot_of(v, n)];
                sums.entry(v).or_default().add(value * mult as f64 / slot_deg as f64);
            }
        }
        let mut total = CompensatedSum::new();
        total.add(constant);
        for sums in pinned.values() {
            total.add(sums.values().map(CompensatedSum::value).fold(0.0, f64::max));
        }
        Ok(total.value())
    }

    pub fn evaluate(&self, fields: &[FieldVector]) -> Result<Complex64> {
        let slices = field_slices(fields, self.arity, self.points)?;
        Ok(poly::evaluate(&self.terms, &slices, self.points))
    }

    /// `a·f + b·g`, zeros dropped.
    pub fn combine(f: &Self, g: &Self, a: Complex64, b: Complex64) -> Result<Self> {
        if f.arity != g.arity {
            return Err(Error::arity(f.arity, g.arity));
        }
        if f.points != g.points {
            return Err(Error::DimensionMismatch {
                expected: f.points,
                found: g.points,
            });
        }
        let mut terms = Terms::new();
        poly::add_scaled(&mut terms, &f.terms, a);
        poly::add_scaled(&mut terms, &g.terms, b);
        poly::drop_zeros(&mut terms);
        Ok(Self::from_terms(f.arity, f.points, terms).with_truncated(f.truncated || g.truncated))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut terms = Terms::new();
        poly::add_scaled(&mut terms, &self.terms, c);
        Self::from_terms(self.arity, self.points, terms).with_truncated(self.truncated)
    }

    /// Checks `|f(α⃗)| ≤ ‖f‖_w Π (‖α_j‖_{p_j} / κ_j)^{d_j}` for fields with
    /// `|α_j| ≤ κ_j`; `f` must have degree at least `d_j` in slot `j` and
    /// `Σ d_j / p_j = 1`.
    pub fn young_check(&self, w: &WeightSystem, degrees: &[usize], exponents: &[f64], fields: &[FieldVector]) -> Result<BoundCheck> {
        self.check_weights(w)?;
        if degrees.len() != self.arity || exponents.len() != self.arity {
            return Err(Error::arity(self.arity, degrees.len().min(exponents.len())));
        }
        let weighted: Vec<f64> = degrees.iter().zip(exponents).filter(|(d, _)| **d > 0).map(|(d, p)| p / *d as f64).collect();
        let sum = reciprocal_sum(&weighted);
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::ExponentMismatch(format!("Σ d_j/p_j = {sum}, expected 1")));
        }
        for (slot, &d) in degrees.iter().enumerate() {
            if self.min_slot_degree(slot).is_some_and(|m| m < d) {
                return Err(Error::DegreeMismatch(format!("function has degree below {d} in slot {slot}")));
            }
        }
        let lhs = self.evaluate(fields)?.norm();
        let within = fields.iter().zip(w.factors()).all(|(f, k)| f.sup_norm() <= *k);
        let mut rhs = self.norm(w)?;
        for ((f, k), (&d, &p)) in fields.iter().zip(w.factors()).zip(degrees.iter().zip(exponents)) {
            rhs *= (f.lp_norm(p) / k).powi(d as i32);
        }
        Ok(BoundCheck::conditional("young_function", lhs, rhs, within))
    }
}

#[cfg(test)]
mod tests {
    use std::f64::consts::E;
    use std::sync::Arc;

    use super::*;
    use crate::metric_space::MetricSpace;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn weights(points: usize, factors: Vec<f64>) -> WeightSystem {
        WeightSystem::new(Arc::new(MetricSpace::line(points, 1.0).unwrap()), factors).unwrap()
    }

    #[test]
    fn symmetrize_spreads_over_orbit() {
        let f = CoefficientSystem::symmetrize(1, 2, &[(MultiTuple::new(vec![vec![0, 1]]), c(1.0))]).unwrap();
        assert_eq!(f.coefficient(&MultiTuple::new(vec![vec![0, 1]])).unwrap(), c(0.5));
        assert_eq!(f.coefficient(&MultiTuple::new(vec![vec![1, 0]])).unwrap(), c(0.5));
        let (t, a, orbit) = f.terms().next().unwrap();
        assert_eq!((t, a, orbit), (MultiTuple::new(vec![vec![0, 1]]), c(0.5), 2));

        let sq = CoefficientSystem::symmetrize(1, 2, &[(MultiTuple::new(vec![vec![0, 0]]), c(1.0))]).unwrap();
        assert_eq!(sq.coefficient(&MultiTuple::new(vec![vec![0, 0]])).unwrap(), c(1.0));
    }

    #[test]
    fn symmetrize_is_idempotent() {
        let f = CoefficientSystem::symmetrize(
            2,
            2,
            &[
                (MultiTuple::new(vec![vec![1, 0], vec![1]]), c(2.0)),
                (MultiTuple::new(vec![vec![0, 1], vec![1]]), c(-0.5)),
            ],
        )
        .unwrap();
        let raw: Vec<_> = f.terms().map(|(t, a, orbit)| (t, a * orbit as f64)).collect();
        let g = CoefficientSystem::symmetrize(2, 2, &raw).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn norm_examples() {
        let w = weights(2, vec![1.0]);
        assert_eq!(CoefficientSystem::constant(1, 2, Complex64::new(3.0, 4.0)).norm(&w).unwrap(), 5.0);

        let f = CoefficientSystem::symmetrize(1, 2, &[(MultiTuple::new(vec![vec![0, 1]]), c(1.0))]).unwrap();
        assert!((f.norm(&w).unwrap() - 0.5 * E).abs() < 1e-15);

        let w3 = weights(2, vec![3.0]);
        let sq = CoefficientSystem::symmetrize(1, 2, &[(MultiTuple::new(vec![vec![0, 0]]), c(1.0))]).unwrap();
        assert_eq!(sq.norm(&w3).unwrap(), 9.0);
    }

    #[test]
    fn evaluation() {
        let f = CoefficientSystem::symmetrize(1, 2, &[(MultiTuple::new(vec![vec![0, 1]]), c(1.0))]).unwrap();
        let alpha = FieldVector(vec![c(2.0), Complex64::new(0.0, 3.0)]);
        assert_eq!(f.evaluate(std::slice::from_ref(&alpha)).unwrap(), Complex64::new(0.0, 6.0));
        let k = CoefficientSystem::constant(1, 2, c(7.0));
        assert_eq!(k.evaluate(&[alpha]).unwrap(), c(7.0));
        assert!(matches!(k.evaluate(&[]), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn combine_cancels_and_scales() {
        let f = CoefficientSystem::symmetrize(1, 2, &[(MultiTuple::new(vec![vec![0, 1]]), c(1.0))]).unwrap();
        let zero = CoefficientSystem::combine(&f, &f, c(1.0), c(-1.0)).unwrap();
        assert!(zero.is_zero());
        let doubled = CoefficientSystem::combine(&f, &CoefficientSystem::zero(1, 2), c(2.0), c(0.0)).unwrap();
        assert_eq!(doubled.coefficient(&MultiTuple::new(vec![vec![1, 0]])).unwrap(), c(1.0));
        let g = CoefficientSystem::zero(2, 2);
        assert!(CoefficientSystem::combine(&f, &g, c(1.0), c(1.0)).is_err());
    }

    #[test]
    fn young_rejects_bad_exponents_and_degrees() {
        let w = weights(2, vec![1.0]);
        let f = CoefficientSystem::symmetrize(1, 2, &[(MultiTuple::new(vec![vec![0]]), c(1.0))]).unwrap();
        let alpha = [FieldVector::from_real(&[0.5, 0.5])];
        assert!(matches!(f.young_check(&w, &[1], &[2.0], &alpha), Err(Error::ExponentMismatch(_))));
        assert!(matches!(f.young_check(&w, &[2], &[2.0], &alpha), Err(Error::DegreeMismatch(_))));
        let check = f.young_check(&w, &[1], &[1.0], &alpha).unwrap();
        assert!(check.holds());
    }
}
