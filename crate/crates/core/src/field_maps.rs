//! Field maps: polynomial maps from `s` fields on `X` to a field on `X`,
//! given by kernels `A(x; x⃗_1, …, x⃗_s)` with vanishing constant term.
//!
//! The trailing `gamma_slots` slots of a kernel are the "last `r` arguments"
//! used by primed norms and degree restrictions.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric_space::Point;
use crate::numeric::{reciprocal_sum, CompensatedSum};
use crate::poly::{self, Terms, Truncation};
use crate::series_algebra::{field_slices, CoefficientSystem, FieldVector, MultiTuple};
use crate::verdict::BoundCheck;
use crate::weights::WeightSystem;

pub type ComplexMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldMapKernel {
    arity: usize,
    gamma_slots: usize,
    points: usize,
    /// polynomial at each output point
    outputs: Vec<Terms>,
    truncated: bool,
}

/// The two pinned sums of one degree profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileNorm {
    pub profile: Vec<usize>,
    /// output point pinned
    pub left: f64,
    /// one input component pinned
    pub right: f64,
}

impl ProfileNorm {
    pub fn value(&self) -> f64 {
        self.left.max(self.right)
    }
}

impl FieldMapKernel {
    pub fn zero(points: usize, arity: usize, gamma_slots: usize) -> Self {
        assert!(gamma_slots <= arity, "gamma slots exceed arity");
        FieldMapKernel {
            arity,
            gamma_slots,
            points,
            outputs: vec![Terms::new(); points],
            truncated: false,
        }
    }

    /// Builds a kernel from ordered-tuple entries `(x, x⃗, A(x; x⃗))`,
    /// symmetrizing within each slot.
    pub fn from_entries(points: usize, arity: usize, gamma_slots: usize, entries: &[(Point, MultiTuple, Complex64)]) -> Result<Self> {
        if gamma_slots > arity {
            return Err(Error::Structure(format!("{gamma_slots} gamma slots exceed arity {arity}")));
        }
        let mut k = Self::zero(points, arity, gamma_slots);
        for (x, tuple, c) in entries {
            if *x >= points {
                return Err(Error::UnknownPoint { point: *x, size: points });
            }
            if tuple.arity() != arity {
                return Err(Error::arity(arity, tuple.arity()));
            }
            let m = tuple.to_monomial(points)?;
            if m.is_empty() && *c != Complex64::default() {
                return Err(Error::Structure("field map kernels must have zero constant term".into()));
            }
            poly::add_term(&mut k.outputs[*x], m, *c);
        }
        k.outputs.iter_mut().for_each(poly::drop_zeros);
        Ok(k)
    }

    pub(crate) fn from_outputs(points: usize, arity: usize, gamma_slots: usize, mut outputs: Vec<Terms>, truncated: bool) -> Self {
        debug_assert_eq!(outputs.len(), points);
        for t in &mut outputs {
            t.remove(&Vec::new());
            poly::drop_zeros(t);
        }
        FieldMapKernel {
            arity,
            gamma_slots,
            points,
            outputs,
            truncated,
        }
    }

    /// `A(α⃗)(x) = α_slot(x)`.
    pub fn identity(points: usize, arity: usize, slot: usize) -> Self {
        assert!(slot < arity, "identity slot out of range");
        let outputs = (0..points)
            .map(|x| {
                let mut t = Terms::new();
                t.insert(vec![poly::var(slot, x, points)], Complex64::new(1.0, 0.0));
                t
            })
            .collect();
        Self::from_outputs(points, arity, 0, outputs, false)
    }

    /// The one-field kernel `A(x; (y)) = S(x, y)` of a linear operator.
    pub fn from_linear_operator(s: &ComplexMatrix) -> Result<Self> {
        if s.nrows() != s.ncols() {
            return Err(Error::DimensionMismatch {
                expected: s.nrows(),
                found: s.ncols(),
            });
        }
        Self::linear_in_slot(s, 1, 0)
    }

    /// `A(α⃗)(x) = Σ_y S(x,y) α_slot(y)` as an `arity`-field kernel.
    pub fn linear_in_slot(s: &ComplexMatrix, arity: usize, slot: usize) -> Result<Self> {
        let n = s.nrows();
        if s.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: s.ncols() });
        }
        if slot >= arity {
            return Err(Error::arity(slot + 1, arity));
        }
        let outputs = (0..n)
            .map(|x| {
                let mut t = Terms::new();
                for y in 0..n {
                    poly::add_term(&mut t, vec![poly::var(slot, y, n)], s[(x, y)]);
                }
                t
            })
            .collect();
        Ok(Self::from_outputs(n, arity, 0, outputs, false))
    }

    /// The local map `γ ↦ E_n(a γ(x)) = Σ_{ℓ ≥ n} (aγ(x))^ℓ / ℓ!` with one
    /// gamma slot, truncated at `degree_cap`.
    pub fn truncated_exponential(points: usize, n: usize, a: f64, degree_cap: usize) -> Self {
        let mut fact = 1.0;
        let mut outputs = vec![Terms::new(); points];
        for ell in 1..=degree_cap {
            fact *= ell as f64;
            if ell < n.max(1) {
                continue;
            }
            let c = Complex64::new(a.powi(ell as i32) / fact, 0.0);
            for (x, t) in outputs.iter_mut().enumerate() {
                poly::add_term(t, vec![poly::var(0, x, points); ell], c);
            }
        }
        Self::from_outputs(points, 1, 1, outputs, true)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn gamma_slots(&self) -> usize {
        self.gamma_slots
    }

    /// Number of leading (non-gamma) slots.
    pub fn alpha_slots(&self) -> usize {
        self.arity - self.gamma_slots
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// Reinterprets the split between alpha and gamma slots.
    pub fn with_gamma_slots(mut self, gamma_slots: usize) -> Result<Self> {
        if gamma_slots > self.arity {
            return Err(Error::Structure(format!("{gamma_slots} gamma slots exceed arity {}", self.arity)));
        }
        self.gamma_slots = gamma_slots;
        Ok(self)
    }

    pub(crate) fn outputs(&self) -> &[Terms] {
        &self.outputs
    }

    pub fn is_zero(&self) -> bool {
        self.outputs.iter().all(Terms::is_empty)
    }

    /// Number of stored `(x, orbit)` entries.
    pub fn len(&self) -> usize {
        self.outputs.iter().map(Terms::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    /// `(x, canonical tuple, symmetric coefficient)` for every stored entry.
    pub fn terms(&self) -> impl Iterator<Item = (Point, MultiTuple, Complex64)> + '_ {
        self.outputs.iter().enumerate().flat_map(move |(x, t)| {
            t.iter().map(move |(m, c)| {
                let orbit = poly::orbit_size(m, self.points) as f64;
                (x, MultiTuple::from_monomial(m, self.arity, self.points), c / orbit)
            })
        })
    }

    /// Symmetric kernel value `A(x; x⃗)` at an arbitrary ordered tuple.
    pub fn coefficient(&self, x: Point, tuple: &MultiTuple) -> Result<Complex64> {
        if x >= self.points {
            return Err(Error::UnknownPoint { point: x, size: self.points });
        }
        if tuple.arity() != self.arity {
            return Err(Error::arity(self.arity, tuple.arity()));
        }
        let m = tuple.to_monomial(self.points)?;
        Ok(self.outputs[x]
            .get(&m)
            .map(|c| c / poly::orbit_size(&m, self.points) as f64)
            .unwrap_or_default())
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.outputs.iter().flat_map(|t| t.values()).map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Smallest total degree among stored entries.
    pub fn min_total_degree(&self) -> Option<usize> {
        self.outputs.iter().filter_map(poly::min_degree).min()
    }

    pub fn max_total_degree(&self) -> Option<usize> {
        self.outputs.iter().flat_map(|t| t.keys().map(Vec::len)).max()
    }

    fn gamma_degree(&self, mono: &[u32]) -> usize {
        let first_gamma = self.alpha_slots();
        mono.iter().filter(|&&v| poly::slot_of(v, self.points) >= first_gamma).count()
    }

    /// Smallest and largest total degree in the gamma slots.
    pub fn gamma_degree_range(&self) -> Option<(usize, usize)> {
        let degs = self.outputs.iter().flat_map(|t| t.keys().map(|m| self.gamma_degree(m)));
        degs.fold(None, |acc, d| match acc {
            None => Some((d, d)),
            Some((lo, hi)) => Some((lo.min(d), hi.max(d))),
        })
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

    /// `L` and `R` for every degree profile present, in profile order.
    pub fn kernel_norm_detail(&self, w: &WeightSystem) -> Result<Vec<ProfileNorm>> {
        self.check_weights(w)?;
        let n = self.points;
        struct Acc {
            left: BTreeMap<Point, CompensatedSum>,
            right: BTreeMap<u32, CompensatedSum>,
        }
        let mut by_profile: BTreeMap<Vec<usize>, Acc> = BTreeMap::new();
        for (x, terms) in self.outputs.iter().enumerate() {
            for (m, c) in terms {
                let value = c.norm() * w.monomial_weight(m, Some(x))?;
                let prof = poly::profile(m, self.arity, n);
                let acc = by_profile.entry(prof.clone()).or_insert_with(|| Acc {
                    left: BTreeMap::new(),
                    right: BTreeMap::new(),
                });
                acc.left.entry(x).or_default().add(value);
                for (v, mult) in poly::var_runs(m) {
                    let slot_deg = prof[poly::slot_of(v, n)];
                    acc.right.entry(v).or_default().add(value * mult as f64 / slot_deg as f64);
                }
            }
        }
        Ok(by_profile
            .into_iter()
            .map(|(profile, acc)| ProfileNorm {
                profile,
                left: acc.left.values().map(CompensatedSum::value).fold(0.0, f64::max),
                right: acc.right.values().map(CompensatedSum::value).fold(0.0, f64::max),
            })
            .collect())
    }

    /// `⦀A⦀_w = Σ_profiles max{L, R}`.
    pub fn kernel_norm(&self, w: &WeightSystem) -> Result<f64> {
        let detail = self.kernel_norm_detail(w)?;
        Ok(detail.iter().map(ProfileNorm::value).collect::<CompensatedSum>().value())
    }

    /// `⦀A⦀′_w`: profile norms weighted by their total gamma degree.
    pub fn primed_norm(&self, w: &WeightSystem) -> Result<f64> {
        if self.gamma_slots == 0 {
            return Err(Error::NoGammaSlots);
        }
        let first_gamma = self.alpha_slots();
        let detail = self.kernel_norm_detail(w)?;
        Ok(detail
            .iter()
            .map(|p| p.profile[first_gamma..].iter().sum::<usize>() as f64 * p.value())
            .collect::<CompensatedSum>()
            .value())
    }

    pub fn evaluate_map(&self, fields: &[FieldVector]) -> Result<FieldVector> {
        let slices = field_slices(fields, self.arity, self.points)?;
        Ok(FieldVector(self.outputs.iter().map(|t| poly::evaluate(t, &slices, self.points)).collect()))
    }

    /// Checks `‖A(α⃗)‖_p ≤ ⦀A⦀_w Π (‖α_j‖_{p_j}/κ_j)^{d_j}` where
    /// `Σ d_j/p_j = 1/p`.
    pub fn lp_norm_bound_check(&self, w: &WeightSystem, degrees: &[usize], p: f64, exponents: &[f64], fields: &[FieldVector]) -> Result<BoundCheck> {
        self.check_weights(w)?;
        if degrees.len() != self.arity || exponents.len() != self.arity {
            return Err(Error::arity(self.arity, degrees.len().min(exponents.len())));
        }
        let lhs_sum = reciprocal_sum(
            &degrees
                .iter()
                .zip(exponents)
                .filter(|(d, _)| **d > 0)
                .map(|(d, q)| q / *d as f64)
                .collect::<Vec<_>>(),
        );
        let target = reciprocal_sum(&[p]);
        if (lhs_sum - target).abs() > 1e-12 {
            return Err(Error::ExponentMismatch(format!("Σ d_j/p_j = {lhs_sum}, expected 1/p = {target}")));
        }
        for (slot, &d) in degrees.iter().enumerate() {
            let below = self
                .outputs
                .iter()
                .flat_map(|t| t.keys())
                .any(|m| m.iter().filter(|&&v| poly::slot_of(v, self.points) == slot).count() < d);
            if below {
                return Err(Error::DegreeMismatch(format!("kernel has degree below {d} in slot {slot}")));
            }
        }
        let lhs = self.evaluate_map(fields)?.lp_norm(p);
        let within = fields.iter().zip(w.factors()).all(|(f, k)| f.sup_norm() <= *k);
        let mut rhs = self.kernel_norm(w)?;
        for ((f, k), (&d, &q)) in fields.iter().zip(w.factors()).zip(degrees.iter().zip(exponents)) {
            rhs *= (f.lp_norm(q) / k).powi(d as i32);
        }
        Ok(BoundCheck::conditional("young_map", lhs, rhs, within))
    }

    /// `max_x |A(α⃗)(x)| ≤ ⦀A⦀_w` for fields with `|α_j| ≤ κ_j`.
    pub fn sup_bound_check(&self, w: &WeightSystem, fields: &[FieldVector]) -> Result<BoundCheck> {
        let lhs = self.evaluate_map(fields)?.sup_norm();
        let within = fields.iter().zip(w.factors()).all(|(f, k)| f.sup_norm() <= *k);
        Ok(BoundCheck::conditional("sup_bound", lhs, self.kernel_norm(w)?, within))
    }

    /// `f_A(β; α⃗) = Σ_x β(x) A(α⃗)(x)`, with `β` as slot 0.
    pub fn to_function(&self) -> CoefficientSystem {
        let n = self.points;
        let mut terms = Terms::new();
        for (x, t) in self.outputs.iter().enumerate() {
            for (m, c) in t {
                let mut mono: Vec<u32> = m.iter().map(|&v| v + n as u32).collect();
                mono.insert(0, poly::var(0, x, n));
                poly::add_term(&mut terms, mono, *c);
            }
        }
        CoefficientSystem::from_terms(self.arity + 1, n, terms).with_truncated(self.truncated)
    }

    /// Keeps the pieces whose total gamma degree lies in `[dmin, dmax]`.
    pub fn restrict_degrees(&self, dmin: usize, dmax: Option<usize>) -> Result<Self> {
        if self.gamma_slots == 0 {
            return Err(Error::NoGammaSlots);
        }
        let outputs = self
            .outputs
            .iter()
            .map(|t| {
                t.iter()
                    .filter(|(m, _)| {
                        let g = self.gamma_degree(m);
                        g >= dmin && dmax.is_none_or(|d| g <= d)
                    })
                    .map(|(m, c)| (m.clone(), *c))
                    .collect()
            })
            .collect();
        Ok(Self::from_outputs(self.points, self.arity, self.gamma_slots, outputs, self.truncated))
    }

    /// The decomposition `B = Σ B_{n_{s+1},…,n_{s+r}}` by gamma profile.
    pub fn gamma_pieces(&self) -> Result<BTreeMap<Vec<usize>, FieldMapKernel>> {
        if self.gamma_slots == 0 {
            return Err(Error::NoGammaSlots);
        }
        let first_gamma = self.alpha_slots();
        let mut pieces: BTreeMap<Vec<usize>, Vec<Terms>> = BTreeMap::new();
        for (x, t) in self.outputs.iter().enumerate() {
            for (m, c) in t {
                let prof = poly::profile(m, self.arity, self.points)[first_gamma..].to_vec();
                let outs = pieces.entry(prof).or_insert_with(|| vec![Terms::new(); self.points]);
                outs[x].insert(m.clone(), *c);
            }
        }
        Ok(pieces
            .into_iter()
            .map(|(k, outs)| (k, Self::from_outputs(self.points, self.arity, self.gamma_slots, outs, self.truncated)))
            .collect())
    }

    /// Zero-extension from input set `X_1` and output set `X_2`: entries with
    /// an input point outside `X_1` or output point outside `X_2` are dropped.
    pub fn embed(&self, input_domain: &[Point], output_domain: &[Point]) -> Result<Self> {
        for &p in input_domain.iter().chain(output_domain) {
            if p >= self.points {
                return Err(Error::UnknownPoint { point: p, size: self.points });
            }
        }
        let inputs: BTreeSet<Point> = input_domain.iter().copied().collect();
        let outputs_set: BTreeSet<Point> = output_domain.iter().copied().collect();
        let n = self.points;
        let outputs = self
            .outputs
            .iter()
            .enumerate()
            .map(|(x, t)| {
                if !outputs_set.contains(&x) {
                    return Terms::new();
                }
                t.iter()
                    .filter(|(m, _)| m.iter().all(|&v| inputs.contains(&poly::point_of(v, n))))
                    .map(|(m, c)| (m.clone(), *c))
                    .collect()
            })
            .collect();
        Ok(Self::from_outputs(n, self.arity, self.gamma_slots, outputs, self.truncated))
    }

    /// `a·A + b·B`.
    pub fn combine(a: &Self, b: &Self, sa: Complex64, sb: Complex64) -> Result<Self> {
        if a.arity != b.arity {
            return Err(Error::arity(a.arity, b.arity));
        }
        if a.points != b.points {
            return Err(Error::DimensionMismatch {
                expected: a.points,
                found: b.points,
            });
        }
        let outputs = a
            .outputs
            .iter()
            .zip(&b.outputs)
            .map(|(ta, tb)| {
                let mut t = Terms::new();
                poly::add_scaled(&mut t, ta, sa);
                poly::add_scaled(&mut t, tb, sb);
                poly::drop_zeros(&mut t);
                t
            })
            .collect();
        Ok(Self::from_outputs(a.points, a.arity, a.gamma_slots, outputs, a.truncated || b.truncated))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::combine(self, other, Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::combine(self, other, Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let outputs = self
            .outputs
            .iter()
            .map(|t| {
                let mut o = Terms::new();
                poly::add_scaled(&mut o, t, c);
                o
            })
            .collect();
        Self::from_outputs(self.points, self.arity, self.gamma_slots, outputs, self.truncated)
    }

    /// `(S A)(α⃗)(x) = Σ_y S(x, y) A(α⃗)(y)`.
    pub fn apply_operator(&self, s: &ComplexMatrix) -> Result<Self> {
        if s.nrows() != self.points || s.ncols() != self.points {
            return Err(Error::DimensionMismatch {
                expected: self.points,
                found: s.nrows(),
            });
        }
        let outputs = (0..self.points)
            .map(|x| {
                let mut t = Terms::new();
                for (y, ty) in self.outputs.iter().enumerate() {
                    let sxy = s[(x, y)];
                    if sxy != Complex64::default() {
                        poly::add_scaled(&mut t, ty, sxy);
                    }
                }
                poly::drop_zeros(&mut t);
                t
            })
            .collect();
        Ok(Self::from_outputs(self.points, self.arity, self.gamma_slots, outputs, self.truncated))
    }

    /// Drops entries above the degree caps.
    pub fn truncate(&self, trunc: &Truncation) -> Self {
        let mut outputs = self.outputs.clone();
        let mut dropped = false;
        for t in &mut outputs {
            dropped |= poly::truncate(t, self.points, trunc);
        }
        Self::from_outputs(self.points, self.arity, self.gamma_slots, outputs, self.truncated || dropped)
    }

    /// Re-embeds an `s`-slot kernel into `arity` slots, placing its slot `j`
    /// at `placement[j]`.
    pub fn relabel_slots(&self, arity: usize, gamma_slots: usize, placement: &[usize]) -> Result<Self> {
        if placement.len() != self.arity {
            return Err(Error::arity(self.arity, placement.len()));
        }
        if placement.iter().any(|&p| p >= arity) {
            return Err(Error::arity(arity, placement.iter().max().copied().unwrap_or(0) + 1));
        }
        let n = self.points;
        let outputs = self
            .outputs
            .iter()
            .map(|t| {
                let mut o = Terms::new();
                for (m, c) in t {
                    let mut mm: Vec<u32> = m.iter().map(|&v| poly::var(placement[poly::slot_of(v, n)], poly::point_of(v, n), n)).collect();
                    mm.sort_unstable();
                    poly::add_term(&mut o, mm, *c);
                }
                o
            })
            .collect();
        Ok(Self::from_outputs(n, arity, gamma_slots, outputs, self.truncated))
    }

    /// Weight system `ŵ` for `f_A`: factor one for `β` followed by `w`.
    pub fn hat_system(w: &WeightSystem) -> Result<WeightSystem> {
        let mut factors = vec![1.0];
        factors.extend_from_slice(w.factors());
        w.with_factors(factors)
    }
}

/// `‖S‖ = max{ sup_y Σ_x |S(x,y)| e^{m d(x,y)}, sup_x Σ_y |S(x,y)| e^{m d(x,y)} }`.
pub fn weighted_op_norm(s: &ComplexMatrix, space: &crate::metric_space::MetricSpace, mass: f64) -> Result<f64> {
    let n = space.len();
    if s.nrows() != n || s.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if s.nrows() != n { s.nrows() } else { s.ncols() },
        });
    }
    let mut best = 0.0_f64;
    for fixed in 0..n {
        let mut col = CompensatedSum::new();
        let mut row = CompensatedSum::new();
        for other in 0..n {
            let e = (mass * space.distance(fixed, other)?).exp();
            col.add(s[(other, fixed)].norm() * e);
            row.add(s[(fixed, other)].norm() * e);
        }
        best = best.max(col.value()).max(row.value());
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::E;
    use std::sync::Arc;

    use super::*;
    use crate::metric_space::MetricSpace;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn w(points: usize, factors: Vec<f64>) -> WeightSystem {
        WeightSystem::new(Arc::new(MetricSpace::line(points, 1.0).unwrap()), factors).unwrap()
    }

    fn swap() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
    }

    #[test]
    fn identity_norm_and_evaluation() {
        let id = FieldMapKernel::identity(3, 1, 0);
        assert_eq!(id.kernel_norm(&w(3, vec![1.0])).unwrap(), 1.0);
        let alpha = FieldVector::from_real(&[1.0, -2.0, 0.5]);
        assert_eq!(id.evaluate_map(std::slice::from_ref(&alpha)).unwrap(), alpha);
        assert_eq!(id.evaluate_map(&[FieldVector::zeros(3)]).unwrap(), FieldVector::zeros(3));
    }

    #[test]
    fn linear_operator_norms() {
        let s = ComplexMatrix::identity(3, 3);
        let k = FieldMapKernel::from_linear_operator(&s).unwrap();
        assert_eq!(k.kernel_norm(&w(3, vec![5.0])).unwrap(), 5.0);

        let k = FieldMapKernel::from_linear_operator(&swap()).unwrap();
        assert!((k.kernel_norm(&w(2, vec![2.0])).unwrap() - 2.0 * E).abs() < 1e-14);

        let k = FieldMapKernel::from_linear_operator(&ComplexMatrix::zeros(2, 2)).unwrap();
        assert!(k.is_zero());
        assert_eq!(k.kernel_norm(&w(2, vec![1.0])).unwrap(), 0.0);

        let bad = ComplexMatrix::zeros(2, 3);
        assert!(matches!(FieldMapKernel::from_linear_operator(&bad), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn linear_operator_matches_weighted_op_norm() {
        let space = MetricSpace::line(3, 0.7).unwrap();
        let s = ComplexMatrix::from_fn(3, 3, |i, j| Complex64::new((i + 2 * j) as f64 * 0.1, 0.05 * i as f64));
        let k = FieldMapKernel::from_linear_operator(&s).unwrap();
        let kappa = 1.7;
        let ws = WeightSystem::new(Arc::new(space.clone()), vec![kappa]).unwrap();
        let lhs = k.kernel_norm(&ws).unwrap();
        let rhs = kappa * weighted_op_norm(&s, &space, 1.0).unwrap();
        assert!((lhs - rhs).abs() < 1e-13 * rhs);
    }

    #[test]
    fn weighted_op_norm_examples() {
        let space = MetricSpace::line(2, 1.0).unwrap();
        assert_eq!(weighted_op_norm(&ComplexMatrix::identity(2, 2), &space, 3.0).unwrap(), 1.0);
        assert!((weighted_op_norm(&swap(), &space, 1.0).unwrap() - E).abs() < 1e-15);
        let diag = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(2.0), c(3.0)]));
        assert_eq!(weighted_op_norm(&diag, &space, 1.0).unwrap(), 3.0);
    }

    #[test]
    fn constant_term_rejected() {
        let r = FieldMapKernel::from_entries(1, 1, 0, &[(0, MultiTuple::empty(1), c(1.0))]);
        assert!(matches!(r, Err(Error::Structure(_))));
    }

    #[test]
    fn truncated_exponential_norms() {
        let b = FieldMapKernel::truncated_exponential(1, 2, 1.0, 20);
        let ws = w(1, vec![1.0]);
        assert!((b.kernel_norm(&ws).unwrap() - (E - 2.0)).abs() < 1e-12);
        assert!((b.primed_norm(&ws).unwrap() - (E - 1.0)).abs() < 1e-12);
        let third = b.restrict_degrees(3, Some(3)).unwrap();
        assert!((third.kernel_norm(&ws).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        assert!(b.restrict_degrees(4, Some(3)).unwrap().is_zero());
        assert_eq!(b.restrict_degrees(0, None).unwrap(), b);
    }

    #[test]
    fn primed_norm_requires_gamma_slots() {
        let id = FieldMapKernel::identity(2, 1, 0);
        assert!(matches!(id.primed_norm(&w(2, vec![1.0])), Err(Error::NoGammaSlots)));
        assert!(matches!(id.restrict_degrees(0, None), Err(Error::NoGammaSlots)));
        let lin = id.with_gamma_slots(1).unwrap();
        let ws = w(2, vec![0.3]);
        assert_eq!(lin.primed_norm(&ws).unwrap(), lin.kernel_norm(&ws).unwrap());
    }

    #[test]
    fn function_bridge_identity() {
        let id = FieldMapKernel::identity(2, 1, 0);
        let f = id.to_function();
        assert_eq!(f.arity(), 2);
        let ws = w(2, vec![1.0]);
        assert_eq!(f.norm(&FieldMapKernel::hat_system(&ws).unwrap()).unwrap(), 1.0);
        assert!(FieldMapKernel::zero(2, 1, 0).to_function().is_zero());
    }

    #[test]
    fn embed_projects() {
        let id = FieldMapKernel::identity(2, 1, 0);
        assert_eq!(id.embed(&[0, 1], &[0, 1]).unwrap(), id);
        let p = id.embed(&[0, 1], &[0]).unwrap();
        let out = p.evaluate_map(&[FieldVector::from_real(&[3.0, 4.0])]).unwrap();
        assert_eq!(out, FieldVector::from_real(&[3.0, 0.0]));
        assert!(matches!(id.embed(&[5], &[0]), Err(Error::UnknownPoint { .. })));
    }

    #[test]
    fn lp_bound_identity_sup_case() {
        let id = FieldMapKernel::identity(3, 1, 0);
        let ws = w(3, vec![2.0]);
        let alpha = [FieldVector::from_real(&[0.5, -1.5, 1.0])];
        let chk = id.lp_norm_bound_check(&ws, &[1], f64::INFINITY, &[f64::INFINITY], &alpha).unwrap();
        assert!(chk.holds());
        assert!((chk.lhs - 1.5).abs() < 1e-15 && (chk.rhs - 1.5).abs() < 1e-15);
        assert!(matches!(
            id.lp_norm_bound_check(&ws, &[1], 1.0, &[2.0], &alpha),
            Err(Error::ExponentMismatch(_))
        ));
        let zero = [FieldVector::zeros(3)];
        let chk = id.lp_norm_bound_check(&ws, &[1], 2.0, &[2.0], &zero).unwrap();
        assert_eq!(chk.lhs, 0.0);
        assert!(chk.holds());
    }
}
