//! Pointwise products of field maps.

use crate::error::{Error, Result};
use crate::field_maps::FieldMapKernel;
use crate::poly::{self, Truncation};
use crate::verdict::{BoundCheck, Checked};
use crate::weights::WeightSystem;

/// `C(α⃗,γ⃗)(x) = A(α⃗,γ⃗)(x) B(α⃗,γ⃗)(x)`, with the Leibniz bound
/// `⦀C⦀′ ≤ ⦀A⦀′⦀B⦀ + ⦀A⦀⦀B⦀′` and `⦀C⦀ ≤ ⦀A⦀⦀B⦀` in `w_{κ,λ}`.
pub fn pointwise_product(a: &FieldMapKernel, b: &FieldMapKernel, w: &WeightSystem, trunc: &Truncation) -> Result<Checked<FieldMapKernel>> {
    if a.arity() != b.arity() || a.gamma_slots() != b.gamma_slots() {
        return Err(Error::arity(a.arity(), b.arity()));
    }
    if a.points() != b.points() {
        return Err(Error::DimensionMismatch {
            expected: a.points(),
            found: b.points(),
        });
    }
    let n = a.points();
    let mut truncated = a.is_truncated() || b.is_truncated();
    let outputs = a
        .outputs()
        .iter()
        .zip(b.outputs())
        .map(|(ta, tb)| poly::mul(ta, tb, n, trunc, &mut truncated))
        .collect();
    let value = FieldMapKernel::from_outputs(n, a.arity(), a.gamma_slots(), outputs, truncated);

    let (na, nb, nc) = (a.kernel_norm(w)?, b.kernel_norm(w)?, value.kernel_norm(w)?);
    let mut checks = vec![BoundCheck::new("submultiplicative", nc, na * nb)];
    if a.gamma_slots() > 0 {
        let (pa, pb, pc) = (a.primed_norm(w)?, b.primed_norm(w)?, value.primed_norm(w)?);
        checks.push(BoundCheck::new("leibniz", pc, pa * nb + na * pb));
    }
    Ok(Checked { value, checks, truncated })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use num_complex::Complex64;

    use super::*;
    use crate::metric_space::MetricSpace;
    use crate::series_algebra::FieldVector;

    fn ws(n: usize, factors: Vec<f64>) -> WeightSystem {
        WeightSystem::new(Arc::new(MetricSpace::line(n, 1.0).unwrap()), factors).unwrap()
    }

    #[test]
    fn square_of_identity_is_equality_case() {
        let lambda = 0.7;
        let g = FieldMapKernel::identity(1, 1, 0).with_gamma_slots(1).unwrap();
        let out = pointwise_product(&g, &g, &ws(1, vec![lambda]), &Truncation::default()).unwrap();
        let leibniz = out.check("leibniz").unwrap();
        assert!((leibniz.lhs - 2.0 * lambda * lambda).abs() < 1e-15);
        assert!((leibniz.rhs - 2.0 * lambda * lambda).abs() < 1e-15);
        assert!(out.all_hold());
    }

    #[test]
    fn degree_shifts_by_one() {
        let n = 2;
        let a = FieldMapKernel::truncated_exponential(n, 1, 0.5, 3);
        let g = FieldMapKernel::identity(n, 1, 0).with_gamma_slots(1).unwrap();
        let out = pointwise_product(&a, &g, &ws(n, vec![1.0]), &Truncation::total(10)).unwrap();
        assert_eq!(out.value.gamma_degree_range(), Some((2, 4)));
        let field = FieldVector::from_real(&[0.3, -0.2]);
        let lhs = out.value.evaluate_map(std::slice::from_ref(&field)).unwrap();
        let fa = a.evaluate_map(std::slice::from_ref(&field)).unwrap();
        for x in 0..n {
            let expect: Complex64 = fa.0[x] * field.0[x];
            assert!((lhs.0[x] - expect).norm() < 1e-15);
        }
        assert!(out.all_hold());
    }
}
