//! The generalized Young inequality for kernels on products of finite
//! measure spaces:
//! `|∫ K Π f_ℓ dμ_ℓ| ≤ ‖K‖_{L¹–L^∞} Π ‖f_ℓ‖_{L^{p_ℓ}(dμ_ℓ)}` when `Σ 1/p_ℓ = 1`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{reciprocal_sum, CompensatedSum};
use crate::verdict::BoundCheck;

/// A complex kernel on `Π_ℓ (X_ℓ, μ_ℓ)`, stored densely in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteKernel {
    measures: Vec<Vec<f64>>,
    values: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YoungReport {
    pub kernel_norm: f64,
    pub check: BoundCheck,
}

impl DiscreteKernel {
    pub fn new(measures: Vec<Vec<f64>>, values: Vec<Complex64>) -> Result<Self> {
        if measures.is_empty() {
            return Err(Error::AxisMismatch("kernel needs at least one axis".into()));
        }
        for (axis, mu) in measures.iter().enumerate() {
            if mu.is_empty() {
                return Err(Error::AxisMismatch(format!("axis {axis} is empty")));
            }
            if let Some(bad) = mu.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
                return Err(Error::AxisMismatch(format!("axis {axis} has non-positive measure {bad}")));
            }
        }
        let size: usize = measures.iter().map(Vec::len).product();
        if values.len() != size {
            return Err(Error::DimensionMismatch {
                expected: size,
                found: values.len(),
            });
        }
        Ok(DiscreteKernel { measures, values })
    }

    /// Kernel with counting measure on every axis.
    pub fn counting(shape: &[usize], values: Vec<Complex64>) -> Result<Self> {
        Self::new(shape.iter().map(|&n| vec![1.0; n]).collect(), values)
    }

    pub fn axes(&self) -> usize {
        self.measures.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.measures.iter().map(Vec::len).collect()
    }

    pub fn measures(&self) -> &[Vec<f64>] {
        &self.measures
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    fn index_iter(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let shape = self.shape();
        let total = self.values.len();
        (0..total).map(move |mut flat| {
            let mut idx = vec![0; shape.len()];
            for axis in (0..shape.len()).rev() {
                idx[axis] = flat % shape[axis];
                flat /= shape[axis];
            }
            idx
        })
    }

    /// `max_ℓ max_{x_ℓ} Σ_{x_k, k≠ℓ} |K| Π_{k≠ℓ} μ_k(x_k)`.
    pub fn l1_linf_norm(&self) -> f64 {
        let mut sums: Vec<Vec<CompensatedSum>> = self.measures.iter().map(|mu| vec![CompensatedSum::new(); mu.len()]).collect();
        for (idx, k) in self.index_iter().zip(&self.values) {
            let full: f64 = idx.iter().zip(&self.measures).map(|(&i, mu)| mu[i]).product();
            for (axis, &i) in idx.iter().enumerate() {
                sums[axis][i].add(k.norm() * full / self.measures[axis][i]);
            }
        }
        sums.iter().flatten().map(CompensatedSum::value).fold(0.0, f64::max)
    }

    /// `∫ K Π f_ℓ dμ_ℓ`.
    pub fn pairing(&self, functions: &[Vec<Complex64>]) -> Result<Complex64> {
        self.check_functions(functions)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (idx, k) in self.index_iter().zip(&self.values) {
            let mut term = *k;
            for ((&i, mu), f) in idx.iter().zip(&self.measures).zip(functions) {
                term *= f[i] * mu[i];
            }
            acc += term;
        }
        Ok(acc)
    }

    fn check_functions(&self, functions: &[Vec<Complex64>]) -> Result<()> {
        if functions.len() != self.axes() {
            return Err(Error::AxisMismatch(format!("{} functions for {} axes", functions.len(), self.axes())));
        }
        for (axis, (f, mu)) in functions.iter().zip(&self.measures).enumerate() {
            if f.len() != mu.len() {
                return Err(Error::AxisMismatch(format!(
                    "function {axis} has {} values, axis has {} points",
                    f.len(),
                    mu.len()
                )));
            }
        }
        Ok(())
    }
}

/// `‖f‖_{L^p(dμ)}`.
pub fn measure_lp_norm(f: &[Complex64], mu: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return f.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    let s: CompensatedSum = f.iter().zip(mu).map(|(z, m)| z.norm().powf(p) * m).collect();
    s.value().powf(1.0 / p)
}

pub fn generalized_young(k: &DiscreteKernel, functions: &[Vec<Complex64>], exponents: &[f64]) -> Result<YoungReport> {
    k.check_functions(functions)?;
    if exponents.len() != k.axes() {
        return Err(Error::AxisMismatch(format!("{} exponents for {} axes", exponents.len(), k.axes())));
    }
    if exponents.iter().any(|p| p.is_nan() || *p < 1.0) {
        return Err(Error::ExponentMismatch("exponents must lie in [1, ∞]".into()));
    }
    let sum = reciprocal_sum(exponents);
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::ExponentMismatch(format!("Σ 1/p_ℓ = {sum}, expected 1")));
    }
    let lhs = k.pairing(functions)?.norm();
    let kernel_norm = k.l1_linf_norm();
    let mut rhs = kernel_norm;
    for ((f, mu), p) in functions.iter().zip(k.measures()).zip(exponents) {
        rhs *= measure_lp_norm(f, mu, *p);
    }
    Ok(YoungReport {
        kernel_norm,
        check: BoundCheck::new("generalized_young", lhs, rhs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    #[test]
    fn single_axis_equality() {
        let k = DiscreteKernel::counting(&[3], vec![c(2.0); 3]).unwrap();
        let f = vec![c(1.0), c(0.5), c(3.0)];
        let rep = generalized_young(&k, &[f], &[1.0]).unwrap();
        assert_eq!(rep.kernel_norm, 2.0);
        assert!((rep.check.lhs - rep.check.rhs).abs() < 1e-15);
    }

    #[test]
    fn cauchy_schwarz_diagonal() {
        let mut vals = vec![c(0.0); 9];
        for i in 0..3 {
            vals[i * 3 + i] = c(1.0);
        }
        let k = DiscreteKernel::counting(&[3, 3], vals).unwrap();
        assert_eq!(k.l1_linf_norm(), 1.0);
        let f = vec![c(1.0), c(-2.0), c(0.5)];
        let rep = generalized_young(&k, &[f.clone(), f], &[2.0, 2.0]).unwrap();
        assert!(rep.check.holds());
        assert!((rep.check.lhs - 5.25).abs() < 1e-14);
        assert!((rep.check.lhs - rep.check.rhs).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let k = DiscreteKernel::counting(&[2], vec![c(1.0); 2]).unwrap();
        assert!(matches!(generalized_young(&k, &[vec![c(1.0); 2]], &[2.0]), Err(Error::ExponentMismatch(_))));
        assert!(matches!(generalized_young(&k, &[vec![c(1.0); 3]], &[1.0]), Err(Error::AxisMismatch(_))));
        assert!(DiscreteKernel::new(vec![vec![1.0, 0.0]], vec![c(1.0); 2]).is_err());
    }
}
