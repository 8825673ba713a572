//! Weight systems: a metric plus one constant weight factor per field slot.
//!
//! The weight of a tuple `(x⃗_1, …, x⃗_s)` is `Π κ_j^{n(x⃗_j)} · e^{τ_d(support)}`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::metric_space::{MetricSpace, Point};
use crate::series_algebra::MultiTuple;

/// Number of points in each field slot of a tuple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DegreeProfile(pub Vec<usize>);

impl DegreeProfile {
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn degrees(&self) -> &[usize] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for DegreeProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Debug, Clone)]
pub struct WeightSystem {
    space: Arc<MetricSpace>,
    factors: Vec<f64>,
}

impl WeightSystem {
    pub fn new(space: Arc<MetricSpace>, factors: Vec<f64>) -> Result<Self> {
        for (slot, &value) in factors.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidWeight { slot, value });
            }
        }
        Ok(WeightSystem { space, factors })
    }

    pub fn space(&self) -> &Arc<MetricSpace> {
        &self.space
    }

    pub fn factors(&self) -> &[f64] {
        &self.factors
    }

    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    pub fn points(&self) -> usize {
        self.space.len()
    }

    pub(crate) fn expect_arity(&self, arity: usize) -> Result<()> {
        if self.arity() == arity {
            Ok(())
        } else {
            Err(Error::arity(arity, self.arity()))
        }
    }

    /// `Π κ_j^{n_j} · e^{τ_d(support ∪ {extra})}`.
    pub fn weight_of(&self, tuple: &MultiTuple, extra_point: Option<Point>) -> Result<f64> {
        self.expect_arity(tuple.arity())?;
        let mut support: Vec<Point> = tuple.slots().iter().flatten().copied().collect();
        support.extend(extra_point);
        for &p in &support {
            self.space.check_point(p)?;
        }
        support.sort_unstable();
        support.dedup();
        let tau = self.space.tree_length_of_set(&support)?;
        let factor: f64 = tuple.slots().iter().zip(&self.factors).map(|(slot, k)| k.powi(slot.len() as i32)).product();
        Ok(factor * tau.exp())
    }

    /// Weight of a flat monomial (sorted variable ids `slot * |X| + point`).
    pub(crate) fn monomial_weight(&self, mono: &[u32], extra_point: Option<Point>) -> Result<f64> {
        let n = self.points();
        let mut factor = 1.0;
        let mut support: Vec<Point> = Vec::with_capacity(mono.len() + 1);
        for &v in mono {
            let v = v as usize;
            factor *= self.factors[v / n];
            support.push(v % n);
        }
        support.extend(extra_point);
        support.sort_unstable();
        support.dedup();
        Ok(factor * self.space.tree_length_of_set(&support)?.exp())
    }

    /// `w_σ`: factors `κ_j + σ λ_j`.
    pub fn shifted_system(&self, deltas: &[f64], sigma: f64) -> Result<Self> {
        if deltas.len() != self.arity() {
            return Err(Error::arity(self.arity(), deltas.len()));
        }
        if !(sigma >= 1.0 && sigma.is_finite()) {
            return Err(Error::InvalidWeight { slot: 0, value: sigma });
        }
        let factors = self.factors.iter().zip(deltas).map(|(k, l)| k + sigma * l).collect();
        Self::new(self.space.clone(), factors)
    }

    /// `w_δ`: the κ's for the original slots followed by the λ's for the
    /// difference slots.
    pub fn split_system(&self, deltas: &[f64]) -> Result<Self> {
        if deltas.len() != self.arity() {
            return Err(Error::arity(self.arity(), deltas.len()));
        }
        self.extended(deltas)
    }

    /// Appends slots with the given factors (e.g. `w_{κ,λ}` from `w_κ`, or
    /// the `β` slot of factor one).
    pub fn extended(&self, extra: &[f64]) -> Result<Self> {
        let mut factors = self.factors.clone();
        factors.extend_from_slice(extra);
        Self::new(self.space.clone(), factors)
    }

    /// Same metric, different factors.
    pub fn with_factors(&self, factors: Vec<f64>) -> Result<Self> {
        Self::new(self.space.clone(), factors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> Arc<MetricSpace> {
        Arc::new(MetricSpace::line(n, 1.0).unwrap())
    }

    #[test]
    fn weight_examples() {
        let w = WeightSystem::new(line(2), vec![]).unwrap();
        assert_eq!(w.weight_of(&MultiTuple::new(vec![]), None).unwrap(), 1.0);

        let w = WeightSystem::new(line(2), vec![2.0]).unwrap();
        assert_eq!(w.weight_of(&MultiTuple::new(vec![vec![0, 0]]), None).unwrap(), 4.0);

        let w = WeightSystem::new(line(2), vec![1.0]).unwrap();
        let v = w.weight_of(&MultiTuple::new(vec![vec![0, 1]]), None).unwrap();
        assert!((v - std::f64::consts::E).abs() < 1e-15);
        // the extra point enters the tree
        let v = w.weight_of(&MultiTuple::new(vec![vec![0]]), Some(1)).unwrap();
        assert!((v - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn derived_systems() {
        let w = WeightSystem::new(line(1), vec![1.0]).unwrap();
        assert_eq!(w.shifted_system(&[0.0], 1.0).unwrap().factors(), &[1.0]);
        let w = WeightSystem::new(line(1), vec![1.0, 2.0]).unwrap();
        assert_eq!(w.shifted_system(&[0.5, 0.5], 2.0).unwrap().factors(), &[2.0, 3.0]);
        let w = WeightSystem::new(line(1), vec![1.0]).unwrap();
        assert_eq!(w.split_system(&[0.5]).unwrap().factors(), &[1.0, 0.5]);
    }

    #[test]
    fn invalid_inputs() {
        assert!(matches!(WeightSystem::new(line(1), vec![1.0, 0.0]), Err(Error::InvalidWeight { slot: 1, .. })));
        let w = WeightSystem::new(line(1), vec![1.0]).unwrap();
        assert!(matches!(w.shifted_system(&[1.0, 1.0], 1.0), Err(Error::ArityMismatch { .. })));
        assert!(w.shifted_system(&[1.0], 0.5).is_err());
        assert!(matches!(
            w.weight_of(&MultiTuple::new(vec![vec![0], vec![0]]), None),
            Err(Error::ArityMismatch { .. })
        ));
    }
}
