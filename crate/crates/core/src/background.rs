//! Background fields: solutions `φ⃗(α⃗)` of
//! `S_1⁻¹φ_1 + 𝒲_1(φ_1, φ_2) = α_1`, `S_2⁻¹φ_2 + 𝒲_2(φ_1, φ_2) = α_2`
//! with `𝒲_j(φ_1,φ_2)(x) = Σ_{y,z} W_j(x,y,z) φ_1(y) φ_2(z)`.
//!
//! Writing `φ_j = S_j(α_j + γ_j)` turns the equations into an implicit system
//! for `γ⃗`, solved with weights `κ_j = λ_j = w_f` and contraction `½`. All
//! norms use the mass-scaled metric `m·d`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::calculus::{substitute_slots, SlotInput};
use crate::error::{Error, Result};
use crate::field_maps::{weighted_op_norm, ComplexMatrix, FieldMapKernel};
use crate::metric_space::{MetricSpace, Point};
use crate::poly::Truncation;
use crate::sampling;
use crate::series_algebra::MultiTuple;
use crate::solver::{solve_fixed_point, solve_from, FieldMapTuple, ImplicitSystem, SolveCertificate, SolveOptions};
use crate::verdict::{BoundCheck, DEFAULT_REL_SLACK};
use crate::weights::WeightSystem;

pub const BACKGROUND_CONTRACTION: f64 = 0.5;

/// One nonzero entry `W(x, y, z)`.
pub type TripleEntry = (Point, Point, Point, Complex64);

#[derive(Debug, Clone)]
pub struct BackgroundInstance {
    space: Arc<MetricSpace>,
    scaled: Arc<MetricSpace>,
    pub mass: f64,
    pub w1: Vec<TripleEntry>,
    pub w2: Vec<TripleEntry>,
    pub s1: ComplexMatrix,
    pub s2: ComplexMatrix,
    pub w_f: f64,
    pub k: f64,
    s_inv: [ComplexMatrix; 2],
    condition: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BackgroundConstants {
    /// `S̄ = max_j ‖S_j‖_m`
    pub s_bar: f64,
    /// `W̄ = max_j ‖W_j‖_m`
    pub w_bar: f64,
    /// `S̄²W̄w_f`
    pub coupling: f64,
    /// `min{1/12, 1/(2K)}`
    pub threshold: f64,
    pub hypothesis_holds: bool,
    pub condition_numbers: [f64; 2],
}

#[allow(clippy::too_many_arguments)]
impl BackgroundInstance {
    pub fn new(
        space: MetricSpace,
        mass: f64,
        w1: Vec<TripleEntry>,
        w2: Vec<TripleEntry>,
        s1: ComplexMatrix,
        s2: ComplexMatrix,
        w_f: f64,
        k: f64,
    ) -> Result<Self> {
        let n = space.len();
        for (name, v) in [("mass", mass), ("w_f", w_f), ("K", k)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Structure(format!("{name} must be positive, got {v}")));
            }
        }
        for entries in [&w1, &w2] {
            for &(x, y, z, _) in entries.iter() {
                for p in [x, y, z] {
                    space.check_point(p)?;
                }
            }
        }
        let mut s_inv = Vec::new();
        let mut condition = Vec::new();
        for (name, s) in [("S1", &s1), ("S2", &s2)] {
            if s.nrows() != n || s.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: if s.nrows() != n { s.nrows() } else { s.ncols() },
                });
            }
            let sv = s.clone().svd(false, false).singular_values;
            let (max, min) = sv.iter().fold((0.0_f64, f64::INFINITY), |(a, b), &v| (a.max(v), b.min(v)));
            let cond = max / min;
            let inv = s.clone().try_inverse();
            match inv {
                Some(inv) if cond.is_finite() && cond < 1e14 => {
                    s_inv.push(inv);
                    condition.push(cond);
                }
                _ => return Err(Error::SingularOperator { name: name.into() }),
            }
        }
        let scaled = Arc::new(space.scaled(mass)?);
        Ok(BackgroundInstance {
            space: Arc::new(space),
            scaled,
            mass,
            w1,
            w2,
            s1,
            s2,
            w_f,
            k,
            s_inv: [s_inv[0].clone(), s_inv[1].clone()],
            condition: [condition[0], condition[1]],
        })
    }

    pub fn space(&self) -> &Arc<MetricSpace> {
        &self.space
    }

    /// The metric `m·d` used in every norm.
    pub fn scaled_space(&self) -> &Arc<MetricSpace> {
        &self.scaled
    }

    pub fn points(&self) -> usize {
        self.space.len()
    }

    pub fn s(&self, j: usize) -> &ComplexMatrix {
        if j == 0 {
            &self.s1
        } else {
            &self.s2
        }
    }

    pub fn s_inverse(&self, j: usize) -> &ComplexMatrix {
        &self.s_inv[j]
    }

    fn w_entries(&self, j: usize) -> &[TripleEntry] {
        if j == 0 {
            &self.w1
        } else {
            &self.w2
        }
    }

    /// `𝒲_j` as a two-field map.
    pub fn bilinear_map(&self, j: usize) -> FieldMapKernel {
        let entries: Vec<(Point, MultiTuple, Complex64)> = self
            .w_entries(j)
            .iter()
            .map(|&(x, y, z, v)| (x, MultiTuple::new(vec![vec![y], vec![z]]), v))
            .collect();
        FieldMapKernel::from_entries(self.points(), 2, 0, &entries).expect("entries validated on construction")
    }

    /// `‖W_j‖_m`: kernel norm of `𝒲_j` with unit weight factors.
    pub fn w_norm(&self, j: usize) -> Result<f64> {
        self.bilinear_map(j).kernel_norm(&WeightSystem::new(self.scaled.clone(), vec![1.0, 1.0])?)
    }

    pub fn s_norm(&self, j: usize) -> Result<f64> {
        weighted_op_norm(self.s(j), &self.space, self.mass)
    }

    pub fn constants(&self) -> Result<BackgroundConstants> {
        let s_bar = self.s_norm(0)?.max(self.s_norm(1)?);
        let w_bar = self.w_norm(0)?.max(self.w_norm(1)?);
        let coupling = s_bar * s_bar * w_bar * self.w_f;
        let threshold = (1.0_f64 / 12.0).min(1.0 / (2.0 * self.k));
        Ok(BackgroundConstants {
            s_bar,
            w_bar,
            coupling,
            threshold,
            hypothesis_holds: coupling < threshold,
            condition_numbers: self.condition,
        })
    }

    /// Weight system `w_f` on both `α` slots over the scaled metric.
    pub fn weights(&self) -> WeightSystem {
        WeightSystem::new(self.scaled.clone(), vec![self.w_f, self.w_f]).expect("w_f validated on construction")
    }
}

#[derive(Debug, Clone)]
pub struct BuiltSystem {
    pub system: ImplicitSystem,
    pub constants: BackgroundConstants,
    pub checks: Vec<BoundCheck>,
}

/// `𝒲_j(A_1, A_2)` for maps `A_1, A_2` with `arity` slots.
fn bilinear_of(inst: &BackgroundInstance, j: usize, a1: &FieldMapKernel, a2: &FieldMapKernel, arity: usize, trunc: &Truncation) -> FieldMapKernel {
    let inputs = [SlotInput::Map(a1), SlotInput::Map(a2)];
    substitute_slots(&inst.bilinear_map(j), &inputs, arity, trunc).0
}

pub fn build_system(inst: &BackgroundInstance) -> Result<BuiltSystem> {
    let trunc = Truncation::total(2);
    let minus = Complex64::new(-1.0, 0.0);
    let lin = |j: usize, arity: usize, slot: usize| FieldMapKernel::linear_in_slot(inst.s(j), arity, slot);
    let (s1a, s2a) = (lin(0, 2, 0)?, lin(1, 2, 1)?);
    let (s1a4, s2a4, s1g4, s2g4) = (lin(0, 4, 0)?, lin(1, 4, 1)?, lin(0, 4, 2)?, lin(1, 4, 3)?);
    let mut f = Vec::new();
    let mut l = Vec::new();
    let mut b = Vec::new();
    for j in 0..2 {
        f.push(bilinear_of(inst, j, &s1a, &s2a, 2, &trunc).scale(minus));
        let cross = bilinear_of(inst, j, &s1g4, &s2a4, 4, &trunc).add(&bilinear_of(inst, j, &s1a4, &s2g4, 4, &trunc))?;
        l.push(cross.scale(minus));
        b.push(bilinear_of(inst, j, &s1g4, &s2g4, 4, &trunc).scale(minus));
    }
    let wf = inst.w_f;
    let system = ImplicitSystem::new(inst.scaled.clone(), f, l, b, vec![wf, wf], vec![wf, wf], BACKGROUND_CONTRACTION)?;
    let constants = inst.constants()?;
    let s12 = inst.s_norm(0)? * inst.s_norm(1)?;
    let w = system.w();
    let wkl = system.w_kappa_lambda();
    let mut checks = Vec::new();
    for j in 0..2 {
        let base = s12 * inst.w_norm(j)?;
        checks.push(BoundCheck::new(format!("f_norm[{j}]"), system.f[j].kernel_norm(&w)?, base * wf * wf));
        checks.push(BoundCheck::new(format!("l_norm[{j}]"), system.l[j].kernel_norm(&wkl)?, base * 2.0 * wf * wf));
        checks.push(BoundCheck::new(format!("b_norm[{j}]"), system.b[j].kernel_norm(&wkl)?, base * wf * wf));
    }
    Ok(BuiltSystem { system, constants, checks })
}

#[derive(Debug, Clone, Serialize)]
pub struct BackgroundCertificate {
    pub constants: BackgroundConstants,
    pub build_checks: Vec<BoundCheck>,
    pub solve: SolveCertificate,
    pub phi_high_norms: Vec<f64>,
    pub residual_max: Vec<f64>,
    pub checks: Vec<BoundCheck>,
}

impl BackgroundCertificate {
    pub fn all_checks(&self) -> impl Iterator<Item = &BoundCheck> {
        self.build_checks.iter().chain(&self.solve.checks).chain(&self.checks)
    }
}

#[derive(Debug, Clone)]
pub struct BackgroundSolution {
    /// `Γ⃗` with `φ_j = S_j(α_j + Γ_j)`
    pub gamma: FieldMapTuple,
    /// `φ_j^{(≥2)} = S_j Γ_j`
    pub phi_high: Vec<FieldMapKernel>,
    pub certificate: BackgroundCertificate,
}

/// Residual tolerance for the original equations, coefficient-wise.
pub const RESIDUAL_TOL: f64 = 1e-10;

pub fn solve_background(inst: &BackgroundInstance, opts: &SolveOptions) -> Result<BackgroundSolution> {
    let built = build_system(inst)?;
    let (gamma, solve) = solve_fixed_point(&built.system, opts)?;
    let w = built.system.w();
    let c = &built.constants;
    let wf = inst.w_f;
    let mut phi_high = Vec::new();
    let mut norms = Vec::new();
    let mut checks = Vec::new();
    let hyp = c.hypothesis_holds;
    for j in 0..2 {
        let phi = gamma.entries[j].apply_operator(inst.s(j))?;
        let norm = phi.kernel_norm(&w)?;
        checks.push(BoundCheck::conditional(
            format!("phi_high_norm[{j}]"),
            norm,
            2.0 * c.s_bar.powi(3) * c.w_bar * wf * wf,
            hyp,
        ));
        let min_deg = phi.min_total_degree().unwrap_or(usize::MAX);
        checks.push(BoundCheck::new(format!("phi_high_degree[{j}]"), 2.0, min_deg as f64));
        let big_phi = FieldMapKernel::identity(inst.points(), 2, j).add(&gamma.entries[j])?;
        checks.push(BoundCheck::conditional(
            format!("big_phi_norm[{j}]"),
            big_phi.kernel_norm(&w)?,
            7.0 / 6.0 * wf,
            hyp,
        ));
        norms.push(norm);
        phi_high.push(phi);
    }
    let residual_max = original_residual(inst, &gamma, &opts.truncation)?;
    for (j, r) in residual_max.iter().enumerate() {
        checks.push(BoundCheck::with_slack(format!("original_residual[{j}]"), *r, RESIDUAL_TOL, 0.0));
    }
    Ok(BackgroundSolution {
        gamma,
        phi_high,
        certificate: BackgroundCertificate {
            constants: built.constants,
            build_checks: built.checks,
            solve,
            phi_high_norms: norms,
            residual_max,
            checks,
        },
    })
}

/// Largest coefficient of `S_j⁻¹φ_j + 𝒲_j(φ_1,φ_2) − α_j` up to the
/// truncation degree, with `φ_j = S_j(α_j + Γ_j)`.
pub fn original_residual(inst: &BackgroundInstance, gamma: &FieldMapTuple, trunc: &Truncation) -> Result<Vec<f64>> {
    let n = inst.points();
    let phis: Vec<FieldMapKernel> = (0..2)
        .map(|j| FieldMapKernel::linear_in_slot(inst.s(j), 2, j)?.add(&gamma.entries[j].apply_operator(inst.s(j))?))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for j in 0..2 {
        let lhs = phis[j]
            .apply_operator(inst.s_inverse(j))?
            .add(&bilinear_of(inst, j, &phis[0], &phis[1], 2, trunc))?
            .sub(&FieldMapKernel::identity(n, 2, j))?
            .truncate(trunc);
        out.push(lhs.max_abs_coefficient());
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    pub trials: usize,
    /// largest coefficient difference to the constructed solution, per trial
    pub max_differences: Vec<f64>,
    /// `2S̄²W̄w_f max{7/6, K}`
    pub contraction_constant: f64,
    pub checks: Vec<BoundCheck>,
}

pub const UNIQUENESS_TOL: f64 = 1e-9;

/// Restarts the solve from random tuples with `⦀α_j + Γ⁰_j⦀ ≤ K w_f` inside
/// the unit ball and compares with the solution from zero.
pub fn uniqueness_probe(inst: &BackgroundInstance, trials: usize, seed: u64, opts: &SolveOptions) -> Result<UniquenessReport> {
    let built = build_system(inst)?;
    let c = &built.constants;
    if !c.hypothesis_holds {
        return Err(Error::HypothesesFailed {
            reason: format!("S̄²W̄w_f = {} is not below {}", c.coupling, c.threshold),
            certificate: None,
        });
    }
    let (reference, _) = solve_fixed_point(&built.system, opts)?;
    let n = inst.points();
    let w = built.system.w();
    let wf = inst.w_f;
    let mut rng = sampling::rng(seed);
    let mut diffs = Vec::new();
    let mut checks = Vec::new();
    for trial in 0..trials {
        // Γ⁰_j = −t α_j + G_j with ⦀G_j⦀ = g w_f, degree of G at least two
        let t = sampling::unit_interval(&mut rng);
        let g_max = (1.0 - t).min(inst.k - (1.0 - t)).max(0.0);
        let g = g_max * sampling::unit_interval(&mut rng);
        let mut entries = Vec::new();
        for j in 0..2 {
            let raw = keep_min_degree(&sampling::kernel(&mut rng, n, 2, 0, 0, 0, 3, 4), 2);
            let norm = raw.kernel_norm(&w)?;
            let gj = sampling::rescale_kernel(&raw, norm, g * wf);
            let start = FieldMapKernel::identity(n, 2, j).scale(Complex64::new(-t, 0.0)).add(&gj)?;
            entries.push(start);
        }
        let initial = FieldMapTuple::new(entries, built.system.lambdas.clone())?;
        let admissible = initial.in_ball(&w, 1.0)?;
        let (sol, _) = solve_from(&built.system, initial, opts)?;
        let d = sol.sub(&reference)?.max_abs_coefficient();
        checks.push(BoundCheck::conditional(format!("restart[{trial}]"), d, UNIQUENESS_TOL, admissible));
        diffs.push(d);
    }
    let contraction_constant = 2.0 * c.s_bar * c.s_bar * c.w_bar * wf * (7.0_f64 / 6.0).max(inst.k);
    checks.push(BoundCheck::with_slack(
        "uniqueness_contraction",
        contraction_constant,
        1.0 - DEFAULT_REL_SLACK,
        0.0,
    ));
    Ok(UniquenessReport {
        trials,
        max_differences: diffs,
        contraction_constant,
        checks,
    })
}

fn keep_min_degree(k: &FieldMapKernel, min: usize) -> FieldMapKernel {
    let outputs = k
        .outputs()
        .iter()
        .map(|t| t.iter().filter(|(m, _)| m.len() >= min).map(|(m, c)| (m.clone(), *c)).collect())
        .collect();
    FieldMapKernel::from_outputs(k.points(), k.arity(), k.gamma_slots(), outputs, k.is_truncated())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn single_point(w: f64) -> BackgroundInstance {
        let one = ComplexMatrix::from_element(1, 1, c(1.0));
        BackgroundInstance::new(
            MetricSpace::line(1, 1.0).unwrap(),
            1.0,
            vec![(0, 0, 0, c(w))],
            vec![(0, 0, 0, c(w))],
            one.clone(),
            one,
            1.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn source_term_single_point() {
        let inst = single_point(0.01);
        let built = build_system(&inst).unwrap();
        let coeff = built.system.f[0].coefficient(0, &MultiTuple::new(vec![vec![0], vec![0]])).unwrap();
        assert!((coeff - c(-0.01)).norm() < 1e-16);
        assert!(built.checks.iter().all(BoundCheck::holds));
        assert!(built.constants.hypothesis_holds);
    }

    #[test]
    fn single_point_solution() {
        let inst = single_point(0.01);
        let sol = solve_background(&inst, &SolveOptions::default()).unwrap();
        let coeff = sol.phi_high[0].coefficient(0, &MultiTuple::new(vec![vec![0], vec![0]])).unwrap();
        assert!((coeff - c(-0.01)).norm() < 1e-15);
        let norm = sol.certificate.phi_high_norms[0];
        assert!(norm < 0.02 && norm > 0.01, "{norm}");
        assert!(sol.certificate.all_checks().all(BoundCheck::holds));
        let probe = uniqueness_probe(&inst, 10, 7, &SolveOptions::default()).unwrap();
        assert!((probe.contraction_constant - 0.02 * 7.0 / 6.0).abs() < 1e-15);
        assert!(probe.checks.iter().all(BoundCheck::holds), "{:?}", probe.checks);
        assert!(probe.max_differences.iter().all(|d| *d < 1e-12));
    }

    #[test]
    fn zero_interaction() {
        let one = ComplexMatrix::identity(2, 2);
        let inst = BackgroundInstance::new(MetricSpace::line(2, 1.0).unwrap(), 1.0, vec![], vec![], one.clone(), one, 0.5, 1.0).unwrap();
        let sol = solve_background(&inst, &SolveOptions::default()).unwrap();
        assert!(sol.phi_high.iter().all(FieldMapKernel::is_zero));
        let probe = uniqueness_probe(&inst, 3, 1, &SolveOptions::default()).unwrap();
        assert!(probe.max_differences.iter().all(|d| *d == 0.0 || *d < 1e-15));
    }

    #[test]
    fn singular_operator_rejected() {
        let z = ComplexMatrix::zeros(1, 1);
        let one = ComplexMatrix::identity(1, 1);
        let r = BackgroundInstance::new(MetricSpace::line(1, 1.0).unwrap(), 1.0, vec![], vec![], z, one, 1.0, 1.0);
        assert!(matches!(r, Err(Error::SingularOperator { .. })));
    }
}
