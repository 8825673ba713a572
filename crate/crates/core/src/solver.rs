//! Fixed points of implicit systems `γ_j = f_j(α⃗) + L_j(α⃗,γ⃗) + B_j(α⃗,γ⃗)`
//! in the unit ball of `r`-tuples of `s`-field maps, by Picard iteration in
//! degree-truncated arithmetic.

use std::sync::Arc;

use serde::Serialize;

use crate::calculus::{ball_norm, insert_gamma};
use crate::error::{Error, Result};
use crate::field_maps::FieldMapKernel;
use crate::metric_space::MetricSpace;
use crate::poly::Truncation;
use crate::verdict::{BoundCheck, Verdict, DEFAULT_REL_SLACK};
use crate::weights::WeightSystem;

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 500;

/// An `r`-tuple `Γ⃗` of `s`-field maps with its ball-norm scales `λ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldMapTuple {
    pub entries: Vec<FieldMapKernel>,
    pub lambdas: Vec<f64>,
}

impl FieldMapTuple {
    pub fn new(entries: Vec<FieldMapKernel>, lambdas: Vec<f64>) -> Result<Self> {
        if entries.len() != lambdas.len() {
            return Err(Error::arity(lambdas.len(), entries.len()));
        }
        Ok(FieldMapTuple { entries, lambdas })
    }

    pub fn zero(points: usize, s: usize, lambdas: Vec<f64>) -> Self {
        FieldMapTuple {
            entries: vec![FieldMapKernel::zero(points, s, 0); lambdas.len()],
            lambdas,
        }
    }

    /// `‖Γ⃗‖ = max_j ⦀Γ_j⦀_w / λ_j`.
    pub fn ball_norm(&self, w: &WeightSystem) -> Result<f64> {
        ball_norm(&self.entries, w, &self.lambdas)
    }

    pub fn in_ball(&self, w: &WeightSystem, rho: f64) -> Result<bool> {
        Ok(self.ball_norm(w)? <= rho * (1.0 + DEFAULT_REL_SLACK))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a.sub(b)).collect::<Result<_>>()?;
        Ok(FieldMapTuple {
            entries,
            lambdas: self.lambdas.clone(),
        })
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.entries.iter().map(FieldMapKernel::max_abs_coefficient).fold(0.0, f64::max)
    }

    pub fn is_truncated(&self) -> bool {
        self.entries.iter().any(FieldMapKernel::is_truncated)
    }
}

#[derive(Debug, Clone)]
pub struct ImplicitSystem {
    space: Arc<MetricSpace>,
    pub f: Vec<FieldMapKernel>,
    pub l: Vec<FieldMapKernel>,
    pub b: Vec<FieldMapKernel>,
    pub kappas: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub contraction: f64,
}

impl ImplicitSystem {
    /// Validates shapes and degree bands. `L_j` and `B_j` are `(s+r)`-field
    /// maps; their last `r` slots become gamma slots.
    pub fn new(
        space: Arc<MetricSpace>,
        f: Vec<FieldMapKernel>,
        l: Vec<FieldMapKernel>,
        b: Vec<FieldMapKernel>,
        kappas: Vec<f64>,
        lambdas: Vec<f64>,
        contraction: f64,
    ) -> Result<Self> {
        let r = lambdas.len();
        let s = kappas.len();
        let n = space.len();
        if r == 0 {
            return Err(Error::Structure("system needs at least one unknown".into()));
        }
        if !(contraction > 0.0 && contraction < 1.0) {
            return Err(Error::Structure(format!("contraction factor {contraction} is not in (0, 1)")));
        }
        for (name, list) in [("f", &f), ("L", &l), ("B", &b)] {
            if list.len() != r {
                return Err(Error::Structure(format!("{name} has {} components, expected {r}", list.len())));
            }
        }
        WeightSystem::new(space.clone(), kappas.clone())?.extended(&lambdas)?;
        let check_points = |k: &FieldMapKernel| -> Result<()> {
            if k.points() == n {
                Ok(())
            } else {
                Err(Error::DimensionMismatch {
                    expected: n,
                    found: k.points(),
                })
            }
        };
        for fj in &f {
            check_points(fj)?;
            if fj.arity() != s {
                return Err(Error::arity(s, fj.arity()));
            }
        }
        let regrade = |list: Vec<FieldMapKernel>| -> Result<Vec<FieldMapKernel>> {
            list.into_iter()
                .map(|k| {
                    check_points(&k)?;
                    if k.arity() != s + r {
                        return Err(Error::arity(s + r, k.arity()));
                    }
                    k.with_gamma_slots(r)
                })
                .collect()
        };
        let l = regrade(l)?;
        let b = regrade(b)?;
        for (j, lj) in l.iter().enumerate() {
            if let Some((lo, hi)) = lj.gamma_degree_range() {
                if lo != 1 || hi != 1 {
                    return Err(Error::DegreeMismatch(format!("L[{j}] is not linear in the gamma slots")));
                }
            }
        }
        for (j, bj) in b.iter().enumerate() {
            if let Some((lo, _)) = bj.gamma_degree_range() {
                if lo < 2 {
                    return Err(Error::DegreeMismatch(format!("B[{j}] has gamma degree {lo} < 2")));
                }
            }
        }
        Ok(ImplicitSystem {
            space,
            f,
            l,
            b,
            kappas,
            lambdas,
            contraction,
        })
    }

    pub fn space(&self) -> &Arc<MetricSpace> {
        &self.space
    }

    pub fn s(&self) -> usize {
        self.kappas.len()
    }

    pub fn r(&self) -> usize {
        self.lambdas.len()
    }

    pub fn points(&self) -> usize {
        self.space.len()
    }

    /// `w`: the κ's on the `α` slots.
    pub fn w(&self) -> WeightSystem {
        WeightSystem::new(self.space.clone(), self.kappas.clone()).expect("validated on construction")
    }

    /// `w_{κ,λ}`.
    pub fn w_kappa_lambda(&self) -> WeightSystem {
        self.w().extended(&self.lambdas).expect("validated on construction")
    }

    /// The same system with `B⃗ = 0`.
    pub fn linear_part(&self) -> Self {
        let mut sys = self.clone();
        for bj in &mut sys.b {
            *bj = FieldMapKernel::zero(self.points(), self.s() + self.r(), self.r());
        }
        sys
    }

    /// `F⃗(Γ⃗)_j = f_j + L̃_j(Γ⃗) + B̃_j(Γ⃗)`.
    pub fn apply(&self, gamma: &FieldMapTuple, trunc: &Truncation) -> Result<FieldMapTuple> {
        let mut entries = Vec::with_capacity(self.r());
        for j in 0..self.r() {
            let lt = insert_gamma(&self.l[j], &gamma.entries, trunc)?;
            let bt = insert_gamma(&self.b[j], &gamma.entries, trunc)?;
            entries.push(self.f[j].truncate(trunc).add(&lt)?.add(&bt)?);
        }
        FieldMapTuple::new(entries, self.lambdas.clone())
    }

    /// `max_j ⦀f_j⦀_w / λ_j`.
    pub fn f_norm(&self) -> Result<f64> {
        ball_norm(&self.f, &self.w(), &self.lambdas)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentNorms {
    pub f: f64,
    pub l: f64,
    pub b: f64,
    pub l_primed: f64,
    pub b_primed: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub components: Vec<ComponentNorms>,
    /// `⦀f_j⦀ + ⦀L_j⦀ + ⦀B_j⦀ ≤ λ_j` then `⦀L_j⦀ + ⦀B_j⦀′ ≤ cλ_j`, per `j`.
    pub conditions: Vec<BoundCheck>,
    pub holds: bool,
}

pub fn check_hypotheses(sys: &ImplicitSystem) -> Result<HypothesisReport> {
    let w = sys.w();
    let wkl = sys.w_kappa_lambda();
    let mut components = Vec::new();
    let mut conditions = Vec::new();
    for j in 0..sys.r() {
        let norms = ComponentNorms {
            f: sys.f[j].kernel_norm(&w)?,
            l: sys.l[j].kernel_norm(&wkl)?,
            b: sys.b[j].kernel_norm(&wkl)?,
            l_primed: sys.l[j].primed_norm(&wkl)?,
            b_primed: sys.b[j].primed_norm(&wkl)?,
            lambda: sys.lambdas[j],
        };
        conditions.push(BoundCheck::new(format!("ball[{j}]"), norms.f + norms.l + norms.b, norms.lambda));
        conditions.push(BoundCheck::new(
            format!("contraction[{j}]"),
            norms.l + norms.b_primed,
            sys.contraction * norms.lambda,
        ));
        components.push(norms);
    }
    let holds = conditions.iter().all(BoundCheck::holds);
    // a failed hypothesis is not a violated bound
    for cond in &mut conditions {
        if cond.is_violation() {
            cond.verdict = Verdict::HypothesisNotMet;
        }
    }
    Ok(HypothesisReport { components, conditions, holds })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveCertificate {
    pub hypotheses: HypothesisReport,
    pub degree_cap: usize,
    pub tol: f64,
    pub iterations: usize,
    pub iteration_cap: usize,
    pub converged: bool,
    pub final_change: f64,
    /// `max_j ⦀f_j⦀/λ_j`
    pub f_norm: f64,
    /// `‖Γ⃗‖`
    pub solution_norm: f64,
    /// `‖Γ⃗ − f⃗‖`
    pub distance_to_f: f64,
    /// `‖F⃗(Γ⃗) − Γ⃗‖`
    pub residual: f64,
    pub checks: Vec<BoundCheck>,
    pub truncated: bool,
    pub failure: Option<String>,
}

impl SolveCertificate {
    fn pending(hypotheses: HypothesisReport, trunc: &Truncation, tol: f64) -> Self {
        SolveCertificate {
            hypotheses,
            degree_cap: trunc.max_total_degree,
            tol,
            iterations: 0,
            iteration_cap: 0,
            converged: false,
            final_change: f64::NAN,
            f_norm: f64::NAN,
            solution_norm: f64::NAN,
            distance_to_f: f64::NAN,
            residual: f64::NAN,
            checks: Vec::new(),
            truncated: false,
            failure: None,
        }
    }

    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(BoundCheck::holds)
    }

    pub fn any_violation(&self) -> bool {
        self.checks.iter().any(BoundCheck::is_violation)
    }

    pub fn check(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub truncation: Truncation,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            truncation: Truncation::default(),
        }
    }
}

/// Picard iteration from `Γ⃗⁰ = 0`.
pub fn solve_fixed_point(sys: &ImplicitSystem, opts: &SolveOptions) -> Result<(FieldMapTuple, SolveCertificate)> {
    let start = FieldMapTuple::zero(sys.points(), sys.s(), sys.lambdas.clone());
    solve_from(sys, start, opts)
}

/// Picard iteration from a given initial tuple in the unit ball.
pub fn solve_from(sys: &ImplicitSystem, initial: FieldMapTuple, opts: &SolveOptions) -> Result<(FieldMapTuple, SolveCertificate)> {
    let hyp = check_hypotheses(sys)?;
    let trunc = &opts.truncation;
    let mut cert = SolveCertificate::pending(hyp, trunc, opts.tol);
    if !cert.hypotheses.holds {
        cert.failure = Some("hypotheses not met".into());
        return Err(Error::HypothesesFailed {
            reason: "fixed point hypotheses not met".into(),
            certificate: Some(Box::new(cert)),
        });
    }
    let w = sys.w();
    let c = sys.contraction;
    let eps_slack = 10.0 * f64::EPSILON;

    let mut current = FieldMapTuple::new(initial.entries.iter().map(|g| g.truncate(trunc)).collect(), sys.lambdas.clone())?;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut max_ball: f64 = current.ball_norm(&w)?;
    let mut prev_change: Option<f64> = None;
    let mut cap = opts.max_iter.max(1);
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    while iterations < cap {
        let next = sys.apply(&current, trunc)?;
        change = next.sub(&current)?.ball_norm(&w)?;
        iterations += 1;
        max_ball = max_ball.max(next.ball_norm(&w)?);
        match prev_change {
            Some(p) => worst_excess = worst_excess.max(change - c * p),
            None => {
                if change > 0.0 {
                    let est = ((opts.tol * (1.0 - c)) / change).ln() / c.ln();
                    let est = if est.is_finite() { est.max(0.0).ceil() as usize } else { 0 };
                    cap = cap.min(est + 10);
                }
            }
        }
        prev_change = Some(change);
        current = next;
        if change <= opts.tol {
            break;
        }
    }
    cert.iterations = iterations;
    cert.iteration_cap = cap;
    cert.final_change = change;
    cert.converged = change <= opts.tol;
    cert.truncated = current.is_truncated() || sys.f.iter().any(|k| k.truncate(trunc) != *k);

    let f_norm = sys.f_norm()?;
    let residual = sys.apply(&current, trunc)?.sub(&current)?.ball_norm(&w)?;
    let f_tuple = FieldMapTuple::new(sys.f.iter().map(|k| k.truncate(trunc)).collect(), sys.lambdas.clone())?;
    cert.f_norm = f_norm;
    cert.solution_norm = current.ball_norm(&w)?;
    cert.distance_to_f = current.sub(&f_tuple)?.ball_norm(&w)?;
    cert.residual = residual;
    if worst_excess > f64::NEG_INFINITY {
        cert.checks.push(BoundCheck::with_slack("contraction_steps", worst_excess, eps_slack, 0.0));
    }
    cert.checks.push(BoundCheck::new("iterates_in_unit_ball", max_ball, 1.0));
    cert.checks.push(BoundCheck::new("residual", residual, opts.tol * (1.0 + c) / (1.0 - c)));
    let posterior_hyp = cert.converged;
    cert.checks
        .push(BoundCheck::conditional("solution_norm", cert.solution_norm, f_norm / (1.0 - c), posterior_hyp));
    cert.checks.push(BoundCheck::conditional(
        "distance_to_f",
        cert.distance_to_f,
        c * f_norm / (1.0 - c),
        posterior_hyp,
    ));

    if !cert.converged {
        cert.failure = Some(format!("change {change:e} above tolerance after {iterations} iterations"));
        return Err(Error::MaxIterExceeded {
            best: Box::new(current),
            certificate: Box::new(cert),
        });
    }
    Ok((current, cert))
}

/// Solves the linear system `γ_j = f_j + L_j(α⃗, γ⃗)`.
pub fn solve_linear(sys: &ImplicitSystem, opts: &SolveOptions) -> Result<(FieldMapTuple, SolveCertificate)> {
    solve_fixed_point(&sys.linear_part(), opts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    /// `‖Γ⃗ − Γ⃗⁽¹⁾‖`
    pub difference: f64,
    /// `(‖f⃗‖²/(1−c)³) max_j ⦀B_j⦀/λ_j`
    pub ceiling: f64,
    /// `max_j ⦀B_j⦀/λ_j`
    pub coarse_ceiling: f64,
    pub checks: Vec<BoundCheck>,
    pub full: SolveCertificate,
    pub linear: SolveCertificate,
}

/// Solves with and without `B⃗` and bounds the distance between the two.
pub fn compare_to_linear(sys: &ImplicitSystem, opts: &SolveOptions) -> Result<Comparison> {
    let (full, full_cert) = solve_fixed_point(sys, opts)?;
    let (lin, lin_cert) = solve_linear(sys, opts)?;
    let w = sys.w();
    let wkl = sys.w_kappa_lambda();
    let c = sys.contraction;
    let difference = full.sub(&lin)?.ball_norm(&w)?;
    let mut b_max = 0.0_f64;
    for (bj, l) in sys.b.iter().zip(&sys.lambdas) {
        b_max = b_max.max(bj.kernel_norm(&wkl)? / l);
    }
    let f_norm = sys.f_norm()?;
    let mut small_f = true;
    for (fj, l) in sys.f.iter().zip(&sys.lambdas) {
        small_f &= fj.kernel_norm(&w)? <= (1.0 - c).powi(2) * l * (1.0 + DEFAULT_REL_SLACK);
    }
    let ceiling = f_norm * f_norm / (1.0 - c).powi(3) * b_max;
    let checks = vec![
        BoundCheck::conditional("linear_comparison", difference, ceiling, small_f),
        BoundCheck::conditional("linear_comparison_coarse", difference, b_max, small_f),
    ];
    Ok(Comparison {
        difference,
        ceiling,
        coarse_ceiling: b_max,
        checks,
        full: full_cert,
        linear: lin_cert,
    })
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;

    use super::*;
    use crate::series_algebra::MultiTuple;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn point() -> Arc<MetricSpace> {
        Arc::new(MetricSpace::line(1, 1.0).unwrap())
    }

    /// `γ = a α + l γ + b γ²` on one point.
    fn scalar(a: f64, l: f64, b: f64, lambda: f64, contraction: f64) -> ImplicitSystem {
        let f = FieldMapKernel::identity(1, 1, 0).scale(c(a));
        let lk = FieldMapKernel::identity(1, 2, 1).scale(c(l));
        let bk = FieldMapKernel::from_entries(1, 2, 1, &[(0, MultiTuple::new(vec![vec![], vec![0, 0]]), c(b))]).unwrap();
        ImplicitSystem::new(point(), vec![f], vec![lk], vec![bk], vec![1.0], vec![lambda], contraction).unwrap()
    }

    #[test]
    fn hypothesis_examples() {
        let rep = check_hypotheses(&scalar(0.1, 0.0, 0.1, 1.0, 0.5)).unwrap();
        assert!(rep.holds);
        assert!((rep.components[0].b_primed - 0.2).abs() < 1e-15);
        assert!((rep.conditions[0].lhs - 0.2).abs() < 1e-15);
        let rep = check_hypotheses(&scalar(0.1, 0.0, 0.6, 1.0, 0.5)).unwrap();
        assert!(!rep.holds);
        assert_eq!(rep.conditions[1].verdict, Verdict::HypothesisNotMet);
        assert!((rep.conditions[1].margin + 0.7).abs() < 1e-15);
    }

    #[test]
    fn pure_source_converges_immediately() {
        let (g, cert) = solve_fixed_point(&scalar(0.3, 0.0, 0.0, 1.0, 0.5), &SolveOptions::default()).unwrap();
        assert_eq!(g.entries[0], FieldMapKernel::identity(1, 1, 0).scale(c(0.3)));
        assert_eq!(cert.iterations, 2);
        assert!(cert.all_hold());
    }

    #[test]
    fn geometric_linear_solution() {
        let sys = scalar(0.1, 0.2, 0.0, 1.0, 0.2);
        let (g, cert) = solve_linear(&sys, &SolveOptions::default()).unwrap();
        let coeff = g.entries[0].coefficient(0, &MultiTuple::new(vec![vec![0]])).unwrap();
        assert!((coeff.re - 0.125).abs() < 1e-12);
        assert!(cert.all_hold());
        assert!((cert.check("solution_norm").unwrap().rhs - 0.125).abs() < 1e-15);
    }

    #[test]
    fn catalan_coefficients() {
        let sys = scalar(0.1, 0.0, 1.0, 0.25, 0.5);
        let (g, cert) = solve_fixed_point(&sys, &SolveOptions::default()).unwrap();
        let expect = [0.1, 0.01, 0.002, 0.0005];
        for (k, e) in expect.iter().enumerate() {
            let coeff = g.entries[0].coefficient(0, &MultiTuple::new(vec![vec![0; k + 1]])).unwrap();
            assert!((coeff.re - e).abs() < 1e-13, "degree {} got {}", k + 1, coeff.re);
        }
        assert!(cert.all_hold(), "{:?}", cert.checks);
        assert!(cert.truncated);
    }

    #[test]
    fn failing_hypotheses_are_reported() {
        let sys = scalar(0.1, 0.0, 0.6, 1.0, 0.5);
        assert!(matches!(solve_fixed_point(&sys, &SolveOptions::default()), Err(Error::HypothesesFailed { .. })));
    }

    #[test]
    fn comparison_example() {
        let sys = scalar(0.05, 0.0, 0.1, 1.0, 0.5);
        let cmp = compare_to_linear(&sys, &SolveOptions::default()).unwrap();
        assert!((cmp.ceiling - 0.002).abs() < 1e-15);
        assert!(cmp.difference > 0.0);
        assert!(cmp.checks.iter().all(BoundCheck::holds));
    }

    #[test]
    fn band_validation() {
        let f = FieldMapKernel::identity(1, 1, 0);
        let quad = FieldMapKernel::from_entries(1, 2, 1, &[(0, MultiTuple::new(vec![vec![], vec![0, 0]]), c(1.0))]).unwrap();
        let r = ImplicitSystem::new(
            point(),
            vec![f.clone()],
            vec![quad],
            vec![FieldMapKernel::zero(1, 2, 1)],
            vec![1.0],
            vec![1.0],
            0.5,
        );
        assert!(matches!(r, Err(Error::DegreeMismatch(_))));
        let lin = FieldMapKernel::identity(1, 2, 1);
        let r = ImplicitSystem::new(point(), vec![f], vec![FieldMapKernel::zero(1, 2, 1)], vec![lin], vec![1.0], vec![1.0], 0.5);
        assert!(matches!(r, Err(Error::DegreeMismatch(_))));
    }
}
