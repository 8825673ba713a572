//! Property tests for the structural invariants of norms, weights, calculus
//! and the solver. Random objects are drawn from seeded samplers; proptest
//! drives the seeds and the scalar parameters.

use std::sync::Arc;

use fieldmaps::background::{solve_background, BackgroundInstance};
use fieldmaps::calculus::{check_lipschitz, difference, insert_gamma, substituted_difference};
use fieldmaps::oracle::literal_evaluate;
use fieldmaps::sampling::{self, SampleRng};
use fieldmaps::solver::{solve_fixed_point, ImplicitSystem, SolveOptions};
use fieldmaps::{CoefficientSystem, ComplexMatrix, FieldMapKernel, FieldVector, MetricSpace, MultiTuple, Truncation, WeightSystem};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

fn weights(space: &Arc<MetricSpace>, factors: Vec<f64>) -> WeightSystem {
    WeightSystem::new(space.clone(), factors).unwrap()
}

fn factors(rng: &mut SampleRng, k: usize) -> Vec<f64> {
    (0..k).map(|_| rng.gen_range(0.4..=1.6)).collect()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steiner_is_monotone_and_below_spanning_tree(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = sampling::rng(seed);
        let space = sampling::metric(&mut rng, n);
        let mut terminals: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        if terminals.is_empty() {
            terminals.push(0);
        }
        let tau = space.tree_length(&terminals).unwrap();
        // Prim on the terminals alone
        let mut in_tree = vec![terminals[0]];
        let mut rest: Vec<usize> = terminals[1..].to_vec();
        let mut mst = 0.0;
        while !rest.is_empty() {
            let (k, d) = rest
                .iter()
                .enumerate()
                .map(|(k, &v)| (k, in_tree.iter().map(|&u| space.distance(u, v).unwrap()).fold(f64::INFINITY, f64::min)))
                .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
            mst += d;
            in_tree.push(rest.remove(k));
        }
        prop_assert!(tau <= mst + 1e-12);
        for x in 0..n {
            let mut bigger = terminals.clone();
            bigger.push(x);
            prop_assert!(space.tree_length(&bigger).unwrap() >= tau - 1e-12);
        }
        if terminals.len() == 1 {
            prop_assert_eq!(tau, 0.0);
        }
    }

    #[test]
    fn steiner_subadditive_on_overlapping_sets(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = sampling::rng(seed);
        let space = sampling::metric(&mut rng, n);
        let shared = rng.gen_range(0..n);
        let mut t1: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        let mut t2: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        t1.push(shared);
        t2.push(shared);
        let union: Vec<usize> = t1.iter().chain(&t2).copied().collect();
        let lhs = space.tree_length(&union).unwrap();
        let rhs = space.tree_length(&t1).unwrap() + space.tree_length(&t2).unwrap();
        prop_assert!(lhs <= rhs + 1e-12);
    }

    #[test]
    fn weights_submultiplicative_over_concatenation(seed in any::<u64>()) {
        let mut rng = sampling::rng(seed);
        let n = rng.gen_range(1..=4);
        let space = Arc::new(sampling::metric(&mut rng, n));
        let w = weights(&space, factors(&mut rng, 2));
        let p1 = sampling::profile(&mut rng, 2, &[0, 1], 1, 3);
        let p2 = sampling::profile(&mut rng, 2, &[0, 1], 1, 3);
        let mut t1 = sampling::tuple(&mut rng, n, &p1).slots().to_vec();
        let t2 = sampling::tuple(&mut rng, n, &p2);
        // force a shared point
        let shared = t2.slots().iter().flatten().next().copied().unwrap();
        t1[0].push(shared);
        let t1 = MultiTuple::new(t1);
        let joint = t1.concat(&t2).unwrap();
        let lhs = w.weight_of(&joint, None).unwrap();
        let rhs = w.weight_of(&t1, None).unwrap() * w.weight_of(&t2, None).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn shifted_factors_dominate(seed in any::<u64>(), sigma in 1.0f64..8.0) {
        let mut rng = sampling::rng(seed);
        let space = Arc::new(sampling::metric(&mut rng, 2));
        let kappas = factors(&mut rng, 3);
        let lambdas = factors(&mut rng, 3);
        let w = weights(&space, kappas.clone());
        let shifted = w.shifted_system(&lambdas, sigma).unwrap();
        for ((f, k), l) in shifted.factors().iter().zip(&kappas).zip(&lambdas) {
            prop_assert!(*f >= *k && *f >= sigma * l);
        }
    }

    #[test]
    fn norm_is_homogeneous_and_monotone(seed in any::<u64>(), re in -3.0f64..3.0, im in -3.0f64..3.0, bump in 1.0f64..2.0) {
        let mut rng = sampling::rng(seed);
        let n = rng.gen_range(1..=3);
        let s = rng.gen_range(1..=3);
        let space = Arc::new(sampling::metric(&mut rng, n));
        let kappas = factors(&mut rng, s);
        let w = weights(&space, kappas.clone());
        let f = sampling::coefficient_system(&mut rng, n, s, 3, 6);
        let z = Complex64::new(re, im);
        let base = f.norm(&w).unwrap();
        prop_assert!(close(f.scale(z).norm(&w).unwrap(), z.norm() * base, 1e-12));
        let mut raised = kappas;
        let j = rng.gen_range(0..s);
        raised[j] *= bump;
        prop_assert!(f.norm(&weights(&space, raised)).unwrap() >= base * (1.0 - 1e-12));
    }

    #[test]
    fn triangle_inequality_for_combine(seed in any::<u64>()) {
        let mut rng = sampling::rng(seed);
        let n = rng.gen_range(1..=3);
        let space = Arc::new(sampling::metric(&mut rng, n));
        let w = weights(&space, factors(&mut rng, 2));
        let f = sampling::coefficient_system(&mut rng, n, 2, 3, 5);
        let g = sampling::coefficient_system(&mut rng, n, 2, 3, 5);
        let one = Complex64::new(1.0, 0.0);
        let sum = CoefficientSystem::combine(&f, &g, one, one).unwrap();
        prop_assert!(sum.norm(&w).unwrap() <= (f.norm(&w).unwrap() + g.norm(&w).unwrap()) * (1.0 + 1e-12));
        prop_assert!(CoefficientSystem::combine(&f, &f, one, -one).unwrap().is_zero());
    }

    #[test]
    fn symmetrization_preserves_evaluation(seed in any::<u64>()) {
        let mut rng = sampling::rng(seed);
        let n = rng.gen_range(1..=3);
        let s = rng.gen_range(1..=2);
        let raw: Vec<(MultiTuple, Complex64)> = (0..5)
            .map(|_| {
                let p = sampling::profile(&mut rng, s, &(0..s).collect::<Vec<_>>(), 0, 3);
                (sampling::tuple(&mut rng, n, &p), sampling::complex(&mut rng, 1.0))
            })
            .collect();
        let f = CoefficientSystem::symmetrize(s, n, &raw).unwrap();
        let alpha = sampling::fields(&mut rng, n, &vec![1.5; s]);
        let mut direct = Complex64::new(0.0, 0.0);
        for (t, c) in &raw {
            let mut term = *c;
            for (slot, pts) in t.slots().iter().enumerate() {
                for &x in pts {
                    term *= alpha[slot].0[x];
                }
            }
            direct += term;
        }
        let got = f.evaluate(&alpha).unwrap();
        prop_assert!((got - direct).norm() <= 1e-12 * direct.norm().max(1.0));
        prop_assert!((literal_evaluate(&f, &alpha).unwrap() - direct).norm() <= 1e-12 * direct.norm().max(1.0));
    }

    #[test]
    fn kernel_norm_splits_over_gamma_pieces(seed in any::<u64>()) {
        let mut rng = sampling::rng(seed);
        let n = rng.gen_range(1..=3);
        let space = Arc::new(sampling::metric(&mut rng, n));
        let w = weights(&space, factors(&mut rng, 3));
        let a = sampling::kernel(&mut rng, n, 3, 2, 1, 4, 1, 6);
        let total = a.kernel_norm(&w).unwrap();
        let pieces: f64 = a.gamma_pieces().unwrap().values().map(|p| p.kernel_norm(&w).unwrap()).sum();
        prop_assert!(close(total, pieces, 1e-12));
        if let Some((lo, hi)) = a.gamma_degree_range() {
            let primed = a.primed_norm(&w).unwrap();
            prop_assert!(lo as f64 * total <= primed * (1.0 + 1e-12));
            prop_assert!(primed <= hi as f64 * total * (1.0 + 1e-12));
        }
    }

    #[test]
    fn function_bridge_matches_kernel_norm(seed in any::<u64>()) {
        let mut rng = sampling::rng(seed);
        let n = rng.gen_range(1..=3);
        let s = rng.gen_range(1..=2);
        let space = Arc::new(sampling::metric(&mut rng, n));
        let w = weights(&space, factors(&mut rng, s));
        let a = sampling::kernel(&mut rng, n, s, 0, 0, 0, 3, 5);
        let hat = FieldMapKernel::hat_system(&w).unwrap();
        prop_assert!(close(a.to_function().norm(&hat).unwrap(), a.kernel_norm(&w).unwrap(), 1e-12));
    }

    #[test]
    fn lipschitz_bound_in_unit_ball(seed in any::<u64>()) {
        let mut rng = sampling::rng(seed);
        let n = rng.gen_range(1..=2);
        let space = Arc::new(sampling::metric(&mut rng, n));
        let kappas = factors(&mut rng, 1);
        let lambdas = factors(&mut rng, 1);
        let w = weights(&space, kappas);
        let trunc = Truncation::default();
        let b = sampling::kernel(&mut rng, n, 2, 1, 1, 3, 1, 4);
        let draw = |rng: &mut SampleRng| {
            let raw = sampling::kernel(rng, n, 1, 0, 0, 0, 2, 3);
            let norm = raw.kernel_norm(&w).unwrap();
            vec![sampling::rescale_kernel(&raw, norm, lambdas[0] * sampling::unit_interval(rng))]
        };
        let g1 = draw(&mut rng);
        let g2 = draw(&mut rng);
        let check = check_lipschitz(&b, &g1, &g2, &w, &lambdas, &trunc).unwrap();
        prop_assert!(!check.is_violation(), "{:?}", check);
    }

    #[test]
    fn substituted_difference_bound(seed in any::<u64>(), p in 1usize..=2, sigma in 1.0f64..3.0) {
        let mut rng = sampling::rng(seed);
        let n = rng.gen_range(1..=2);
        let space = Arc::new(sampling::metric(&mut rng, n));
        let kappas = factors(&mut rng, 1);
        let lambdas = factors(&mut rng, 1);
        let w = weights(&space, kappas);
        let w_lambda = weights(&space, lambdas.clone());
        let h = sampling::coefficient_system(&mut rng, n, 1, 3, 4);
        let a = sampling::kernel(&mut rng, n, 1, 0, 0, 0, 2, 3);
        let d = sampling::kernel(&mut rng, n, 1, 0, 0, 0, 2, 3);
        let share = sampling::unit_interval(&mut rng);
        let a = sampling::rescale_kernel(&a, a.kernel_norm(&w).unwrap(), share * lambdas[0]);
        let d = sampling::rescale_kernel(&d, d.kernel_norm(&w).unwrap(), (1.0 - share) * lambdas[0] / sigma);
        let out = substituted_difference(&h, &[a], &[d], p, sigma, &w, &w_lambda, &Truncation::default()).unwrap();
        prop_assert!(out.all_hold(), "{:?}", out.checks);
    }

    #[test]
    fn difference_matches_evaluation(seed in any::<u64>()) {
        let mut rng = sampling::rng(seed);
        let n = rng.gen_range(1..=2);
        let space = Arc::new(sampling::metric(&mut rng, n));
        let w = weights(&space, factors(&mut rng, 1));
        let f = sampling::coefficient_system(&mut rng, n, 1, 3, 5);
        let delta = difference(&f, &w, 1, &[1.0], 1.0).unwrap().value;
        let fields = sampling::fields(&mut rng, n, &[1.0, 1.0]);
        let shifted = FieldVector(fields[0].0.iter().zip(&fields[1].0).map(|(a, b)| a + b).collect());
        let expect = f.evaluate(&[shifted]).unwrap() - f.evaluate(&fields[..1]).unwrap();
        let got = delta.evaluate(&fields).unwrap();
        prop_assert!((got - expect).norm() <= 1e-12 * expect.norm().max(1.0));
    }

    #[test]
    fn insert_gamma_commutes_with_evaluation(seed in any::<u64>()) {
        let mut rng = sampling::rng(seed);
        let n = rng.gen_range(1..=2);
        let b = sampling::kernel(&mut rng, n, 2, 1, 1, 2, 1, 4);
        let g = sampling::kernel(&mut rng, n, 1, 0, 0, 0, 2, 3);
        let composed = insert_gamma(&b, std::slice::from_ref(&g), &Truncation::total(8)).unwrap();
        let alpha = sampling::fields(&mut rng, n, &[1.0]);
        let inner = g.evaluate_map(&alpha).unwrap();
        let direct = b.evaluate_map(&[alpha[0].clone(), inner]).unwrap();
        let got = composed.evaluate_map(&alpha).unwrap();
        for (x, y) in got.0.iter().zip(&direct.0) {
            prop_assert!((x - y).norm() <= 1e-12 * y.norm().max(1.0));
        }
    }
}

/// `γ = f + L(γ) + B(γ)` with both solver hypotheses satisfied.
fn admissible(rng: &mut SampleRng) -> ImplicitSystem {
    let n = rng.gen_range(1..=2);
    let space = Arc::new(sampling::metric(rng, n));
    let kappas = factors(rng, 1);
    let lambdas = factors(rng, 1);
    let c: f64 = rng.gen_range(0.3..0.8);
    let w = weights(&space, kappas.clone());
    let wkl = w.extended(&lambdas).unwrap();
    let f = sampling::kernel(rng, n, 1, 0, 0, 0, 2, 3);
    let f = sampling::rescale_kernel(&f, f.kernel_norm(&w).unwrap(), (1.0 - c) * lambdas[0] * sampling::unit_interval(rng));
    let l = sampling::kernel(rng, n, 2, 1, 1, 1, 1, 3);
    let l = sampling::rescale_kernel(&l, l.kernel_norm(&wkl).unwrap(), 0.5 * c * lambdas[0] * sampling::unit_interval(rng));
    let b = sampling::kernel(rng, n, 2, 1, 2, 3, 1, 3);
    let b = sampling::rescale_kernel(&b, b.primed_norm(&wkl).unwrap(), 0.5 * c * lambdas[0] * sampling::unit_interval(rng));
    let total = f.kernel_norm(&w).unwrap() + l.kernel_norm(&wkl).unwrap() + b.kernel_norm(&wkl).unwrap();
    let (f, l, b) = if total > lambdas[0] {
        let s = Complex64::new(lambdas[0] / total, 0.0);
        (f.scale(s), l.scale(s), b.scale(s))
    } else {
        (f, l, b)
    };
    ImplicitSystem::new(space, vec![f], vec![l], vec![b], kappas, lambdas, c).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solver_certificate_holds(seed in any::<u64>()) {
        let mut rng = sampling::rng(seed);
        let sys = admissible(&mut rng);
        let (_, cert) = solve_fixed_point(&sys, &SolveOptions::default()).unwrap();
        prop_assert!(cert.converged);
        prop_assert!(cert.all_hold(), "{:?}", cert.checks);
    }

    #[test]
    fn background_single_point_certificate(w in 0.0f64..0.05, wf in 0.2f64..1.0, k in 0.5f64..3.0) {
        let one = ComplexMatrix::identity(1, 1);
        let c = Complex64::new(w, 0.0);
        let inst = BackgroundInstance::new(MetricSpace::line(1, 1.0).unwrap(), 1.0, vec![(0, 0, 0, c)], vec![(0, 0, 0, c)], one.clone(), one, wf, k).unwrap();
        if inst.constants().unwrap().hypothesis_holds {
            let sol = solve_background(&inst, &SolveOptions::default()).unwrap();
            prop_assert!(sol.certificate.all_checks().all(|c| c.holds()));
        }
    }
}
