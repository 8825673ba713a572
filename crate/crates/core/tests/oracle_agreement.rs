//! Main code paths against the independent brute-force oracles.

use std::sync::Arc;

use fieldmaps::oracle::{kernel_norm_oracle, kernel_profile_oracle, literal_evaluate, literal_evaluate_map, norm_oracle, primed_norm_oracle};
use fieldmaps::sampling;
use fieldmaps::{ComplexMatrix, FieldMapKernel, MetricSpace, WeightSystem};
use num_complex::Complex64;
use rand::Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn kernel_norms_match_oracle() {
    let mut rng = sampling::rng(101);
    for _ in 0..300 {
        let n = rng.gen_range(1..=4);
        let s = rng.gen_range(0..=1);
        let r = rng.gen_range(1..=2);
        let space = Arc::new(sampling::metric(&mut rng, n));
        let factors: Vec<f64> = (0..s + r).map(|_| rng.gen_range(0.5..2.0)).collect();
        let w = WeightSystem::new(space, factors).unwrap();
        let a = sampling::kernel(&mut rng, n, s + r, r, 0, 3, 1, 6);
        let main = a.kernel_norm(&w).unwrap();
        let oracle = kernel_norm_oracle(&a, &w).unwrap();
        assert!(rel(main, oracle) < 1e-12, "{main} vs {oracle}");
        if !a.is_zero() {
            let primed = a.primed_norm(&w).unwrap();
            let primed_oracle = primed_norm_oracle(&a, &w).unwrap();
            assert!(rel(primed, primed_oracle) < 1e-12, "{primed} vs {primed_oracle}");
        }
        let detail = a.kernel_norm_detail(&w).unwrap();
        let profiles = kernel_profile_oracle(&a, &w).unwrap();
        assert_eq!(detail.len(), profiles.len());
        for (d, (profile, l, r)) in detail.iter().zip(&profiles) {
            assert_eq!(&d.profile, profile);
            assert!(rel(d.left, *l) < 1e-12 && rel(d.right, *r) < 1e-12);
        }
    }
}

#[test]
fn evaluation_matches_literal_sums() {
    let mut rng = sampling::rng(102);
    for _ in 0..200 {
        let n = rng.gen_range(1..=3);
        let s = rng.gen_range(1..=3);
        let f = sampling::coefficient_system(&mut rng, n, s, 4, 6);
        let alpha = sampling::fields(&mut rng, n, &vec![1.2; s]);
        let a = f.evaluate(&alpha).unwrap();
        let b = literal_evaluate(&f, &alpha).unwrap();
        assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0));

        let k = sampling::kernel(&mut rng, n, s, 0, 0, 0, 3, 5);
        let x = k.evaluate_map(&alpha).unwrap();
        let y = literal_evaluate_map(&k, &alpha).unwrap();
        for (u, v) in x.0.iter().zip(&y.0) {
            assert!((u - v).norm() <= 1e-12 * v.norm().max(1.0));
        }
    }
}

#[test]
fn norm_oracle_examples() {
    let pair = Arc::new(MetricSpace::line(2, 1.0).unwrap());
    let w = WeightSystem::new(pair, vec![1.0]).unwrap();
    let f = fieldmaps::CoefficientSystem::symmetrize(1, 2, &[(fieldmaps::MultiTuple::new(vec![vec![0, 1]]), Complex64::new(1.0, 0.0))]).unwrap();
    let expect = 0.5 * std::f64::consts::E;
    assert!((norm_oracle(&f, &w).unwrap() - expect).abs() < 1e-15);
    assert!((f.norm(&w).unwrap() - expect).abs() < 1e-15);
}

#[test]
fn swap_operator_norm() {
    let pair = Arc::new(MetricSpace::line(2, 1.0).unwrap());
    let w = WeightSystem::new(pair, vec![2.0]).unwrap();
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let swap = ComplexMatrix::from_row_slice(2, 2, &[z, o, o, z]);
    let k = FieldMapKernel::from_linear_operator(&swap).unwrap();
    let expect = 2.0 * std::f64::consts::E;
    assert!((kernel_norm_oracle(&k, &w).unwrap() - expect).abs() < 1e-14);
    assert!((k.kernel_norm(&w).unwrap() - expect).abs() < 1e-14);
}
