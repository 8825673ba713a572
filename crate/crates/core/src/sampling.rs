//! Seeded random instances for property suites and uniqueness probes.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field_maps::FieldMapKernel;
use crate::metric_space::{MetricSpace, Point};
use crate::series_algebra::{CoefficientSystem, FieldVector, MultiTuple};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex(rng: &mut SampleRng, scale: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-scale..=scale), rng.gen_range(-scale..=scale))
}

/// Random metric on `n` points: shortest-path closure of random edge lengths.
#[allow(clippy::needless_range_loop)]
pub fn metric(rng: &mut SampleRng, n: usize) -> MetricSpace {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = rng.gen_range(0.1..2.0);
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    MetricSpace::from_matrix(&d).expect("shortest path closure is a metric")
}

/// Random multi-tuple with a given degree profile.
pub fn tuple(rng: &mut SampleRng, points: usize, profile: &[usize]) -> MultiTuple {
    MultiTuple::new(
        profile
            .iter()
            .map(|&k| (0..k).map(|_| rng.gen_range(0..points)).collect::<Vec<Point>>())
            .collect(),
    )
}

/// Random degree profile of total degree in `[min_total, max_total]`,
/// restricted to the listed slots.
pub fn profile(rng: &mut SampleRng, arity: usize, slots: &[usize], min_total: usize, max_total: usize) -> Vec<usize> {
    let total = rng.gen_range(min_total..=max_total);
    let mut p = vec![0; arity];
    for _ in 0..total {
        if let Some(&slot) = slots.choose(rng) {
            p[slot] += 1;
        }
    }
    p
}

/// Random coefficient system with up to `terms` raw entries of total degree
/// at most `max_degree`.
pub fn coefficient_system(rng: &mut SampleRng, points: usize, arity: usize, max_degree: usize, terms: usize) -> CoefficientSystem {
    let slots: Vec<usize> = (0..arity).collect();
    let raw: Vec<(MultiTuple, Complex64)> = (0..terms)
        .map(|_| {
            let min = if arity == 0 { 0 } else { usize::from(rng.gen_bool(0.8)) };
            let p = profile(rng, arity, &slots, min, if arity == 0 { 0 } else { max_degree });
            (tuple(rng, points, &p), complex(rng, 1.0))
        })
        .collect();
    CoefficientSystem::symmetrize(arity, points, &raw).expect("sampled shapes are consistent")
}

/// Random kernel whose entries have gamma degree in `[gmin, gmax]` and
/// alpha degree at most `amax`; total degree is at least one.
#[allow(clippy::too_many_arguments)]
pub fn kernel(rng: &mut SampleRng, points: usize, arity: usize, gamma_slots: usize, gmin: usize, gmax: usize, amax: usize, terms: usize) -> FieldMapKernel {
    let alpha_slots: Vec<usize> = (0..arity - gamma_slots).collect();
    let gamma: Vec<usize> = (arity - gamma_slots..arity).collect();
    let mut entries = Vec::with_capacity(terms);
    for _ in 0..terms {
        let pg = profile(rng, arity, &gamma, gmin, gmax);
        let pa = profile(rng, arity, &alpha_slots, 0, amax);
        let mut p: Vec<usize> = pg.iter().zip(&pa).map(|(a, b)| a + b).collect();
        if p.iter().sum::<usize>() == 0 {
            let pool = if gamma.is_empty() { &alpha_slots } else { &gamma };
            match pool.choose(rng) {
                Some(&slot) => p[slot] = 1,
                None => continue,
            }
        }
        let x = rng.gen_range(0..points);
        entries.push((x, tuple(rng, points, &p), complex(rng, 1.0)));
    }
    FieldMapKernel::from_entries(points, arity, gamma_slots, &entries).expect("sampled shapes are consistent")
}

pub fn field(rng: &mut SampleRng, points: usize, sup: f64) -> FieldVector {
    FieldVector(
        (0..points)
            .map(|_| {
                let r = rng.gen_range(0.0..=sup);
                let t = rng.gen_range(0.0..std::f64::consts::TAU);
                Complex64::from_polar(r, t)
            })
            .collect(),
    )
}

/// Rescales a nonzero kernel so that its norm equals `target`.
pub fn rescale_kernel(k: &FieldMapKernel, norm: f64, target: f64) -> FieldMapKernel {
    if norm == 0.0 {
        k.clone()
    } else {
        k.scale(Complex64::new(target / norm, 0.0))
    }
}

pub fn fields(rng: &mut SampleRng, points: usize, sups: &[f64]) -> Vec<FieldVector> {
    sups.iter().map(|&s| field(rng, points, s)).collect()
}

pub fn unit_interval(rng: &mut SampleRng) -> f64 {
    rng.gen_range(0.0..=1.0)
}
