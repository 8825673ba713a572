//! The difference operator `δf(α⃗, δ⃗) = f(α⃗ + δ⃗) − f(α⃗)`.
//!
//! Slots `0..s` of the result carry `α⃗` and slots `s..2s` carry `δ⃗`.

use crate::error::{Error, Result};
use crate::field_maps::FieldMapKernel;
use crate::numeric::binomial;
use crate::poly::{self, Monomial, Terms, Truncation};
use crate::series_algebra::CoefficientSystem;
use crate::verdict::{BoundCheck, Checked, DEFAULT_REL_SLACK};
use crate::weights::WeightSystem;

use super::substitution::{inner_polynomials, SlotInput};

/// Expands every monomial of `terms` (over `arity` slots) into its
/// `α/δ` split, keeping the parts of δ-degree at least `p`.
fn split_terms(terms: &Terms, arity: usize, points: usize, p: usize) -> Terms {
    let shift = (arity * points) as u32;
    let mut out = Terms::new();
    for (m, c) in terms {
        let runs: Vec<(u32, usize)> = poly::var_runs(m).collect();
        let mut chosen = vec![0usize; runs.len()];
        expand(&runs, 0, &mut chosen, p, &mut |ks| {
            let mut factor = 1u64;
            let mut mono: Monomial = Vec::with_capacity(m.len());
            for (&(v, mult), &k) in runs.iter().zip(ks) {
                factor *= binomial(mult as u64, k as u64);
                mono.extend(std::iter::repeat_n(v, mult - k));
                mono.extend(std::iter::repeat_n(v + shift, k));
            }
            mono.sort_unstable();
            poly::add_term(&mut out, mono, c * factor as f64);
        });
    }
    poly::drop_zeros(&mut out);
    out
}

fn expand(runs: &[(u32, usize)], i: usize, chosen: &mut Vec<usize>, p: usize, emit: &mut dyn FnMut(&[usize])) {
    if i == runs.len() {
        if chosen.iter().sum::<usize>() >= p {
            emit(chosen);
        }
        return;
    }
    for k in 0..=runs[i].1 {
        chosen[i] = k;
        expand(runs, i + 1, chosen, p, emit);
    }
    chosen[i] = 0;
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma >= 1.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidWeight { slot: 0, value: sigma })
    }
}

/// `δf^{(≥p)}` with the bound `‖δf^{(≥p)}‖_{w_δ} ≤ σ^{−p} ‖f‖_{w_σ}`.
/// `w` carries the κ's, `lambdas` the weight factors of the δ slots.
pub fn difference(f: &CoefficientSystem, w: &WeightSystem, p: usize, lambdas: &[f64], sigma: f64) -> Result<Checked<CoefficientSystem>> {
    if p == 0 {
        return Err(Error::DegreeMismatch("difference order p must be at least 1".into()));
    }
    check_sigma(sigma)?;
    let s = f.arity();
    w.expect_arity(s)?;
    let terms = split_terms(f.raw_terms(), s, f.points(), p);
    let value = CoefficientSystem::from_terms(2 * s, f.points(), terms).with_truncated(f.is_truncated());
    let lhs = value.norm(&w.split_system(lambdas)?)?;
    let rhs = f.norm(&w.shifted_system(lambdas, sigma)?)? / sigma.powi(p as i32);
    let truncated = value.is_truncated();
    Ok(Checked {
        value,
        checks: vec![BoundCheck::new("difference", lhs, rhs)],
        truncated,
    })
}

/// `δA` for a field map: `⦀δA⦀_{w_δ} ≤ σ^{−1} ⦀A⦀_{w_σ}`.
pub fn difference_map(a: &FieldMapKernel, w: &WeightSystem, lambdas: &[f64], sigma: f64) -> Result<Checked<FieldMapKernel>> {
    check_sigma(sigma)?;
    let s = a.arity();
    w.expect_arity(s)?;
    let n = a.points();
    let outputs = a.outputs().iter().map(|t| split_terms(t, s, n, 1)).collect();
    let value = FieldMapKernel::from_outputs(n, 2 * s, 0, outputs, a.is_truncated());
    let lhs = value.kernel_norm(&w.split_system(lambdas)?)?;
    let rhs = a.kernel_norm(&w.shifted_system(lambdas, sigma)?)? / sigma;
    let truncated = value.is_truncated();
    Ok(Checked {
        value,
        checks: vec![BoundCheck::new("difference_map", lhs, rhs)],
        truncated,
    })
}

/// `δh̃^{(≥p)}`: the part of `h(A⃗ + δA⃗) − h(A⃗)` of degree at least `p` in
/// `δA⃗`, with `‖δh̃^{(≥p)}‖_w ≤ σ^{−p} ‖h‖_{w_λ}` whenever
/// `⦀A_j⦀_w + σ⦀δA_j⦀_w ≤ λ_j`.
#[allow(clippy::too_many_arguments)]
pub fn substituted_difference(
    h: &CoefficientSystem,
    maps: &[FieldMapKernel],
    deltas: &[FieldMapKernel],
    p: usize,
    sigma: f64,
    w: &WeightSystem,
    w_lambda: &WeightSystem,
    trunc: &Truncation,
) -> Result<Checked<CoefficientSystem>> {
    if p == 0 {
        return Err(Error::DegreeMismatch("difference order p must be at least 1".into()));
    }
    check_sigma(sigma)?;
    let r = h.arity();
    let n = h.points();
    if maps.len() != r || deltas.len() != r {
        return Err(Error::arity(r, maps.len().min(deltas.len())));
    }
    w_lambda.expect_arity(r)?;
    let s = w.arity();
    for a in maps.iter().chain(deltas) {
        if a.arity() != s {
            return Err(Error::arity(s, a.arity()));
        }
        if a.points() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.points(),
            });
        }
    }
    let split = split_terms(h.raw_terms(), r, n, p);
    let inputs: Vec<SlotInput<'_>> = maps.iter().chain(deltas).map(SlotInput::Map).collect();
    let inner = inner_polynomials(&inputs, n);
    let mut sub = poly::Substituter::new(&inner, n, *trunc);
    let terms = sub.apply(&split);
    let truncated = sub.truncated || h.is_truncated();
    let value = CoefficientSystem::from_terms(s, n, terms).with_truncated(truncated);

    let mut admissible = true;
    for ((a, d), l) in maps.iter().zip(deltas).zip(w_lambda.factors()) {
        admissible &= a.kernel_norm(w)? + sigma * d.kernel_norm(w)? <= l * (1.0 + DEFAULT_REL_SLACK);
    }
    let lhs = value.norm(w)?;
    let rhs = h.norm(w_lambda)? / sigma.powi(p as i32);
    Ok(Checked {
        value,
        checks: vec![BoundCheck::conditional("substituted_difference", lhs, rhs, admissible)],
        truncated,
    })
}
