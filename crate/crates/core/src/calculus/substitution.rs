//! Substituting field maps into functions and into other field maps.

use crate::error::{Error, Result};
use crate::field_maps::FieldMapKernel;
use crate::poly::{self, Substituter, Terms, Truncation};
use crate::series_algebra::CoefficientSystem;
use crate::verdict::{BoundCheck, Checked, DEFAULT_REL_SLACK};
use crate::weights::WeightSystem;

/// What replaces one outer slot during substitution.
#[derive(Debug, Clone, Copy)]
pub(crate) enum SlotInput<'a> {
    /// the inner field `α_slot` itself
    Field(usize),
    Map(&'a FieldMapKernel),
}

/// Inner polynomials for every outer variable `slot * |X| + y`.
pub(crate) fn inner_polynomials(inputs: &[SlotInput<'_>], points: usize) -> Vec<Terms> {
    let mut inner = Vec::with_capacity(inputs.len() * points);
    for input in inputs {
        for y in 0..points {
            inner.push(match input {
                SlotInput::Field(slot) => {
                    let mut t = Terms::new();
                    t.insert(vec![poly::var(*slot, y, points)], num_complex::Complex64::new(1.0, 0.0));
                    t
                }
                SlotInput::Map(a) => a.outputs()[y].clone(),
            });
        }
    }
    inner
}

fn check_maps(maps: &[FieldMapKernel], arity: usize, points: usize) -> Result<usize> {
    if maps.len() != arity {
        return Err(Error::arity(arity, maps.len()));
    }
    let s = maps.first().map_or(0, FieldMapKernel::arity);
    for a in maps {
        if a.arity() != s {
            return Err(Error::arity(s, a.arity()));
        }
        if a.points() != points {
            return Err(Error::DimensionMismatch {
                expected: points,
                found: a.points(),
            });
        }
    }
    Ok(s)
}

/// Checks `⦀A_j⦀_w ≤ λ_j` for every map, with round-off slack.
fn maps_admissible(maps: &[FieldMapKernel], w: &WeightSystem, w_lambda: &WeightSystem) -> Result<bool> {
    let mut ok = true;
    for (a, lambda) in maps.iter().zip(w_lambda.factors()) {
        ok &= a.kernel_norm(w)? <= lambda * (1.0 + DEFAULT_REL_SLACK);
    }
    Ok(ok)
}

/// `h̃(α⃗) = h(A_1(α⃗), …, A_r(α⃗))` with the bound `‖h̃‖_w ≤ ‖h‖_{w_λ}`.
pub fn substitute_function(
    h: &CoefficientSystem,
    maps: &[FieldMapKernel],
    w: &WeightSystem,
    w_lambda: &WeightSystem,
    trunc: &Truncation,
) -> Result<Checked<CoefficientSystem>> {
    let n = h.points();
    let s = check_maps(maps, h.arity(), n)?;
    w.expect_arity(s)?;
    w_lambda.expect_arity(h.arity())?;
    let inputs: Vec<SlotInput<'_>> = maps.iter().map(SlotInput::Map).collect();
    let inner = inner_polynomials(&inputs, n);
    let mut sub = Substituter::new(&inner, n, *trunc);
    let terms = sub.apply(h.raw_terms());
    let truncated = sub.truncated || maps.iter().any(FieldMapKernel::is_truncated) || h.is_truncated();
    let value = CoefficientSystem::from_terms(s, n, terms).with_truncated(truncated);
    let check = BoundCheck::conditional("substitution", value.norm(w)?, h.norm(w_lambda)?, maps_admissible(maps, w, w_lambda)?);
    Ok(Checked {
        value,
        checks: vec![check],
        truncated,
    })
}

/// Substitution into every output point of an `r`-field map `B`.
pub fn substitute_map(
    b: &FieldMapKernel,
    maps: &[FieldMapKernel],
    w: &WeightSystem,
    w_lambda: &WeightSystem,
    trunc: &Truncation,
) -> Result<Checked<FieldMapKernel>> {
    let n = b.points();
    let s = check_maps(maps, b.arity(), n)?;
    w.expect_arity(s)?;
    w_lambda.expect_arity(b.arity())?;
    let inputs: Vec<SlotInput<'_>> = maps.iter().map(SlotInput::Map).collect();
    let (value, truncated) = substitute_slots(b, &inputs, s, trunc);
    let check = BoundCheck::conditional(
        "substitution_map",
        value.kernel_norm(w)?,
        b.kernel_norm(w_lambda)?,
        maps_admissible(maps, w, w_lambda)?,
    );
    Ok(Checked {
        value,
        checks: vec![check],
        truncated,
    })
}

pub(crate) fn substitute_slots(b: &FieldMapKernel, inputs: &[SlotInput<'_>], arity: usize, trunc: &Truncation) -> (FieldMapKernel, bool) {
    let n = b.points();
    let inner = inner_polynomials(inputs, n);
    let mut sub = Substituter::new(&inner, n, *trunc);
    let outputs: Vec<Terms> = b.outputs().iter().map(|t| sub.apply(t)).collect();
    let truncated = sub.truncated || b.is_truncated() || inputs.iter().any(|i| matches!(i, SlotInput::Map(a) if a.is_truncated()));
    (FieldMapKernel::from_outputs(n, arity, 0, outputs, truncated), truncated)
}

/// `B̃(Γ⃗)(α⃗) = B(α⃗, Γ⃗(α⃗))` for an `(s+r)`-field map `B` whose last `r`
/// slots are gamma slots.
pub fn insert_gamma(b: &FieldMapKernel, gammas: &[FieldMapKernel], trunc: &Truncation) -> Result<FieldMapKernel> {
    let r = b.gamma_slots();
    let s = b.alpha_slots();
    if gammas.len() != r {
        return Err(Error::arity(r, gammas.len()));
    }
    for g in gammas {
        if g.arity() != s {
            return Err(Error::arity(s, g.arity()));
        }
        if g.points() != b.points() {
            return Err(Error::DimensionMismatch {
                expected: b.points(),
                found: g.points(),
            });
        }
    }
    let inputs: Vec<SlotInput<'_>> = (0..s).map(SlotInput::Field).chain(gammas.iter().map(SlotInput::Map)).collect();
    Ok(substitute_slots(b, &inputs, s, trunc).0)
}

/// `‖Γ⃗‖ = max_j ⦀Γ_j⦀_w / λ_j`.
pub fn ball_norm(gammas: &[FieldMapKernel], w: &WeightSystem, lambdas: &[f64]) -> Result<f64> {
    if gammas.len() != lambdas.len() {
        return Err(Error::arity(lambdas.len(), gammas.len()));
    }
    let mut best = 0.0_f64;
    for (g, l) in gammas.iter().zip(lambdas) {
        best = best.max(g.kernel_norm(w)? / l);
    }
    Ok(best)
}

/// `⦀B̃(Γ⃗) − B̃(Γ⃗′)⦀_w ≤ ‖Γ⃗−Γ⃗′‖ max{‖Γ⃗‖,‖Γ⃗′‖}^{d_min−1} ⦀B⦀′_{w_{κ,λ}}`
/// for `Γ⃗, Γ⃗′` in the unit ball.
pub fn check_lipschitz(
    b: &FieldMapKernel,
    gamma: &[FieldMapKernel],
    gamma_prime: &[FieldMapKernel],
    w: &WeightSystem,
    lambdas: &[f64],
    trunc: &Truncation,
) -> Result<BoundCheck> {
    let w_kl = w.extended(lambdas)?;
    let lhs_map = insert_gamma(b, gamma, trunc)?.sub(&insert_gamma(b, gamma_prime, trunc)?)?;
    let lhs = lhs_map.kernel_norm(w)?;
    let diffs: Vec<FieldMapKernel> = gamma.iter().zip(gamma_prime).map(|(g, h)| g.sub(h)).collect::<Result<_>>()?;
    let dist = ball_norm(&diffs, w, lambdas)?;
    let rho = ball_norm(gamma, w, lambdas)?.max(ball_norm(gamma_prime, w, lambdas)?);
    let d_min = b.gamma_degree_range().map_or(1, |(lo, _)| lo.max(1));
    let rhs = dist * rho.powi(d_min as i32 - 1) * b.primed_norm(&w_kl)?;
    Ok(BoundCheck::conditional("lipschitz", lhs, rhs, rho <= 1.0 + DEFAULT_REL_SLACK))
}
