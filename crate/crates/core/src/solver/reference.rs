//! Exact line search along the diluted path, and first-order diagnostics for
//! the `ρ̄` subproblem.

use crate::error::{Error, Result};
use crate::hermitian::HermitianOperator;
use crate::likelihood::ObjectiveContext;
use crate::quantum::DensityMatrix;
use crate::scalar::Real;

use super::step::{combined_direction, compute_directions, DirectionPair};

/// Smallest grid point as a fraction of `t_max`.
const GRID_SPAN: f64 = 1e-6;

fn path_gain<T: Real>(ctx: &ObjectiveContext<T>, p: &[T], pair: &DirectionPair<T>, t: T) -> Result<T> {
    let step = combined_direction(pair, t).scale(t);
    match ctx.log_likelihood_gain(p, &step) {
        Ok(g) => Ok(g),
        Err(Error::BoundaryLikelihood { .. }) => Ok(T::neg_infinity()),
        Err(e) => Err(e),
    }
}

/// `grid` log-spaced points from `t_max · 1e-6` to `t_max`.
pub fn log_grid<T: Real>(t_max: T, grid: usize) -> Vec<T> {
    let lo = (t_max * T::lit(GRID_SPAN)).ln();
    let hi = t_max.ln();
    let n = grid.max(2);
    let last = T::from_usize(n - 1).unwrap();
    (0..n)
        .map(|i| {
            if i == n - 1 {
                t_max
            } else {
                (lo + (hi - lo) * T::from_usize(i).unwrap() / last).exp()
            }
        })
        .collect()
}

/// Approximate maximizer of `F(ρ + tD(t))` over `(0, t_max]`: best point of a
/// log-spaced grid, then golden-section search on its neighbouring bracket.
pub fn exact_reference_step<T: Real>(
    ctx: &ObjectiveContext<T>,
    rho: &DensityMatrix<T>,
    pair: &DirectionPair<T>,
    t_max: T,
    grid: usize,
    refinements: usize,
) -> Result<T> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(t_max > T::zero()) || !t_max.is_finite() {
        return Err(Error::InvalidConfig(format!("t_max must be positive and finite, got {t_max}")));
    }
    if pair.trace_rrr - T::one() <= T::zero() {
        return Err(Error::Stationary);
    }
    let p = ctx.probabilities(rho)?;
    let points = log_grid(t_max, grid);
    let mut gains = Vec::with_capacity(points.len());
    for &t in &points {
        gains.push(path_gain(ctx, &p, pair, t)?);
    }
    let (i, _) = gains
        .iter()
        .enumerate()
        .fold((0, T::neg_infinity()), |(bi, bg), (i, &g)| if g > bg { (i, g) } else { (bi, bg) });
    let mut best = (points[i], gains[i]);

    let mut lo = if i == 0 { T::zero() } else { points[i - 1] };
    let mut hi = if i + 1 == points.len() { t_max } else { points[i + 1] };
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut g1 = path_gain(ctx, &p, pair, x1)?;
    let mut g2 = path_gain(ctx, &p, pair, x2)?;
    for _ in 0..refinements {
        for (x, g) in [(x1, g1), (x2, g2)] {
            if g > best.1 {
                best = (x, g);
            }
        }
        if g1 < g2 {
            lo = x1;
            x1 = x2;
            g1 = g2;
            x2 = lo + inv_phi * (hi - lo);
            g2 = path_gain(ctx, &p, pair, x2)?;
        } else {
            hi = x2;
            x2 = x1;
            g2 = g1;
            x1 = hi - inv_phi * (hi - lo);
            g1 = path_gain(ctx, &p, pair, x1)?;
        }
    }
    for (x, g) in [(x1, g1), (x2, g2)] {
        if g > best.1 && x > T::zero() {
            best = (x, g);
        }
    }
    Ok(best.0)
}

/// Frobenius norm of `R - (d̄ρ⁻¹ + ρ⁻¹d̄)/2 - I` with `d̄ = ρ̄ - ρ`.
pub fn check_rhobar_subproblem<T: Real>(ctx: &ObjectiveContext<T>, rho: &DensityMatrix<T>) -> Result<T> {
    let pair = compute_directions(ctx, rho)?;
    let rho_inv = rho.as_operator().inverse_positive()?;
    let residual = pair
        .gradient
        .add_scaled(&pair.d_bar.symmetrized_product(&rho_inv)?, T::one(), -T::one())?
        .shift_diagonal(-T::one());
    Ok(residual.frobenius_norm())
}

/// The two sides of the gradient-related identity at `ρ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientRelatedCheck<T> {
    /// `Tr(R (ρ̄ - ρ))`
    pub inner_gradient: T,
    /// `Tr((ρ - ρ̄) ρ⁻¹ (ρ - ρ̄))`
    pub weighted_norm: T,
}

impl<T: Real> GradientRelatedCheck<T> {
    pub fn gap(&self) -> T {
        (self.inner_gradient - self.weighted_norm).abs()
    }
}

/// `Tr(d ρ⁻¹ d)`.
pub fn weighted_norm_sq<T: Real>(d: &HermitianOperator<T>, rho: &DensityMatrix<T>) -> Result<T> {
    let rho_inv = rho.as_operator().inverse_positive()?;
    Ok(d.sandwich(&rho_inv)?.trace())
}

pub fn gradient_related_check<T: Real>(ctx: &ObjectiveContext<T>, rho: &DensityMatrix<T>) -> Result<GradientRelatedCheck<T>> {
    let pair = compute_directions(ctx, rho)?;
    Ok(GradientRelatedCheck {
        inner_gradient: pair.gradient.inner(&pair.d_bar)?,
        weighted_norm: weighted_norm_sq(&pair.d_bar, rho)?,
    })
}
