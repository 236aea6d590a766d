//! Single-step maps: RρR, the diluted update, and the search directions
//! along its curved path.

use crate::error::Result;
use crate::hermitian::HermitianOperator;
use crate::likelihood::ObjectiveContext;
use crate::quantum::DensityMatrix;
use crate::scalar::Real;

/// Ascent directions at one point, with the gradient they were built from.
#[derive(Clone, Debug)]
pub struct DirectionPair<T> {
    /// `(Rρ + ρR)/2 - ρ`
    pub d_bar: HermitianOperator<T>,
    /// `RρR / Tr(RρR) - ρ`
    pub d_tilde: HermitianOperator<T>,
    /// `Tr(RρR)`
    pub trace_rrr: T,
    pub gradient: HermitianOperator<T>,
}

/// `RρR / Tr(RρR)` for a precomputed `R`.
pub(crate) fn rrhor_from<T: Real>(r: &HermitianOperator<T>, rho: &DensityMatrix<T>) -> DensityMatrix<T> {
    let rrr = r.sandwich(rho.as_operator()).expect("matching dimensions");
    DensityMatrix::normalized_unchecked(rrr)
}

/// `(I + tR) ρ (I + tR)` normalized, for a precomputed `R`.
pub(crate) fn diluted_from<T: Real>(r: &HermitianOperator<T>, rho: &DensityMatrix<T>, t: T) -> DensityMatrix<T> {
    let m = r.scale(t / (T::one() + t)).shift_diagonal(T::one() / (T::one() + t));
    DensityMatrix::normalized_unchecked(m.sandwich(rho.as_operator()).expect("matching dimensions"))
}

pub(crate) fn directions_from<T: Real>(r: HermitianOperator<T>, rho: &DensityMatrix<T>) -> DirectionPair<T> {
    let rho_op = rho.as_operator();
    let rho_bar = r.symmetrized_product(rho_op).expect("matching dimensions");
    let rrr = r.sandwich(rho_op).expect("matching dimensions");
    let trace_rrr = rrr.trace();
    let d_bar = rho_bar.add_scaled(rho_op, T::one(), -T::one()).expect("matching dimensions");
    let d_tilde = rrr.add_scaled(rho_op, T::one() / trace_rrr, -T::one()).expect("matching dimensions");
    DirectionPair { d_bar, d_tilde, trace_rrr, gradient: r }
}

/// One pure RρR iteration.
pub fn rrhor_step<T: Real>(ctx: &ObjectiveContext<T>, rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
    Ok(rrhor_from(&ctx.gradient(rho)?, rho))
}

/// One diluted iteration with stepsize `t`.
pub fn diluted_step<T: Real>(ctx: &ObjectiveContext<T>, rho: &DensityMatrix<T>, t: T) -> Result<DensityMatrix<T>> {
    Ok(diluted_from(&ctx.gradient(rho)?, rho, t))
}

pub fn compute_directions<T: Real>(ctx: &ObjectiveContext<T>, rho: &DensityMatrix<T>) -> Result<DirectionPair<T>> {
    Ok(directions_from(ctx.gradient(rho)?, rho))
}

/// `q(t) = 1 + 2t + t² Tr(RρR)`.
pub fn path_denominator<T: Real>(trace_rrr: T, t: T) -> T {
    T::one() + (t + t) + t * t * trace_rrr
}

/// `D(t)` with `ρ + t D(t)` equal to the diluted step.
pub fn combined_direction<T: Real>(pair: &DirectionPair<T>, t: T) -> HermitianOperator<T> {
    let q = path_denominator(pair.trace_rrr, t);
    pair.d_bar
        .add_scaled(&pair.d_tilde, (T::one() + T::one()) / q, t * pair.trace_rrr / q)
        .expect("directions share a dimension")
}

/// Sufficient-increase test `F(ρ + tD) > F(ρ) + γ t Tr(R D)`. A trial point
/// that zeroes an observed probability is rejected.
pub fn armijo_accepts<T: Real>(
    ctx: &ObjectiveContext<T>,
    rho: &DensityMatrix<T>,
    pair: &DirectionPair<T>,
    t: T,
    gamma: T,
) -> Result<bool> {
    let p = ctx.probabilities(rho)?;
    Ok(armijo_gain(ctx, &p, pair, t, gamma)?.is_some())
}

/// Gain `F(ρ + tD) - F(ρ)` when the step passes the Armijo test.
pub(crate) fn armijo_gain<T: Real>(
    ctx: &ObjectiveContext<T>,
    probabilities: &[T],
    pair: &DirectionPair<T>,
    t: T,
    gamma: T,
) -> Result<Option<T>> {
    let d = combined_direction(pair, t);
    let step = d.scale(t);
    let threshold = gamma * t * pair.gradient.inner(&d)?;
    match ctx.log_likelihood_gain(probabilities, &step) {
        Ok(gain) if gain > threshold => Ok(Some(gain)),
        Ok(_) | Err(crate::Error::BoundaryLikelihood { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}
