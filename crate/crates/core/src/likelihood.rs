//! Log-likelihood `F(ρ) = Σ f_i log p_i(ρ)`, its gradient `R(ρ)` and the
//! stationarity diagnostics built on them.
//!
//! Outcomes with `f_i = 0` are dropped from both `F` and `R`. An outcome with
//! `f_i > 0` whose probability is at or below `p_floor` is a hard error: the
//! point sits on a face of the state space that the data rules out.

use crate::error::{Error, Result};
use crate::hermitian::HermitianOperator;
use crate::quantum::{Dataset, DensityMatrix, Povm};
use crate::scalar::Real;

/// The measurement model and data consumed by the objective.
#[derive(Clone, Debug)]
pub struct ObjectiveContext<T> {
    povm: Povm<T>,
    data: Dataset<T>,
    p_floor: T,
}

/// Residuals of the extremal equations `Rρ = ρ` and `RρR = ρ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationarityReport<T> {
    /// `‖R(ρ)ρ - ρ‖_F`
    pub residual_extremal: T,
    /// `‖R(ρ)ρR(ρ) - ρ‖_F`
    pub residual_rrr: T,
    /// `Tr(R(ρ)ρ)`
    pub trace_r_rho: T,
    /// `Tr(R(ρ)ρR(ρ))`
    pub trace_rrr: T,
}

/// Probabilities, objective value and gradient at one point.
#[derive(Clone, Debug)]
pub struct Evaluation<T> {
    pub probabilities: Vec<T>,
    pub loglik: T,
    pub gradient: HermitianOperator<T>,
}

impl<T: Real> ObjectiveContext<T> {
    pub fn new(povm: Povm<T>, data: Dataset<T>) -> Result<Self> {
        Self::with_floor(povm, data, T::policy().p_floor)
    }

    pub fn with_floor(povm: Povm<T>, data: Dataset<T>, p_floor: T) -> Result<Self> {
        if povm.len() != data.len() {
            return Err(Error::OutcomeCount { expected: povm.len(), found: data.len() });
        }
        Ok(Self { povm, data, p_floor })
    }

    #[inline]
    pub fn povm(&self) -> &Povm<T> {
        &self.povm
    }

    #[inline]
    pub fn data(&self) -> &Dataset<T> {
        &self.data
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.povm.dim()
    }

    #[inline]
    pub fn p_floor(&self) -> T {
        self.p_floor
    }

    /// Born probabilities, failing if an observed outcome has fallen to the floor.
    pub fn probabilities(&self, rho: &DensityMatrix<T>) -> Result<Vec<T>> {
        let p = self.povm.born_probabilities(rho)?;
        for (index, (&f, &pi)) in self.data.frequencies().iter().zip(&p).enumerate() {
            if f > T::zero() && pi <= self.p_floor {
                return Err(Error::BoundaryLikelihood { index, probability: pi.to_f64().unwrap_or(f64::NAN) });
            }
        }
        Ok(p)
    }

    fn loglik_from(&self, p: &[T]) -> T {
        self.data
            .frequencies()
            .iter()
            .zip(p)
            .filter(|(f, _)| **f > T::zero())
            .map(|(&f, &pi)| f * pi.ln())
            .sum()
    }

    fn gradient_from(&self, p: &[T]) -> HermitianOperator<T> {
        let mut r = HermitianOperator::zeros(self.dim()).expect("POVM dimension is positive");
        for ((&f, &pi), e) in self.data.frequencies().iter().zip(p).zip(self.povm.effects()) {
            if f > T::zero() {
                r = r.add_scaled(e, T::one(), f / pi).expect("effects share the POVM dimension");
            }
        }
        r
    }

    /// `F(ρ)`.
    pub fn log_likelihood(&self, rho: &DensityMatrix<T>) -> Result<T> {
        Ok(self.loglik_from(&self.probabilities(rho)?))
    }

    /// `R(ρ) = Σ_{f_i > 0} (f_i / p_i) E_i`.
    pub fn gradient(&self, rho: &DensityMatrix<T>) -> Result<HermitianOperator<T>> {
        Ok(self.gradient_from(&self.probabilities(rho)?))
    }

    /// Probabilities, `F` and `R` from a single pass over the effects.
    pub fn evaluate(&self, rho: &DensityMatrix<T>) -> Result<Evaluation<T>> {
        let probabilities = self.probabilities(rho)?;
        let loglik = self.loglik_from(&probabilities);
        let gradient = self.gradient_from(&probabilities);
        Ok(Evaluation { probabilities, loglik, gradient })
    }

    pub fn stationarity(&self, rho: &DensityMatrix<T>) -> Result<StationarityReport<T>> {
        let r = self.gradient(rho)?;
        Ok(stationarity_from(&r, rho))
    }

    /// `Tr(R(ρ) D)` for a traceless direction `D`.
    pub fn directional_derivative(&self, rho: &DensityMatrix<T>, direction: &HermitianOperator<T>) -> Result<T> {
        let trace = direction.trace();
        if trace.abs() > T::policy().traceless {
            return Err(Error::NotTraceless { trace: trace.to_f64().unwrap_or(f64::NAN) });
        }
        self.gradient(rho)?.inner(direction)
    }

    /// `F(ρ + S) - F(ρ)` for a step `S`, evaluated term by term as
    /// `Σ f_i log1p(Tr(E_i S) / p_i)` so that tiny gains are not lost to
    /// cancellation between two nearly equal objective values.
    pub fn log_likelihood_gain(&self, probabilities: &[T], step: &HermitianOperator<T>) -> Result<T> {
        let mut gain = T::zero();
        for (index, ((&f, &pi), e)) in self
            .data
            .frequencies()
            .iter()
            .zip(probabilities)
            .zip(self.povm.effects())
            .enumerate()
        {
            if f == T::zero() {
                continue;
            }
            let dp = e.inner(step)?;
            if pi + dp <= self.p_floor {
                return Err(Error::BoundaryLikelihood {
                    index,
                    probability: (pi + dp).to_f64().unwrap_or(f64::NAN),
                });
            }
            gain = gain + f * (dp / pi).ln_1p();
        }
        Ok(gain)
    }
}

/// Stationarity diagnostics from a precomputed gradient.
pub fn stationarity_from<T: Real>(r: &HermitianOperator<T>, rho: &DensityMatrix<T>) -> StationarityReport<T> {
    let rho_op = rho.as_operator();
    let rrr = r.sandwich(rho_op).expect("matching dimensions");
    let trace_r_rho = r.inner(rho_op).expect("matching dimensions");
    let trace_rrr = rrr.trace();
    StationarityReport {
        residual_extremal: extremal_residual(r, rho_op),
        residual_rrr: rrr.frobenius_distance(rho_op).expect("matching dimensions"),
        trace_r_rho,
        trace_rrr,
    }
}

/// `‖Rρ - ρ‖_F`; `Rρ` is not Hermitian, so it is formed as a plain product.
pub(crate) fn extremal_residual<T: Real>(r: &HermitianOperator<T>, rho: &HermitianOperator<T>) -> T {
    let d = r.dim();
    let prod = crate::hermitian::matmul(d, r.entries(), rho.entries());
    prod.iter()
        .zip(rho.entries())
        .map(|(a, b)| (*a - *b).norm_sqr())
        .sum::<T>()
        .sqrt()
}
