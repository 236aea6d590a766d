//! Scalar abstraction and the shared numeric policy.
//!
//! Every type in the crate is generic over a [`Real`] scalar. `f64` carries the
//! reference tolerances; `f32` gets a loosened policy scaled to its precision.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FromPrimitive};

/// Complex entry type used by all operators.
pub type ComplexScalar<T> = Complex<T>;

/// Floating-point scalar usable by the estimator: `f32` or `f64`.
pub trait Real:
    Float + FromPrimitive + Debug + Display + LowerExp + Default + Sum + Send + Sync + 'static
{
    /// Tolerances tuned for this precision.
    fn policy() -> NumericPolicy<Self>;

    /// Converts an `f64` literal. Panics only if the value is not representable,
    /// which cannot happen for the finite literals used in this crate.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }
}

/// All tolerances used by constructors, the likelihood and the solver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericPolicy<T> {
    /// Largest `|a_ij - conj(a_ji)|` accepted when building a Hermitian operator.
    pub hermitian_defect: T,
    /// Relative Frobenius bound on `V Λ V† - A` after an eigendecomposition.
    pub eigen_reconstruction: T,
    /// Allowed `|Tr ρ - 1|` for a density matrix.
    pub unit_trace: T,
    /// Most negative eigenvalue still counted as positive semidefinite.
    pub psd_slack: T,
    /// Entrywise bound on `Σ E_i - I` for a POVM.
    pub povm_completeness: T,
    /// Allowed `|Σ f_i - 1|` for a dataset.
    pub frequency_sum: T,
    /// Allowed distance of `N f_i` from an integer.
    pub count_integrality: T,
    /// Round-off admitted outside `[0, 1]` before a probability is clamped.
    pub probability_slack: T,
    /// Allowed `|Σ p_i - 1|` for Born probabilities.
    pub probability_sum: T,
    /// Allowed `|Tr D|` for a feasible direction.
    pub traceless: T,
    /// Allowed `| ‖ψ‖ - 1 |` for a pure state.
    pub state_norm: T,
    /// Largest condition number accepted when inverting a density matrix.
    pub max_condition: T,
    /// Default probability floor of the likelihood.
    pub p_floor: T,
    /// Noiseless frequencies below this are treated as exact zeros.
    pub probability_snap: T,
    /// Distance at which a revisited iterate counts as a cycle.
    pub cycle: T,
}

impl Real for f64 {
    fn policy() -> NumericPolicy<f64> {
        NumericPolicy {
            hermitian_defect: 1e-12,
            eigen_reconstruction: 1e-10,
            unit_trace: 1e-12,
            psd_slack: 1e-10,
            povm_completeness: 1e-10,
            frequency_sum: 1e-12,
            count_integrality: 1e-9,
            probability_slack: 1e-12,
            probability_sum: 1e-10,
            traceless: 1e-10,
            state_norm: 1e-12,
            max_condition: 1e12,
            p_floor: 1e-300,
            probability_snap: 1e-14,
            cycle: 1e-10,
        }
    }
}

impl Real for f32 {
    fn policy() -> NumericPolicy<f32> {
        NumericPolicy {
            hermitian_defect: 1e-5,
            eigen_reconstruction: 1e-4,
            unit_trace: 1e-5,
            psd_slack: 1e-4,
            povm_completeness: 1e-4,
            frequency_sum: 1e-5,
            count_integrality: 1e-3,
            probability_slack: 1e-5,
            probability_sum: 1e-4,
            traceless: 1e-4,
            state_norm: 1e-5,
            max_condition: 1e6,
            p_floor: 1e-37,
            probability_snap: 1e-6,
            cycle: 1e-5,
        }
    }
}
