//! Density matrices, POVMs, datasets and pure states.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::hermitian::HermitianOperator;
use crate::scalar::Real;

fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    op: HermitianOperator<T>,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates trace and positivity against the numeric policy.
    pub fn new(op: HermitianOperator<T>) -> Result<Self> {
        let policy = T::policy();
        let trace = op.trace();
        if (trace - T::one()).abs() > policy.unit_trace {
            return Err(Error::TraceNotOne { trace: to_f64(trace) });
        }
        let min_eigenvalue = op.min_eigenvalue()?;
        if min_eigenvalue < -policy.psd_slack {
            return Err(Error::NotPositive { min_eigenvalue: to_f64(min_eigenvalue) });
        }
        Ok(Self { op })
    }

    /// Divides a positive semidefinite operator by its trace. Callers
    /// guarantee positivity (e.g. the operator is a sandwich `MρM`).
    pub(crate) fn normalized_unchecked(op: HermitianOperator<T>) -> Self {
        let trace = op.trace();
        Self { op: op.scale(T::one() / trace) }
    }

    /// `(1/d) I`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        let op = HermitianOperator::identity(dim)?.scale(T::one() / T::from_usize(dim).unwrap());
        Ok(Self { op })
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_pure(psi: &PureState<T>) -> Self {
        let op = HermitianOperator::projector(psi.amplitudes())
            .expect("pure state has at least one amplitude");
        Self { op }
    }

    #[inline]
    pub fn as_operator(&self) -> &HermitianOperator<T> {
        &self.op
    }

    pub fn into_operator(self) -> HermitianOperator<T> {
        self.op
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> T {
        self.op.inner(&self.op).expect("same operator")
    }

    /// `⟨ψ|ρ|ψ⟩`, clamped to `[0, 1]`.
    pub fn fidelity_with_pure(&self, psi: &PureState<T>) -> Result<T> {
        let d = self.dim();
        if psi.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: psi.dim() });
        }
        let amps = psi.amplitudes();
        let mut acc: Complex<T> = Complex::zero();
        for (i, a) in amps.iter().enumerate() {
            let mut row = Complex::zero();
            for (j, b) in amps.iter().enumerate() {
                row = row + self.op.get(i, j) * *b;
            }
            acc = acc + a.conj() * row;
        }
        Ok(acc.re.max(T::zero()).min(T::one()))
    }
}

/// Ordered POVM effects `{E_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm<T> {
    dim: usize,
    effects: Vec<HermitianOperator<T>>,
}

impl<T: Real> Povm<T> {
    /// Checks every effect is positive semidefinite and that the effects sum
    /// to the identity entrywise.
    pub fn new(effects: Vec<HermitianOperator<T>>) -> Result<Self> {
        let first = effects.first().ok_or(Error::EmptyPovm)?;
        let dim = first.dim();
        let policy = T::policy();
        let mut sum = HermitianOperator::zeros(dim)?;
        for (index, e) in effects.iter().enumerate() {
            if e.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: e.dim() });
            }
            let min_eigenvalue = e.min_eigenvalue()?;
            if min_eigenvalue < -policy.psd_slack {
                return Err(Error::EffectNotPositive { index, min_eigenvalue: to_f64(min_eigenvalue) });
            }
            sum = sum.add_scaled(e, T::one(), T::one())?;
        }
        let deviation = sum.shift_diagonal(-T::one()).max_abs();
        if deviation > policy.povm_completeness {
            return Err(Error::IncompletePovm { deviation: to_f64(deviation) });
        }
        Ok(Self { dim, effects })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.effects.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    #[inline]
    pub fn effects(&self) -> &[HermitianOperator<T>] {
        &self.effects
    }

    /// Born rule `p_i = Tr(E_i ρ)`, with round-off clamped into `[0, 1]`.
    pub fn born_probabilities(&self, rho: &DensityMatrix<T>) -> Result<Vec<T>> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: rho.dim() });
        }
        self.effects
            .iter()
            .map(|e| Ok(e.inner(rho.as_operator())?.max(T::zero()).min(T::one())))
            .collect()
    }
}

/// Observed relative frequencies, optionally with the total count they came from.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    frequencies: Vec<T>,
    total_count: Option<u64>,
}

impl<T: Real> Dataset<T> {
    pub fn from_frequencies(frequencies: Vec<T>, total_count: Option<u64>) -> Result<Self> {
        let policy = T::policy();
        for (index, &f) in frequencies.iter().enumerate() {
            if !f.is_finite() || f < T::zero() {
                return Err(Error::InvalidFrequency { index, value: to_f64(f) });
            }
        }
        let sum: T = frequencies.iter().copied().sum();
        if (sum - T::one()).abs() > policy.frequency_sum {
            return Err(Error::FrequencySum { sum: to_f64(sum) });
        }
        if let Some(total) = total_count {
            if total == 0 {
                return Err(Error::EmptyCounts);
            }
            let n = T::from_u64(total).unwrap();
            for (index, &f) in frequencies.iter().enumerate() {
                let scaled = n * f;
                if (scaled - scaled.round()).abs() > policy.count_integrality {
                    return Err(Error::CountMismatch { total, index, scaled: to_f64(scaled) });
                }
            }
        }
        Ok(Self { frequencies, total_count })
    }

    /// Normalizes raw counts; `N` becomes their sum.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptyCounts);
        }
        let n = T::from_u64(total).unwrap();
        let frequencies = counts.iter().map(|&c| T::from_u64(c).unwrap() / n).collect();
        Self::from_frequencies(frequencies, Some(total))
    }

    #[inline]
    pub fn frequencies(&self) -> &[T] {
        &self.frequencies
    }

    #[inline]
    pub fn total_count(&self) -> Option<u64> {
        self.total_count
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }
}

/// Unit-norm state vector. Basis index `b` reads as a big-endian bit string
/// over qubits, qubit 1 most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState<T> {
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> PureState<T> {
    /// Accepts an already normalized vector.
    pub fn new(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let norm = Self::norm_of(&amplitudes);
        if norm == T::zero() {
            return Err(Error::ZeroVector);
        }
        if (norm - T::one()).abs() > T::policy().state_norm {
            return Err(Error::NotNormalized { norm: to_f64(norm) });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales any nonzero vector to unit norm.
    pub fn normalized(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let norm = Self::norm_of(&amplitudes);
        if norm == T::zero() || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(Self { amplitudes: amplitudes.into_iter().map(|a| a.unscale(norm)).collect() })
    }

    fn norm_of(v: &[Complex<T>]) -> T {
        v.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
    }

    /// `n`-qubit W state: amplitude `1/√n` on each single-excitation basis vector.
    pub fn w_state(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewQubits(n));
        }
        let dim = 1usize << n;
        let amp = T::one() / T::from_usize(n).unwrap().sqrt();
        let mut amplitudes = vec![Complex::zero(); dim];
        for q in 0..n {
            amplitudes[1 << q] = Complex::new(amp, T::zero());
        }
        Ok(Self { amplitudes })
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }
}
