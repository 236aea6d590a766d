//! Dense Hermitian operators.
//!
//! Every operator is stored row-major as `d × d` complex entries with exact
//! conjugate symmetry. Products of two Hermitian matrices are general complex
//! matrices; they are formed in scratch buffers and only the Hermitian
//! combinations (`MρM`, `(AB + BA)/2`) are returned.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::eigen::{jacobi_eigen, Eigen};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense Hermitian `d × d` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator<T> {
    dim: usize,
    entries: Vec<Complex<T>>,
}

pub(crate) fn matmul<T: Real>(dim: usize, a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut out = vec![Complex::zero(); dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i * dim + k];
            if aik.is_zero() {
                continue;
            }
            let row = &b[k * dim..(k + 1) * dim];
            let dst = &mut out[i * dim..(i + 1) * dim];
            for (o, bkj) in dst.iter_mut().zip(row) {
                *o = *o + aik * *bkj;
            }
        }
    }
    out
}

impl<T: Real> HermitianOperator<T> {
    /// Builds an operator from row-major entries.
    ///
    /// Rejects non-finite values and conjugate-symmetry defects above the
    /// policy tolerance, then symmetrizes exactly.
    pub fn from_entries(dim: usize, entries: Vec<Complex<T>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        if entries.len() != dim * dim {
            return Err(Error::EntryCount { expected: dim * dim, found: entries.len() });
        }
        for (idx, z) in entries.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFiniteEntry { row: idx / dim, col: idx % dim });
            }
        }
        let tol = T::policy().hermitian_defect;
        for i in 0..dim {
            for j in i..dim {
                let defect = (entries[i * dim + j] - entries[j * dim + i].conj()).norm();
                if defect > tol {
                    return Err(Error::NotHermitian {
                        defect: defect.to_f64().unwrap_or(f64::NAN),
                        row: i,
                        col: j,
                    });
                }
            }
        }
        Ok(Self::symmetrized(dim, entries))
    }

    /// Builds an operator from rows of complex entries.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            entries.extend_from_slice(row);
        }
        Self::from_entries(dim, entries)
    }

    /// Projects an arbitrary square buffer onto its Hermitian part.
    pub(crate) fn symmetrized(dim: usize, mut entries: Vec<Complex<T>>) -> Self {
        let half = T::lit(0.5);
        for i in 0..dim {
            entries[i * dim + i].im = T::zero();
            for j in (i + 1)..dim {
                let upper = entries[i * dim + j];
                let lower = entries[j * dim + i];
                let avg = (upper + lower.conj()).scale(half);
                entries[i * dim + j] = avg;
                entries[j * dim + i] = avg.conj();
            }
        }
        Self { dim, entries }
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(0));
        }
        Ok(Self { dim, entries: vec![Complex::zero(); dim * dim] })
    }

    /// The identity `I_d`.
    pub fn identity(dim: usize) -> Result<Self> {
        let mut op = Self::zeros(dim)?;
        for i in 0..dim {
            op.entries[i * dim + i] = Complex::one();
        }
        Ok(op)
    }

    /// Real diagonal matrix.
    pub fn from_diagonal(diag: &[T]) -> Result<Self> {
        let dim = diag.len();
        let mut op = Self::zeros(dim)?;
        for (i, &v) in diag.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteEntry { row: i, col: i });
            }
            op.entries[i * dim + i] = Complex::new(v, T::zero());
        }
        Ok(op)
    }

    /// Outer product `|v⟩⟨v|`.
    pub fn projector(v: &[Complex<T>]) -> Result<Self> {
        let dim = v.len();
        let mut op = Self::zeros(dim)?;
        for i in 0..dim {
            for j in 0..dim {
                op.entries[i * dim + j] = v[i] * v[j].conj();
            }
        }
        Ok(Self::symmetrized(dim, op.entries))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex<T> {
        self.entries[row * self.dim + col]
    }

    /// Row-major entries.
    #[inline]
    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    /// Real parts of the diagonal.
    pub fn diagonal(&self) -> Vec<T> {
        (0..self.dim).map(|i| self.entries[i * self.dim + i].re).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Complex<T>>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    /// `αA + βB`.
    pub fn add_scaled(&self, other: &Self, alpha: T, beta: T) -> Result<Self> {
        self.check_dim(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.scale(alpha) + b.scale(beta))
            .collect();
        Ok(Self { dim: self.dim, entries })
    }

    pub fn scale(&self, alpha: T) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|z| z.scale(alpha)).collect() }
    }

    /// `A + αI`.
    pub fn shift_diagonal(&self, alpha: T) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim {
            out.entries[i * self.dim + i].re = out.entries[i * self.dim + i].re + alpha;
        }
        out
    }

    /// `M ρ M` where `self` plays `M`.
    pub fn sandwich(&self, rho: &Self) -> Result<Self> {
        self.check_dim(rho)?;
        let left = matmul(self.dim, &self.entries, &rho.entries);
        Ok(Self::symmetrized(self.dim, matmul(self.dim, &left, &self.entries)))
    }

    /// `(AB + BA) / 2`.
    pub fn symmetrized_product(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        // (AB)† = BA for Hermitian A, B, so the Hermitian part of AB is the answer.
        Ok(Self::symmetrized(self.dim, matmul(self.dim, &self.entries, &other.entries)))
    }

    pub fn trace(&self) -> T {
        (0..self.dim).map(|i| self.entries[i * self.dim + i].re).sum()
    }

    /// `Tr(AB)`, real for Hermitian arguments.
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.check_dim(other)?;
        // Tr(AB) = Σ_ij A_ij B_ji = Σ_ij A_ij conj(B_ij).
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum())
    }

    pub fn frobenius_norm(&self) -> T {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn frobenius_distance(&self, other: &Self) -> Result<T> {
        self.check_dim(other)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (*a - *b).norm_sqr())
            .sum::<T>()
            .sqrt())
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> T {
        self.entries.iter().fold(T::zero(), |m, z| m.max(z.norm()))
    }

    /// `U A U†` for a square matrix `u` given row-major.
    pub fn conjugate_by(&self, u: &[Complex<T>]) -> Result<Self> {
        let d = self.dim;
        if u.len() != d * d {
            return Err(Error::EntryCount { expected: d * d, found: u.len() });
        }
        let mut u_dag = vec![Complex::zero(); d * d];
        for i in 0..d {
            for j in 0..d {
                u_dag[j * d + i] = u[i * d + j].conj();
            }
        }
        let left = matmul(d, u, &self.entries);
        Ok(Self::symmetrized(d, matmul(d, &left, &u_dag)))
    }

    /// `A = V Λ V†` with eigenvalues ascending.
    pub fn eigen(&self) -> Result<Eigen<T>> {
        jacobi_eigen(self.dim, &self.entries)
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        Ok(self.eigen()?.values[0])
    }

    /// Applies a scalar function to the spectrum: `V f(Λ) V†`.
    pub fn map_spectrum(&self, f: impl Fn(T) -> T) -> Result<Self> {
        let eig = self.eigen()?;
        let mapped: Vec<T> = eig.values.iter().map(|&l| f(l)).collect();
        Ok(eig.compose(&mapped))
    }

    /// Inverse of a positive definite operator, refusing condition numbers
    /// above the policy limit.
    pub fn inverse_positive(&self) -> Result<Self> {
        let eig = self.eigen()?;
        let lo = eig.values[0];
        let hi = eig.values[self.dim - 1];
        if lo <= T::zero() || hi / lo > T::policy().max_condition {
            let condition = if lo <= T::zero() { f64::INFINITY } else { (hi / lo).to_f64().unwrap_or(f64::INFINITY) };
            return Err(Error::IllConditioned { condition });
        }
        let inv: Vec<T> = eig.values.iter().map(|&l| T::one() / l).collect();
        Ok(eig.compose(&inv))
    }
}
