//! Cyclic Jacobi eigensolver for dense complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary, then applies the classic real Jacobi rotation. At the dimensions
//! used here (d ≤ 16) this converges in a handful of sweeps and reaches
//! reconstruction errors near machine precision.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::hermitian::{matmul, HermitianOperator};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition `A = V Λ V†`.
#[derive(Clone, Debug)]
pub struct Eigen<T> {
    /// Eigenvalues, ascending.
    pub values: Vec<T>,
    /// Unitary `V`, row-major; column `j` is the eigenvector of `values[j]`.
    pub vectors: Vec<Complex<T>>,
}

impl<T: Real> Eigen<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Eigenvector `j` as a column.
    pub fn vector(&self, j: usize) -> Vec<Complex<T>> {
        let d = self.dim();
        (0..d).map(|i| self.vectors[i * d + j]).collect()
    }

    /// `V diag(spectrum) V†`.
    pub fn compose(&self, spectrum: &[T]) -> HermitianOperator<T> {
        let d = self.dim();
        let mut scaled = self.vectors.clone();
        for i in 0..d {
            for j in 0..d {
                scaled[i * d + j] = scaled[i * d + j].scale(spectrum[j]);
            }
        }
        let mut v_dag = vec![Complex::zero(); d * d];
        for i in 0..d {
            for j in 0..d {
                v_dag[j * d + i] = self.vectors[i * d + j].conj();
            }
        }
        HermitianOperator::symmetrized(d, matmul(d, &scaled, &v_dag))
    }

    pub fn reconstruct(&self) -> HermitianOperator<T> {
        self.compose(&self.values)
    }
}

fn off_diagonal_sq<T: Real>(d: usize, a: &[Complex<T>]) -> T {
    let mut s = T::zero();
    for i in 0..d {
        for j in (i + 1)..d {
            s = s + a[i * d + j].norm_sqr();
        }
    }
    s + s
}

pub(crate) fn jacobi_eigen<T: Real>(d: usize, entries: &[Complex<T>]) -> Result<Eigen<T>> {
    let mut a = entries.to_vec();
    let mut v = vec![Complex::zero(); d * d];
    for i in 0..d {
        v[i * d + i] = Complex::one();
    }

    let total_sq: T = a.iter().map(|z| z.norm_sqr()).sum();
    let eps = T::epsilon();
    let threshold = eps * eps * total_sq;

    let mut converged = d < 2 || off_diagonal_sq(d, &a) <= threshold;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::EigenNoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..d {
            for q in (p + 1)..d {
                rotate(d, &mut a, &mut v, p, q);
            }
        }
        converged = off_diagonal_sq(d, &a) <= threshold;
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        a[i * d + i]
            .re
            .partial_cmp(&a[j * d + j].re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| a[i * d + i].re).collect();
    let mut vectors = vec![Complex::zero(); d * d];
    for (new_j, &old_j) in order.iter().enumerate() {
        for i in 0..d {
            vectors[i * d + new_j] = v[i * d + old_j];
        }
    }
    Ok(Eigen { values, vectors })
}

fn rotate<T: Real>(d: usize, a: &mut [Complex<T>], v: &mut [Complex<T>], p: usize, q: usize) {
    let apq = a[p * d + q];
    let magnitude = apq.norm();
    if magnitude == T::zero() {
        return;
    }
    let app = a[p * d + p].re;
    let aqq = a[q * d + q].re;
    let phase = apq.unscale(magnitude);

    let two = T::lit(2.0);
    let theta = (aqq - app) / (two * magnitude);
    let t = if theta.is_infinite() {
        T::zero()
    } else {
        let sign = if theta >= T::zero() { T::one() } else { -T::one() };
        sign / (theta.abs() + (theta * theta + T::one()).sqrt())
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;

    // U restricted to (p, q): [[c, s], [-s e^{-iφ}, c e^{-iφ}]]
    let phase_conj = phase.conj();
    let u_pp = Complex::new(c, T::zero());
    let u_pq = Complex::new(s, T::zero());
    let u_qp = phase_conj.scale(-s);
    let u_qq = phase_conj.scale(c);

    // A <- A U
    for k in 0..d {
        let akp = a[k * d + p];
        let akq = a[k * d + q];
        a[k * d + p] = akp * u_pp + akq * u_qp;
        a[k * d + q] = akp * u_pq + akq * u_qq;
    }
    // A <- U† A
    for k in 0..d {
        let apk = a[p * d + k];
        let aqk = a[q * d + k];
        a[p * d + k] = u_pp.conj() * apk + u_qp.conj() * aqk;
        a[q * d + k] = u_pq.conj() * apk + u_qq.conj() * aqk;
    }
    a[p * d + q] = Complex::zero();
    a[q * d + p] = Complex::zero();
    a[p * d + p].im = T::zero();
    a[q * d + q].im = T::zero();

    for k in 0..d {
        let vkp = v[k * d + p];
        let vkq = v[k * d + q];
        v[k * d + p] = vkp * u_pp + vkq * u_qp;
        v[k * d + q] = vkp * u_pq + vkq * u_qq;
    }
}
