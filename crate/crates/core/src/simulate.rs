//! Experiment inputs: the two-outcome cycling counterexample, Pauli-basis
//! POVMs, noiseless and multinomially sampled datasets, and random instances
//! for property checks.

use num_complex::Complex;
use num_traits::Zero;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::hermitian::HermitianOperator;
use crate::quantum::{Dataset, DensityMatrix, Povm, PureState};
use crate::scalar::Real;

/// PRNG used by [`sample_dataset`]; recorded in simulated dataset files.
pub const SAMPLER_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.3), inverse-CDF multinomial";

/// Seed for reproducible sampling.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct RngSeed(pub u64);

/// A complete estimation problem.
#[derive(Clone, Debug)]
pub struct ExperimentSpec<T> {
    pub name: String,
    pub dim: usize,
    pub povm: Povm<T>,
    pub dataset: Dataset<T>,
    pub truth: Option<DensityMatrix<T>>,
}

/// One qubit measured three times in the Z basis: `|0⟩` once, `|1⟩` twice.
/// Pure RρR started at `I/2` cycles on this data.
pub fn counterexample_spec<T: Real>() -> ExperimentSpec<T> {
    let e0 = HermitianOperator::from_diagonal(&[T::one(), T::zero()]).expect("2x2");
    let e1 = HermitianOperator::from_diagonal(&[T::zero(), T::one()]).expect("2x2");
    ExperimentSpec {
        name: "counterexample".into(),
        dim: 2,
        povm: Povm::new(vec![e0, e1]).expect("projective measurement is complete"),
        dataset: Dataset::from_counts(&[1, 2]).expect("nonzero counts"),
        truth: None,
    }
}

/// `n`-qubit W state measured with [`pauli_povm`]. Noiseless unless `sampling`
/// is given.
pub fn w_state_spec<T: Real>(n: usize, sampling: Option<(u64, RngSeed)>) -> Result<ExperimentSpec<T>> {
    let psi = PureState::<T>::w_state(n)?;
    let truth = DensityMatrix::from_pure(&psi);
    let povm = pauli_povm(n)?;
    let dataset = match sampling {
        Some((shots, seed)) => sample_dataset(&truth, &povm, shots, seed)?,
        None => noiseless_dataset(&truth, &povm)?,
    };
    Ok(ExperimentSpec { name: format!("w-state-{n}"), dim: 1 << n, povm, dataset, truth: Some(truth) })
}

fn pauli_eigenvectors<T: Real>() -> [[[Complex<T>; 2]; 2]; 3] {
    let h = T::one() / T::lit(2.0).sqrt();
    let o = T::zero();
    let c = |re: T, im: T| Complex::new(re, im);
    [
        // X: |+⟩, |−⟩
        [[c(h, o), c(h, o)], [c(h, o), c(-h, o)]],
        // Y: (|0⟩ + i|1⟩)/√2, (|0⟩ − i|1⟩)/√2
        [[c(h, o), c(o, h)], [c(h, o), c(o, -h)]],
        // Z: |0⟩, |1⟩
        [[c(T::one(), o), c(o, o)], [c(o, o), c(T::one(), o)]],
    ]
}

/// All `3ⁿ` tensor-product Pauli settings with `2ⁿ` outcomes each, every
/// setting weighted `1/3ⁿ`.
///
/// Effect index = `setting * 2ⁿ + outcome`. Settings enumerate `{X, Y, Z}ⁿ`
/// with qubit 1 most significant; outcome bit 0 is the `+1` eigenvector.
pub fn pauli_povm<T: Real>(n: usize) -> Result<Povm<T>> {
    if !(1..=4).contains(&n) {
        return Err(Error::QubitRange(n));
    }
    let basis = pauli_eigenvectors::<T>();
    let settings = 3usize.pow(n as u32);
    let outcomes = 1usize << n;
    let weight = T::one() / T::from_usize(settings).unwrap();
    let mut effects = Vec::with_capacity(settings * outcomes);
    for setting in 0..settings {
        let axes: Vec<usize> = (0..n).map(|q| (setting / 3usize.pow((n - 1 - q) as u32)) % 3).collect();
        for outcome in 0..outcomes {
            let mut v = vec![Complex::new(T::one(), T::zero())];
            for (q, &axis) in axes.iter().enumerate() {
                let bit = (outcome >> (n - 1 - q)) & 1;
                let local = basis[axis][bit];
                v = v.iter().flat_map(|a| local.iter().map(move |b| *a * *b)).collect();
            }
            effects.push(HermitianOperator::projector(&v)?.scale(weight));
        }
    }
    Povm::new(effects)
}

/// Exact Born probabilities as frequencies; values below the snap tolerance
/// become exact zeros.
pub fn noiseless_dataset<T: Real>(rho: &DensityMatrix<T>, povm: &Povm<T>) -> Result<Dataset<T>> {
    let snap = T::policy().probability_snap;
    let mut f = povm.born_probabilities(rho)?;
    for x in f.iter_mut() {
        if *x < snap {
            *x = T::zero();
        }
    }
    let total: T = f.iter().copied().sum();
    Dataset::from_frequencies(f.into_iter().map(|x| x / total).collect(), None)
}

/// Outcome counts of `shots` draws, by inverse-CDF sampling from the Born
/// probabilities.
pub fn sample_counts<T: Real>(rho: &DensityMatrix<T>, povm: &Povm<T>, shots: u64, seed: RngSeed) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(Error::EmptyCounts);
    }
    let p = povm.born_probabilities(rho)?;
    let total: f64 = p.iter().map(|x| x.to_f64().unwrap()).sum();
    let mut acc = 0.0;
    let cumulative: Vec<f64> = p
        .iter()
        .map(|x| {
            acc += x.to_f64().unwrap() / total;
            acc
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
    let mut counts = vec![0u64; p.len()];
    let last = p.len() - 1;
    for _ in 0..shots {
        let u: f64 = rng.gen();
        let idx = cumulative.partition_point(|&c| c <= u).min(last);
        counts[idx] += 1;
    }
    Ok(counts)
}

/// [`sample_counts`] as a dataset with `N = shots`.
pub fn sample_dataset<T: Real>(rho: &DensityMatrix<T>, povm: &Povm<T>, shots: u64, seed: RngSeed) -> Result<Dataset<T>> {
    Dataset::from_counts(&sample_counts(rho, povm, shots, seed)?)
}

fn normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    let x: f64 = StandardNormal.sample(rng);
    T::lit(x)
}

fn ginibre<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex<T>> {
    (0..d * d).map(|_| Complex::new(normal(rng), normal(rng))).collect()
}

/// `G G†` for a complex Gaussian `G`.
fn wishart<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianOperator<T> {
    let g = ginibre::<T, R>(d, rng);
    let mut out = vec![Complex::zero(); d * d];
    for i in 0..d {
        for j in 0..d {
            out[i * d + j] = (0..d).map(|k| g[i * d + k] * g[j * d + k].conj()).fold(Complex::zero(), |a, b| a + b);
        }
    }
    HermitianOperator::symmetrized(d, out)
}

/// Hermitian matrix with standard Gaussian entries.
pub fn random_hermitian<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianOperator<T> {
    HermitianOperator::symmetrized(d, ginibre(d, rng))
}

/// Traceless Hermitian direction.
pub fn random_traceless<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> HermitianOperator<T> {
    let h = random_hermitian::<T, R>(d, rng);
    let shift = h.trace() / T::from_usize(d).unwrap();
    h.shift_diagonal(-shift)
}

/// Full-rank density matrix: a normalized Wishart sample mixed with 5% of
/// `I/d`, which keeps the smallest eigenvalue at least `0.05/d`.
pub fn random_density_matrix<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix<T> {
    let w = wishart::<T, R>(d, rng);
    let w = w.scale(T::one() / w.trace());
    let mix = T::lit(0.05);
    let op = w.scale(T::one() - mix).shift_diagonal(mix / T::from_usize(d).unwrap());
    DensityMatrix::new(op).expect("convex mixture of states")
}

pub fn random_pure_state<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> PureState<T> {
    loop {
        let v = (0..d).map(|_| Complex::new(normal(rng), normal(rng))).collect();
        if let Ok(psi) = PureState::normalized(v) {
            return psi;
        }
    }
}

/// Unitary from the eigenvectors of a random Hermitian matrix, row-major.
pub fn random_unitary<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex<T>> {
    random_hermitian::<T, R>(d, rng).eigen().expect("Jacobi converges").vectors
}

/// POVM with `n_effects` full-rank random effects: `E_k = S^{-1/2} W_k S^{-1/2}`
/// with `W_k` Wishart and `S = Σ W_k`.
pub fn random_povm<T: Real, R: Rng + ?Sized>(d: usize, n_effects: usize, rng: &mut R) -> Povm<T> {
    let raw: Vec<HermitianOperator<T>> = (0..n_effects.max(1)).map(|_| wishart(d, rng)).collect();
    let mut sum = HermitianOperator::zeros(d).expect("d >= 1");
    for w in &raw {
        sum = sum.add_scaled(w, T::one(), T::one()).expect("same dimension");
    }
    let inv_sqrt = sum.map_spectrum(|l| T::one() / l.sqrt()).expect("Jacobi converges");
    let effects = raw.iter().map(|w| inv_sqrt.sandwich(w).expect("same dimension")).collect();
    Povm::new(effects).expect("normalized effects sum to the identity")
}

/// Flat-Dirichlet frequency vector.
pub fn random_frequencies<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<T> {
    let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| T::lit(x / total)).collect()
}
