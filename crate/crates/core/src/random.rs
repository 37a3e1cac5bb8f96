//! Seeded random generators for matrices and directions.
//!
//! Used by the sampling oracles and the direction sampler, and exposed so
//! tests and examples draw instances the same way.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::symmat::SymMat;

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` derived from `seed` (splitmix64 mixing).
pub fn stream(seed: u64, index: u64) -> SeededRng {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    rng_from_seed(z ^ (z >> 31))
}

pub fn gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// Symmetric matrix with independent standard normal lower-triangle entries.
pub fn gaussian_sym<R: Rng + ?Sized>(m: usize, rng: &mut R) -> SymMat {
    SymMat::from_fn(m, |_, _| rng.sample(StandardNormal))
}

/// Symmetric matrix with lower-triangle entries uniform in `[-1, 1]`.
pub fn uniform_sym<R: Rng + ?Sized>(m: usize, rng: &mut R) -> SymMat {
    SymMat::from_fn(m, |_, _| rng.random_range(-1.0..=1.0))
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix with sign fix).
pub fn random_orthogonal<R: Rng + ?Sized>(m: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(m, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..m {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// `Pᵀ diag(eigenvalues) P` for a Haar-random orthogonal `P`.
pub fn with_random_eigenbasis<R: Rng + ?Sized>(eigenvalues: &[f64], rng: &mut R) -> SymMat {
    let m = eigenvalues.len();
    let p = random_orthogonal(m, rng);
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(eigenvalues));
    SymMat::from_dmatrix_symmetrized(&(p.transpose() * d * &p)).expect("finite by construction")
}

/// PSD matrix of order `m` and rank `rank`, nonzero eigenvalues uniform in `[lo, hi]`.
pub fn random_psd<R: Rng + ?Sized>(m: usize, rank: usize, lo: f64, hi: f64, rng: &mut R) -> SymMat {
    let mut eig: Vec<f64> = (0..m)
        .map(|i| if i < rank { rng.random_range(lo..=hi) } else { 0.0 })
        .collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    with_random_eigenbasis(&eig, rng)
}

/// Uniformly distributed point on the unit sphere in `R^n`.
pub fn unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v = gaussian_vector(n, rng);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
