#![allow(dead_code)]

use faer::Mat;
use lqts::linalg::{c, eigh, HermitianOperator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> HermitianOperator {
    let mut m = Mat::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = c(rng.random_range(-1.0..1.0), 0.0);
        for j in 0..i {
            let z = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianOperator::new(m).unwrap()
}

/// Haar-ish unitary from the eigenvectors of a random Hermitian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> Mat<faer::c64> {
    eigh(&random_hermitian(rng, dim)).unwrap().dense_vectors()
}

/// `U diag(values) U^dagger` for a random `U`.
pub fn with_spectrum(rng: &mut ChaCha8Rng, values: &[f64]) -> (HermitianOperator, Mat<faer::c64>) {
    let u = random_unitary(rng, values.len());
    (
        HermitianOperator::diagonal(values).conjugate_by(u.as_ref()),
        u,
    )
}

/// Positive semidefinite matrix with exactly `kernel` zero eigenvalues.
pub fn psd_with_kernel(
    rng: &mut ChaCha8Rng,
    dim: usize,
    kernel: usize,
) -> (HermitianOperator, Mat<faer::c64>) {
    let values: Vec<f64> = (0..dim)
        .map(|i| {
            if i < kernel {
                0.0
            } else {
                rng.random_range(0.05..1.0)
            }
        })
        .collect();
    with_spectrum(rng, &values)
}

pub fn random_density(rng: &mut ChaCha8Rng, dim: usize) -> HermitianOperator {
    let (x, _) = psd_with_kernel(rng, dim, 0);
    let t = x.trace();
    x.scale(1.0 / t)
}

pub fn mat_max_abs(m: &Mat<faer::c64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
