//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from ChaCha8 seeded with
//! `seed_from_u64(master)` and positioned on stream `index`, so problem `i` of
//! a suite gets an independent, portable sequence.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::Scalar;

pub type StreamRng = ChaCha8Rng;

pub fn stream(master: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}

/// Matrix with i.i.d. standard normal entries, filled column by column.
pub fn gaussian_matrix<T: Scalar, R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<T> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let z: f64 = rng.sample(StandardNormal);
        T::lit(z)
    })
}

/// Haar-distributed `n x k` column-orthonormal matrix (QR of a Gaussian with
/// the sign of `diag(R)` fixed).
pub fn random_orthonormal<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> DMatrix<T> {
    loop {
        let g = gaussian_matrix::<T, R>(rng, n, k);
        if let Ok((q, _)) = crate::linalg::qr_compact(&g, T::lit(crate::linalg::DEFAULT_RANK_TOL)) {
            return q;
        }
    }
}
