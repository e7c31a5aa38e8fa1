//! Seeded problem generators.

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::Rng;

use crate::error::{invalid, Result};
use crate::linalg::DataMatrix;
use crate::rng::{self, gaussian_matrix, random_orthonormal};
use crate::Scalar;

/// `N x d` standard normal entries from stream `(seed, 0)`.
pub fn gen_gaussian<T: Scalar>(n: usize, d: usize, seed: u64) -> Result<DataMatrix<T>> {
    gen_gaussian_with(&mut rng::stream(seed, 0), n, d)
}

pub fn gen_gaussian_with<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize, d: usize) -> Result<DataMatrix<T>> {
    DataMatrix::new(gaussian_matrix(rng, n, d))
}

/// `U diag(spectrum) V^T` with Haar-random column-orthonormal `U` (N x r) and
/// `V` (d x r), `r = len(spectrum)`.
pub fn gen_fixed_spectrum<T: Scalar>(n: usize, d: usize, spectrum: &[T], seed: u64) -> Result<DataMatrix<T>> {
    gen_fixed_spectrum_with(&mut rng::stream(seed, 0), n, d, spectrum)
}

pub fn gen_fixed_spectrum_with<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    d: usize,
    spectrum: &[T],
) -> Result<DataMatrix<T>> {
    let r = spectrum.len();
    if r == 0 || r > n.min(d) {
        return invalid(format!("spectrum length must lie in 1..={}, got {r}", n.min(d)));
    }
    if spectrum.iter().any(|s| !(*s > T::zero()) || !s.is_finite_value()) {
        return invalid("spectrum entries must be positive and finite");
    }
    if spectrum.windows(2).any(|w| w[1] > w[0]) {
        return invalid("spectrum must be nonincreasing");
    }
    let mut u: DMatrix<T> = random_orthonormal(rng, n, r);
    let v: DMatrix<T> = random_orthonormal(rng, d, r);
    for (j, mut col) in u.column_iter_mut().enumerate() {
        col *= spectrum[j];
    }
    DataMatrix::new(u * v.transpose())
}

/// `sigma_i = scale * rate^i`, `i = 1..=len`.
pub fn exponential_spectrum(len: usize, scale: f64, rate: f64) -> Vec<f64> {
    (1..=len).map(|i| scale * rate.powi(i as i32)).collect()
}

/// `len` values evenly spaced from `first` down to `last`.
pub fn linear_spectrum(len: usize, first: f64, last: f64) -> Vec<f64> {
    if len == 1 {
        return vec![first];
    }
    (0..len)
        .map(|i| first - i as f64 * (first - last) / (len - 1) as f64)
        .collect()
}

/// Adds `N(0, noise_sigma^2)` noise to `floor(fraction * N)` random rows;
/// returns the new matrix and the contaminated-row mask.
pub fn contaminate<T: Scalar>(
    x: &DataMatrix<T>,
    fraction: f64,
    noise_sigma: f64,
    seed: u64,
) -> Result<(DataMatrix<T>, Vec<bool>)> {
    contaminate_with(&mut rng::stream(seed, 0), x, fraction, noise_sigma)
}

pub fn contaminate_with<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    x: &DataMatrix<T>,
    fraction: f64,
    noise_sigma: f64,
) -> Result<(DataMatrix<T>, Vec<bool>)> {
    if !(0.0..=1.0).contains(&fraction) {
        return invalid(format!("fraction must lie in [0, 1], got {fraction}"));
    }
    if !(noise_sigma > 0.0 && noise_sigma.is_finite()) {
        return invalid(format!("noise_sigma must be positive, got {noise_sigma}"));
    }
    let n = x.n_samples();
    let count = ((fraction * n as f64).floor() as usize).min(n);
    let mut mask = vec![false; n];
    let mut values = x.values().clone();
    let rows = sample(rng, n, count).into_vec();
    let sigma = T::lit(noise_sigma);
    for &i in &rows {
        mask[i] = true;
        let noise: DMatrix<T> = gaussian_matrix(rng, 1, x.n_features());
        for j in 0..x.n_features() {
            values[(i, j)] += sigma * noise[(0, j)];
        }
    }
    Ok((DataMatrix::new(values)?, mask))
}
