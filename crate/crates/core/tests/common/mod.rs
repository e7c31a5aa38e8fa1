//! Brute-force reference factorizations, independent of nalgebra's
//! decompositions. Only plain matrix products are borrowed.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use pcadc::bench::generate::gen_gaussian;

pub fn gaussian(n: usize, d: usize, seed: u64) -> DMatrix<f64> {
    gen_gaussian::<f64>(n, d, seed).unwrap().into_inner()
}

/// Cyclic symmetric Jacobi: eigenvalues descending and matching vectors.
pub fn jacobi_eig(s: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = s.nrows();
    let mut a = s.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)] * a[(i, j)])
            .sum();
        if off.sqrt() <= 1e-15 * a.norm().max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap());
    let vals = order.iter().map(|&i| a[(i, i)]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (vals, vecs)
}

/// One-sided (Hestenes) Jacobi SVD of an m x n matrix with m >= n:
/// `(U, sigma, V)` with sigma descending, thin factors.
pub fn jacobi_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    assert!(a.nrows() >= a.ncols(), "oracle expects a tall matrix");
    let n = a.ncols();
    let mut u = a.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = u.column(p).norm_squared();
                let beta = u.column(q).norm_squared();
                let gamma = u.column(p).dot(&u.column(q));
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut u, &mut v] {
                    for k in 0..m.nrows() {
                        let xp = m[(k, p)];
                        let xq = m[(k, q)];
                        m[(k, p)] = c * xp - s * xq;
                        m[(k, q)] = s * xp + c * xq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sig: Vec<f64> = (0..n).map(|j| u.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sig[j].partial_cmp(&sig[i]).unwrap());
    let sigma: Vec<f64> = order.iter().map(|&j| sig[j]).collect();
    let uu = DMatrix::from_fn(a.nrows(), n, |r, c| {
        let j = order[c];
        if sig[j] > 0.0 {
            u[(r, j)] / sig[j]
        } else {
            0.0
        }
    });
    let vv = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (uu, sigma, vv)
}

/// Singular values of any matrix through the oracle.
pub fn oracle_singulars(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() >= a.ncols() {
        jacobi_svd(a).1
    } else {
        jacobi_svd(&a.transpose()).1
    }
}

/// Modified Gram-Schmidt with `diag(R) > 0`.
pub fn mgs_qr(a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let (m, n) = a.shape();
    let mut q = a.clone();
    let mut r = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            let rij = q.column(i).dot(&q.column(j));
            r[(i, j)] = rij;
            let qi: DVector<f64> = q.column(i).into_owned();
            let mut col = q.column_mut(j);
            col -= qi * rij;
        }
        let norm = q.column(j).norm();
        r[(j, j)] = norm;
        let mut col = q.column_mut(j);
        col /= norm;
    }
    assert_eq!(q.nrows(), m);
    (q, r)
}

/// Orthonormal basis of the column span via the oracle.
pub fn oracle_basis(a: &DMatrix<f64>) -> DMatrix<f64> {
    mgs_qr(a).0
}

/// Largest principal angle through the oracle SVD of `Q1^T Q2`.
pub fn oracle_max_angle(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let qa = oracle_basis(a);
    let qb = oracle_basis(b);
    let cosines = oracle_singulars(&qa.tr_mul(&qb));
    let smallest = cosines.iter().copied().fold(f64::INFINITY, f64::min).min(1.0);
    // sin of the largest angle is robust near zero
    let proj = &qb - &qa * qa.tr_mul(&qb);
    let sin = oracle_singulars(&proj)[0].min(1.0);
    if smallest > 0.7 {
        sin.asin()
    } else {
        smallest.acos()
    }
}

use pcadc::SpectralFunction;

/// One descriptor of every kind; row-wise kinds are sized for `rows` rows.
pub fn function_zoo(rows: usize, seed: u64) -> Vec<SpectralFunction<f64>> {
    let weights: Vec<f64> = gaussian(rows, 1, seed).iter().map(|v| 0.5 + v.abs()).collect();
    let w = nalgebra::DVector::from_vec(weights);
    vec![
        SpectralFunction::IndicatorSpectralBall,
        SpectralFunction::IndicatorFrobeniusBall,
        SpectralFunction::indicator_schatten_ball(3.0).unwrap(),
        SpectralFunction::schatten_norm(1.0).unwrap(),
        SpectralFunction::schatten_norm(2.0).unwrap(),
        SpectralFunction::schatten_norm(3.0).unwrap(),
        SpectralFunction::schatten_norm(f64::INFINITY).unwrap(),
        SpectralFunction::schatten_power(4.0).unwrap(),
        SpectralFunction::schatten_power(4.0 / 3.0).unwrap(),
        SpectralFunction::schatten_power(2.5).unwrap(),
        SpectralFunction::SpectralNormSqHalf,
        SpectralFunction::NuclearNormSqHalf,
        SpectralFunction::FrobeniusSqHalf,
        SpectralFunction::FrobeniusNorm,
        SpectralFunction::rowwise_ball(w.clone(), 0.1).unwrap(),
        SpectralFunction::rowwise_sqrt(w).unwrap(),
    ]
}

/// A point in the domain of `f` (indicator balls: scaled to radius 0.9 or
/// exactly onto the boundary; row-wise balls: each row strictly inside).
pub fn domain_point(f: &SpectralFunction<f64>, rows: usize, cols: usize, seed: u64, boundary: bool) -> DMatrix<f64> {
    let a = gaussian(rows, cols, seed);
    let radius = if boundary { 1.0 } else { 0.9 };
    match f {
        SpectralFunction::IndicatorSpectralBall => &a * (radius / oracle_singulars(&a)[0]),
        SpectralFunction::IndicatorFrobeniusBall => &a * (radius / a.norm()),
        SpectralFunction::IndicatorSchattenBall { q } => {
            let s = oracle_singulars(&a);
            let norm = s.iter().map(|v| v.powf(*q)).sum::<f64>().powf(1.0 / q);
            &a * (radius / norm)
        }
        SpectralFunction::RowwiseBallPenalty { row_norms, .. } => {
            let mut out = a.clone();
            for (i, mut row) in out.row_iter_mut().enumerate() {
                let n = row.norm();
                if n > 0.0 {
                    row *= 0.8 * row_norms[i] / n;
                }
            }
            out
        }
        _ => a,
    }
}
