//! Dense factorizations and spectral quantities.
//!
//! Every factorization here is "compact": only the part of the spectrum above
//! the numerical-rank threshold is kept. The threshold is relative,
//! `rank_tol * max_value * max(rows, cols)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{invalid, Error, Result};
use crate::Scalar;

/// Default relative numerical-rank threshold.
pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// Dense sample matrix, one sample per row.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix<T: Scalar> {
    values: DMatrix<T>,
}

impl<T: Scalar> DataMatrix<T> {
    pub fn new(values: DMatrix<T>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return invalid("data matrix must have at least one row and one column");
        }
        ensure_finite(&values, "data matrix")?;
        Ok(Self { values })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return invalid("ragged rows");
        }
        Self::new(DMatrix::from_fn(n, d, |i, j| rows[i][j]))
    }

    pub fn n_samples(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<T> {
        &self.values
    }

    pub fn into_inner(self) -> DMatrix<T> {
        self.values
    }

    /// Subtracts the column means. Off by default everywhere in the crate.
    pub fn centered(&self) -> Self {
        let n = T::from_usize_lossy(self.n_samples());
        let mut values = self.values.clone();
        for mut col in values.column_iter_mut() {
            let mean = col.sum() / n;
            col.add_scalar_mut(-mean);
        }
        Self { values }
    }
}

impl<T: Scalar> AsRef<DMatrix<T>> for DataMatrix<T> {
    fn as_ref(&self) -> &DMatrix<T> {
        &self.values
    }
}

/// `left * diag(singulars) * right^T`, keeping only singular values above the
/// rank threshold.
#[derive(Debug, Clone)]
pub struct CompactSvd<T: Scalar> {
    pub left: DMatrix<T>,
    pub singulars: DVector<T>,
    pub right: DMatrix<T>,
}

impl<T: Scalar> CompactSvd<T> {
    pub fn rank(&self) -> usize {
        self.singulars.len()
    }

    pub fn reconstruct(&self) -> DMatrix<T> {
        let mut scaled = self.left.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= self.singulars[j];
        }
        scaled * self.right.transpose()
    }

    /// `left * diag(f(singulars)) * right^T`.
    pub fn recompose_with(&self, f: impl Fn(T) -> T) -> DMatrix<T> {
        let mut scaled = self.left.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.singulars[j]);
        }
        scaled * self.right.transpose()
    }

    /// The polar factor `left * right^T`.
    pub fn polar(&self) -> DMatrix<T> {
        &self.left * self.right.transpose()
    }
}

/// `vectors * diag(eigenvalues) * vectors^T` restricted to positive eigenvalues,
/// sorted in nonincreasing order.
#[derive(Debug, Clone)]
pub struct CompactEig<T: Scalar> {
    pub vectors: DMatrix<T>,
    pub eigenvalues: DVector<T>,
}

impl<T: Scalar> CompactEig<T> {
    pub fn rank(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `vectors * diag(f(eigenvalues)) * vectors^T`.
    pub fn spectral_map(&self, f: impl Fn(T) -> T) -> DMatrix<T> {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.eigenvalues[j]);
        }
        scaled * self.vectors.transpose()
    }
}

pub(crate) fn ensure_finite<T: Scalar>(a: &DMatrix<T>, what: &str) -> Result<()> {
    if a.iter().all(|x| x.is_finite_value()) {
        Ok(())
    } else {
        invalid(format!("{what} has non-finite entries"))
    }
}

/// Compact SVD with the sign convention "first nonzero entry of every left
/// singular vector is nonnegative".
pub fn svd_compact<T: Scalar>(a: &DMatrix<T>, rank_tol: T) -> Result<CompactSvd<T>> {
    ensure_finite(a, "svd input")?;
    if rank_tol < T::zero() {
        return invalid("rank_tol must be nonnegative");
    }
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Ok(CompactSvd {
            left: DMatrix::zeros(m, 0),
            singulars: DVector::zeros(0),
            right: DMatrix::zeros(n, 0),
        });
    }
    let (u, sv, vt) = svd_raw(a);

    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].partial_cmp(&sv[i]).unwrap_or(std::cmp::Ordering::Equal));
    let sigma_max = order.first().map_or(T::zero(), |&i| sv[i]);
    let cutoff = rank_tol * sigma_max * T::from_usize_lossy(m.max(n));
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&i| sv[i] > cutoff && sv[i] > T::zero())
        .collect();

    let r = kept.len();
    let mut left = DMatrix::zeros(m, r);
    let mut right = DMatrix::zeros(n, r);
    let mut singulars = DVector::zeros(r);
    for (k, &i) in kept.iter().enumerate() {
        let mut ucol = u.column(i).into_owned();
        let mut vcol = vt.row(i).transpose();
        if first_significant(&ucol) < T::zero() {
            ucol.neg_mut();
            vcol.neg_mut();
        }
        left.set_column(k, &ucol);
        right.set_column(k, &vcol);
        singulars[k] = sv[i];
    }
    Ok(CompactSvd {
        left,
        singulars,
        right,
    })
}

/// nalgebra's bidiagonal SVD occasionally loses accuracy on matrices whose
/// rows differ in scale by many orders of magnitude; the residual check
/// catches that and one-sided Jacobi takes over.
fn svd_raw<T: Scalar>(a: &DMatrix<T>) -> (DMatrix<T>, DVector<T>, DMatrix<T>) {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("left vectors requested");
    let vt = svd.v_t.expect("right vectors requested");
    let sv = svd.singular_values;
    let mut us = u.clone();
    for (mut col, s) in us.column_iter_mut().zip(sv.iter()) {
        col *= *s;
    }
    let resid = (a * vt.transpose() - us).norm();
    let (m, n) = a.shape();
    let slack = T::default_epsilon() * T::lit(64.0) * T::from_usize_lossy(m.max(n));
    if resid.is_finite_value() && resid <= slack * a.norm() {
        return (u, sv, vt);
    }
    if m >= n {
        let (u, sv, v) = one_sided_jacobi(a);
        (u, sv, v.transpose())
    } else {
        let (v, sv, u) = one_sided_jacobi(&a.transpose());
        (u, sv, v.transpose())
    }
}

/// Hestenes SVD of a tall matrix: `(U, sigma, V)`, unsorted. Columns of `U`
/// with zero singular value are left at zero.
fn one_sided_jacobi<T: Scalar>(a: &DMatrix<T>) -> (DMatrix<T>, DVector<T>, DMatrix<T>) {
    let n = a.ncols();
    let mut g = a.clone();
    let mut v = DMatrix::<T>::identity(n, n);
    let eps = T::default_epsilon();
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha = g.column(p).norm_squared();
                let beta = g.column(q).norm_squared();
                let gamma = g.column(p).dot(&g.column(q));
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for mat in [&mut g, &mut v] {
                    for i in 0..mat.nrows() {
                        let (x, y) = (mat[(i, p)], mat[(i, q)]);
                        mat[(i, p)] = c * x - s * y;
                        mat[(i, q)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv = DVector::zeros(n);
    for (j, mut col) in g.column_iter_mut().enumerate() {
        let norm = col.norm();
        sv[j] = norm;
        if norm > T::zero() {
            col /= norm;
        }
    }
    (g, sv, v)
}

fn first_significant<T: Scalar>(v: &DVector<T>) -> T {
    let thresh = T::lit(1e-10);
    v.iter()
        .copied()
        .find(|x| x.abs() > thresh)
        .unwrap_or_else(T::zero)
}

/// Checks `|S_ij - S_ji| <= tol * max(1, max|S|)`.
pub(crate) fn is_symmetric<T: Scalar>(s: &DMatrix<T>, tol: T) -> bool {
    if !s.is_square() {
        return false;
    }
    let scale = s.amax().max(T::one());
    let n = s.nrows();
    (0..n).all(|i| (0..i).all(|j| (s[(i, j)] - s[(j, i)]).abs() <= tol * scale))
}

/// `(S + S^T) / 2`.
pub fn symmetrize<T: Scalar>(s: &DMatrix<T>) -> DMatrix<T> {
    (s + s.transpose()) * T::lit(0.5)
}

/// Full symmetric eigendecomposition, eigenvalues sorted nonincreasing.
pub(crate) fn symmetric_eigen_sorted<T: Scalar>(s: &DMatrix<T>) -> (DVector<T>, DMatrix<T>) {
    let eig = SymmetricEigen::new(s.clone());
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(s.nrows(), n);
    for (k, &i) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(i).into_owned();
        if first_significant(&col) < T::zero() {
            col.neg_mut();
        }
        vectors.set_column(k, &col);
    }
    (values, vectors)
}

/// Compact eigendecomposition of a symmetric positive semidefinite matrix.
pub fn eig_compact<T: Scalar>(s: &DMatrix<T>, rank_tol: T) -> Result<CompactEig<T>> {
    ensure_finite(s, "eig input")?;
    if !is_symmetric(s, T::lit(1e-12)) {
        return invalid("eig_compact input is not symmetric");
    }
    let n = s.nrows();
    if n == 0 {
        return Ok(CompactEig {
            vectors: DMatrix::zeros(0, 0),
            eigenvalues: DVector::zeros(0),
        });
    }
    let (values, vectors) = symmetric_eigen_sorted(&symmetrize(s));
    let lambda_max = values[0].max(T::zero());
    let lambda_min = values[n - 1];
    if lambda_min < -T::lit(1e-10) * lambda_max.max(T::one()) {
        return invalid(format!(
            "matrix is not positive semidefinite (min eigenvalue {lambda_min:e})"
        ));
    }
    let cutoff = rank_tol * lambda_max * T::from_usize_lossy(n);
    let kept: Vec<usize> = (0..n)
        .filter(|&i| values[i] > cutoff && values[i] > T::zero())
        .collect();
    let eigenvalues = DVector::from_iterator(kept.len(), kept.iter().map(|&i| values[i]));
    let mut out = DMatrix::zeros(n, kept.len());
    for (k, &i) in kept.iter().enumerate() {
        out.set_column(k, &vectors.column(i));
    }
    Ok(CompactEig {
        vectors: out,
        eigenvalues,
    })
}

/// Thin QR with a positive diagonal in `R`.
pub fn qr_compact<T: Scalar>(a: &DMatrix<T>, rank_tol: T) -> Result<(DMatrix<T>, DMatrix<T>)> {
    ensure_finite(a, "qr input")?;
    let (m, n) = a.shape();
    if m < n {
        return invalid(format!("qr_compact needs rows >= cols, got {m}x{n}"));
    }
    let qr = a.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for i in 0..n {
        if r[(i, i)] < T::zero() {
            q.column_mut(i).neg_mut();
            r.row_mut(i).neg_mut();
        }
    }
    let diag_max = (0..n).map(|i| r[(i, i)]).fold(T::zero(), |acc, x| acc.max(x));
    let cutoff = rank_tol * diag_max.max(a.amax()) * T::from_usize_lossy(m.max(n));
    for i in 0..n {
        if r[(i, i)] <= cutoff {
            return Err(Error::RankDeficient {
                index: i,
                value: r[(i, i)].as_f64(),
            });
        }
    }
    Ok((q, r))
}

/// Singular values in nonincreasing order (all of them, zeros included).
pub fn singular_values<T: Scalar>(a: &DMatrix<T>) -> DVector<T> {
    if a.is_empty() {
        return DVector::zeros(0);
    }
    let mut sv: Vec<T> = a.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    DVector::from_vec(sv)
}

/// Schatten p-norm; `p = f64::INFINITY` is the spectral norm.
pub fn schatten_norm<T: Scalar>(a: &DMatrix<T>, p: f64) -> Result<T> {
    if p.is_nan() || p < 1.0 {
        return invalid(format!("Schatten exponent must lie in [1, inf], got {p}"));
    }
    ensure_finite(a, "schatten_norm input")?;
    Ok(schatten_of_values(singular_values(a).as_slice(), p))
}

/// `(sum_i sigma_i^p)^(1/p)` over given nonnegative values.
pub(crate) fn schatten_of_values<T: Scalar>(sigma: &[T], p: f64) -> T {
    if sigma.is_empty() {
        return T::zero();
    }
    let smax = sigma.iter().copied().fold(T::zero(), |a, b| a.max(b.abs()));
    if p.is_infinite() {
        return smax;
    }
    if p == 1.0 {
        return sigma.iter().map(|x| x.abs()).fold(T::zero(), |a, b| a + b);
    }
    if smax == T::zero() {
        return T::zero();
    }
    let pt = T::lit(p);
    let sum = sigma
        .iter()
        .map(|x| (x.abs() / smax).powf(pt))
        .fold(T::zero(), |a, b| a + b);
    smax * sum.powf(T::one() / pt)
}

pub(crate) fn check_orthonormal<T: Scalar>(u: &DMatrix<T>, tol: T, what: &str) -> Result<()> {
    let gram = u.transpose() * u;
    let err = (gram - DMatrix::identity(u.ncols(), u.ncols())).amax();
    if err > tol {
        return invalid(format!("{what} is not column-orthonormal (error {err:e})"));
    }
    Ok(())
}

/// Principal angles between `span(u1)` and `span(u2)`, ascending, in `[0, pi/2]`.
///
/// Angles whose cosine exceeds `1/sqrt(2)` are taken from the sines (singular
/// values of `u2 - u1 u1^T u2`) so that small angles keep full precision.
pub fn principal_angles<T: Scalar>(u1: &DMatrix<T>, u2: &DMatrix<T>) -> Result<DVector<T>> {
    if u1.shape() != u2.shape() {
        return invalid(format!(
            "principal_angles shape mismatch: {:?} vs {:?}",
            u1.shape(),
            u2.shape()
        ));
    }
    if u1.ncols() > u1.nrows() {
        return invalid("principal_angles needs at most as many columns as rows");
    }
    let tol = T::lit(1e-8);
    check_orthonormal(u1, tol, "first basis")?;
    check_orthonormal(u2, tol, "second basis")?;

    let s = u1.ncols();
    let cross = u1.transpose() * u2;
    let cosines = singular_values(&cross);
    let residual = u2 - u1 * &cross;
    let mut sines: Vec<T> = singular_values(&residual).iter().copied().collect();
    sines.reverse();

    let half = T::lit(0.5);
    let angles = (0..s).map(|i| {
        let c = cosines[i].min(T::one()).max(T::zero());
        if c * c > half {
            let sn = sines.get(i).copied().unwrap_or_else(T::zero);
            sn.min(T::one()).max(T::zero()).asin()
        } else {
            c.acos()
        }
    });
    Ok(DVector::from_iterator(s, angles))
}

/// Largest principal angle between the column spans of two arbitrary
/// full-column-rank matrices.
pub fn subspace_distance<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<T> {
    let qa = orthonormal_basis(a)?;
    let qb = orthonormal_basis(b)?;
    if qa.ncols() != qb.ncols() {
        return Ok(T::frac_pi_2());
    }
    let angles = principal_angles(&qa, &qb)?;
    Ok(angles.iter().copied().fold(T::zero(), |acc, x| acc.max(x)))
}

/// Orthonormal basis of the column span, via compact SVD.
pub fn orthonormal_basis<T: Scalar>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    Ok(svd_compact(a, T::lit(DEFAULT_RANK_TOL))?.left)
}

/// Frobenius inner product.
pub fn inner<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    a.dot(b)
}

/// Euclidean norm of every row.
pub fn row_norms<T: Scalar>(a: &DMatrix<T>) -> DVector<T> {
    DVector::from_iterator(a.nrows(), a.row_iter().map(|r| r.norm()))
}


#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    const TOL: f64 = DEFAULT_RANK_TOL;

    #[test]
    fn svd_identity() {
        let svd = svd_compact(&DMatrix::<f64>::identity(3, 3), TOL).unwrap();
        assert_eq!(svd.rank(), 3);
        assert!(svd.singulars.iter().all(|&s| (s - 1.0).abs() < 1e-14));
        assert!((svd.reconstruct() - DMatrix::identity(3, 3)).amax() < 1e-14);
    }

    #[test]
    fn svd_rank_one_diagonal() {
        let a = dmatrix![3.0, 0.0; 0.0, 0.0];
        let svd = svd_compact(&a, TOL).unwrap();
        assert_eq!(svd.rank(), 1);
        assert!((svd.singulars[0] - 3.0).abs() < 1e-14);
        assert!((svd.left.column(0) - DVector::from_vec(vec![1.0, 0.0])).amax() < 1e-14);
        assert!((svd.right.column(0) - DVector::from_vec(vec![1.0, 0.0])).amax() < 1e-14);
    }

    #[test]
    fn svd_rejects_nan() {
        let a = dmatrix![1.0, f64::NAN];
        assert!(matches!(svd_compact(&a, TOL), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn svd_graded_rows() {
        // Bidiagonal QR alone reconstructs this with relative error near 1e-4.
        let mut a = DMatrix::<f64>::from_fn(10, 3, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0 + 0.1 * j as f64);
        for (i, e) in [7.0, -3.0, 2.0, 6.0, -4.0, 0.0, 5.0, -6.0, 3.0, 1.0].iter().enumerate() {
            a.row_mut(i).scale_mut(10f64.powf(*e));
        }
        let svd = svd_compact(&a, 0.0).unwrap();
        assert!((svd.reconstruct() - &a).norm() <= 1e-13 * a.norm());
        let (_, sv, _) = one_sided_jacobi(&a);
        let mut sv: Vec<f64> = sv.iter().copied().collect();
        sv.sort_by(|x, y| y.partial_cmp(x).unwrap());
        for (x, y) in sv.iter().zip(svd.singulars.iter()) {
            assert!((x - y).abs() <= 1e-12 * x);
        }
    }

    #[test]
    fn svd_wide_matrix() {
        let a = dmatrix![1.0, 2.0, 3.0; 4.0, 5.0, 6.5];
        let svd = svd_compact(&a, TOL).unwrap();
        assert_eq!(svd.left.shape(), (2, 2));
        assert_eq!(svd.right.shape(), (3, 2));
        assert!((svd.reconstruct() - a).amax() < 1e-12);
    }

    #[test]
    fn svd_sign_convention() {
        let a = dmatrix![-2.0, 0.0; 0.0, -1.0; 0.0, 0.0];
        let svd = svd_compact(&a, TOL).unwrap();
        for j in 0..svd.rank() {
            assert!(first_significant(&svd.left.column(j).into_owned()) > 0.0);
        }
        assert!((svd.reconstruct() - a).amax() < 1e-14);
    }

    #[test]
    fn eig_diag_rank_one() {
        let e = eig_compact(&dmatrix![4.0, 0.0; 0.0, 0.0], TOL).unwrap();
        assert_eq!(e.rank(), 1);
        assert!((e.eigenvalues[0] - 4.0).abs() < 1e-14);
        assert!((e.vectors[(0, 0)].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_identity() {
        let e = eig_compact(&DMatrix::<f64>::identity(2, 2), TOL).unwrap();
        assert_eq!(e.rank(), 2);
        assert!((e.vectors.transpose() * &e.vectors - DMatrix::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn eig_rejects_asymmetric_and_indefinite() {
        assert!(eig_compact(&dmatrix![1.0, 2.0; 0.0, 1.0], TOL).is_err());
        assert!(eig_compact(&dmatrix![1.0, 0.0; 0.0, -1.0], TOL).is_err());
    }

    #[test]
    fn qr_orthonormal_input_is_fixed() {
        let a = dmatrix![1.0, 0.0; 0.0, 1.0; 0.0, 0.0];
        let (q, r) = qr_compact(&a, TOL).unwrap();
        assert!((q - &a).amax() < 1e-14);
        assert!((r - DMatrix::identity(2, 2)).amax() < 1e-14);
    }

    #[test]
    fn qr_single_column() {
        let a = dmatrix![2.0; 0.0; 0.0];
        let (q, r) = qr_compact(&a, TOL).unwrap();
        assert!((q - dmatrix![1.0; 0.0; 0.0]).amax() < 1e-14);
        assert!((r[(0, 0)] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn qr_rank_deficient() {
        let a = dmatrix![1.0, 2.0; 1.0, 2.0; 1.0, 2.0];
        assert!(matches!(
            qr_compact(&a, TOL),
            Err(Error::RankDeficient { index: 1, .. })
        ));
    }

    #[test]
    fn schatten_diagonal_values() {
        let a = dmatrix![3.0, 0.0; 0.0, 4.0];
        assert!((schatten_norm::<f64>(&a, 2.0).unwrap() - 5.0).abs() < 1e-14);
        assert!((schatten_norm::<f64>(&a, 1.0).unwrap() - 7.0).abs() < 1e-14);
        assert!((schatten_norm::<f64>(&a, f64::INFINITY).unwrap() - 4.0).abs() < 1e-14);
        assert!(schatten_norm(&a, 0.5).is_err());
    }

    #[test]
    fn principal_angles_basic() {
        let e1 = dmatrix![1.0; 0.0];
        let e2 = dmatrix![0.0; 1.0];
        assert!(principal_angles::<f64>(&e1, &e1).unwrap()[0].abs() < 1e-15);
        let a = principal_angles(&e1, &e2).unwrap()[0];
        assert!((a - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!(principal_angles(&dmatrix![2.0; 0.0], &e1).is_err());
    }

    #[test]
    fn principal_angles_resolve_tiny_angles() {
        let t = 1e-12_f64;
        let u1 = dmatrix![1.0; 0.0];
        let u2 = dmatrix![t.cos(); t.sin()];
        let a = principal_angles(&u1, &u2).unwrap()[0];
        assert!((a - t).abs() < 1e-20);
    }

    #[test]
    fn works_in_single_precision() {
        let a = nalgebra::dmatrix![3.0_f32, 0.0; 0.0, 4.0];
        assert!((schatten_norm(&a, 2.0).unwrap() - 5.0).abs() < 1e-5);
        let svd = svd_compact(&a, 1e-6_f32).unwrap();
        assert!((svd.reconstruct() - a).amax() < 1e-5);
    }
}
