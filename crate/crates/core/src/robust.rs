//! Least-absolute-deviation PCA: `min_W sum_i ||X_i - W W^T X_i||`.
//!
//! Three solvers: DCA on the primal, DCA on the kernelized dual, and
//! iteratively reweighted least squares.

use nalgebra::{DMatrix, DVector};

use crate::dcfw::DOMAIN_TOL;
use crate::error::{invalid, Error, Result};
use crate::kernel::KernelOperator;
use crate::linalg::{self, svd_compact, DataMatrix, DEFAULT_RANK_TOL};
use crate::pca::{initial_point, run, InitKind, SolverConfig, SolverReport};
use crate::Scalar;

/// Relative default for epsilon: `1e-8 * max_i ||X_i||`.
pub const DEFAULT_EPSILON_REL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct RobustConfig<T: Scalar> {
    pub base: SolverConfig<T>,
    /// Regularizer under every square root; `None` picks the relative default.
    pub epsilon: Option<T>,
}

impl<T: Scalar> RobustConfig<T> {
    pub fn new(base: SolverConfig<T>) -> Self {
        Self { base, epsilon: None }
    }

    pub fn with_epsilon(mut self, epsilon: T) -> Self {
        self.epsilon = Some(epsilon);
        self
    }

    fn resolve_epsilon(&self, max_row_norm: T) -> Result<T> {
        match self.epsilon {
            Some(e) if e < T::zero() || !e.is_finite_value() => invalid("epsilon must be nonnegative and finite"),
            Some(e) => Ok(e),
            None => Ok(T::lit(DEFAULT_EPSILON_REL) * max_row_norm),
        }
    }
}

fn max_of<T: Scalar>(v: &DVector<T>) -> T {
    v.iter().copied().fold(T::zero(), |a, b| a.max(b))
}

/// `X - X W W^T`, one residual per row.
fn residuals<T: Scalar>(x: &DMatrix<T>, w: &DMatrix<T>) -> DMatrix<T> {
    x - (x * w) * w.transpose()
}

/// `sum_i ||X_i - W W^T X_i||`.
pub fn robust_primal_objective<T: Scalar>(x: &DataMatrix<T>, w: &DMatrix<T>) -> Result<T> {
    if w.nrows() != x.n_features() {
        return invalid("W must have d rows");
    }
    linalg::ensure_finite(w, "W")?;
    if w.ncols() > 0 && linalg::singular_values(w)[0] > T::one() + T::lit(DOMAIN_TOL) {
        return invalid("robust objective needs ||W||_inf <= 1");
    }
    Ok(linalg::row_norms(&residuals(x.values(), w)).sum())
}

/// `sum_i sqrt(||X_i||^2 + eps^2 - ||(XW)_i||^2)`, the trace of
/// [`solve_robust_primal`]; `+inf` when `||W||_inf > 1`.
///
/// With `W = U S V^T` the radicand is `||X_i - X_i U U^T||^2 + sum_j (1 - s_j^2)
/// (X_i u_j)^2 + eps^2`, which avoids cancellation for rows near the subspace.
pub fn regularized_primal_objective<T: Scalar>(x: &DataMatrix<T>, w: &DMatrix<T>, epsilon: T) -> Result<T> {
    Ok(match radicands(x, w, epsilon)? {
        Some(r) => r.iter().map(|v| v.sqrt()).fold(T::zero(), |a, b| a + b),
        None => T::infinity(),
    })
}

/// `||X_i||^2 + eps^2 - ||(XW)_i||^2` per row, or `None` if `||W||_inf > 1`.
fn radicands<T: Scalar>(x: &DataMatrix<T>, w: &DMatrix<T>, epsilon: T) -> Result<Option<DVector<T>>> {
    if w.nrows() != x.n_features() {
        return invalid("W must have d rows");
    }
    linalg::ensure_finite(w, "W")?;
    let xv = x.values();
    let svd = svd_compact(w, T::lit(DEFAULT_RANK_TOL))?;
    if svd.rank() > 0 && svd.singulars[0] > T::one() + T::lit(DOMAIN_TOL) {
        return Ok(None);
    }
    let xu = xv * &svd.left;
    let outside = linalg::row_norms(&(xv - &xu * svd.left.transpose()));
    let eps2 = epsilon * epsilon;
    // for the orthonormal iterates 1 - s_j^2 is rounding noise, which would
    // otherwise compete with eps^2 on rows lying in the subspace
    let floor = T::default_epsilon() * T::lit(16.0);
    let deficit: Vec<T> = svd
        .singulars
        .iter()
        .map(|s| {
            let d = T::one() - *s * *s;
            if d > floor {
                d
            } else {
                T::zero()
            }
        })
        .collect();
    Ok(Some(DVector::from_fn(xv.nrows(), |i, _| {
        let mut r = outside[i] * outside[i] + eps2;
        for (j, d) in deficit.iter().enumerate() {
            r += *d * xu[(i, j)] * xu[(i, j)];
        }
        r
    })))
}

/// `sum_i sqrt((K_ii + eps^2)(1 + ||H_i||^2)) - tr sqrt(H^T K H)`.
pub fn robust_dual_objective_eps<T: Scalar>(k: &dyn KernelOperator<T>, h: &DMatrix<T>, epsilon: T) -> Result<T> {
    if h.nrows() != k.dim() {
        return invalid("H must have N rows");
    }
    linalg::ensure_finite(h, "H")?;
    factored_dual_objective(&k.sqrt_factor()?, h, epsilon)
}

/// `Y = L polar(L^T H)` for `K = L L^T`, the radicands
/// `||L_i (I - P P^T)||^2 + eps^2 = K_ii - ||Y_i||^2 + eps^2` and the rank of
/// `L^T H`.
///
/// Working with `L^T H` instead of `H^T K H` avoids squaring its condition
/// number; rows fitted almost exactly carry weights near `1 / eps`.
fn dual_geometry<T: Scalar>(l: &DMatrix<T>, h: &DMatrix<T>, eps2: T) -> Result<(DMatrix<T>, DVector<T>, usize)> {
    let svd = svd_compact(&l.tr_mul(h), T::lit(DEFAULT_RANK_TOL))?;
    let p = svd.polar();
    let y = l * &p;
    let outside = l - &y * p.transpose();
    let rad = DVector::from_iterator(l.nrows(), outside.row_iter().map(|r| r.norm_squared() + eps2));
    Ok((y, rad, svd.rank()))
}

/// Dual objective through `K = L L^T`. With `tr sqrt(H^T K H) = <Y, H>`, row
/// `i` contributes `a - b`, `a = sqrt(c (1 + ||h||^2))`, `b = <y, h>`,
/// evaluated as `(a^2 - b^2) / (a + b)` with every piece of `a^2 - b^2`
/// nonnegative.
fn factored_dual_objective<T: Scalar>(l: &DMatrix<T>, h: &DMatrix<T>, epsilon: T) -> Result<T> {
    let (y, rad, _) = dual_geometry(l, h, epsilon * epsilon)?;
    let mut total = T::zero();
    for i in 0..h.nrows() {
        let (yi, hi) = (y.row(i), h.row(i));
        let hn2 = hi.norm_squared();
        let c = yi.norm_squared() + rad[i];
        let a = (c * (T::one() + hn2)).sqrt();
        let b = yi.dot(&hi);
        total += if b <= T::zero() {
            a - b
        } else {
            // ||y||^2 ||h||^2 - <y, h>^2 as a sum of squares
            let mut wedge = T::zero();
            for j in 0..yi.len() {
                for k in j + 1..yi.len() {
                    let t = yi[j] * hi[k] - yi[k] * hi[j];
                    wedge += t * t;
                }
            }
            (c + rad[i] * hn2 + wedge) / (a + b)
        };
    }
    Ok(total)
}

/// The kernelized dual objective without regularization.
pub fn robust_dual_objective<T: Scalar>(k: &dyn KernelOperator<T>, h: &DMatrix<T>) -> Result<T> {
    robust_dual_objective_eps(k, h, T::zero())
}

/// `sum_i rho(||X_i - W W^T X_i||)` with `rho(t) = t` for `t >= eps` and
/// `(t^2 + eps^2) / (2 eps)` below; the function IRLS decreases.
pub fn irls_objective<T: Scalar>(x: &DataMatrix<T>, w: &DMatrix<T>, epsilon: T) -> Result<T> {
    if w.nrows() != x.n_features() {
        return invalid("W must have d rows");
    }
    let two = T::lit(2.0);
    Ok(linalg::row_norms(&residuals(x.values(), w))
        .iter()
        .map(|&t| {
            if t >= epsilon {
                t
            } else {
                (t * t + epsilon * epsilon) / (two * epsilon)
            }
        })
        .fold(T::zero(), |a, b| a + b))
}

/// Primal point `W = U V^T` attached to a dual point through `X^T H = U S V^T`.
pub fn recover_primal<T: Scalar>(x: &DataMatrix<T>, h: &DMatrix<T>) -> Result<DMatrix<T>> {
    if h.nrows() != x.n_samples() {
        return invalid("H must have N rows");
    }
    Ok(svd_compact(&x.values().tr_mul(h), T::lit(DEFAULT_RANK_TOL))?.polar())
}

/// DCA on the primal: `Y_i = (XW)_i / sqrt(||X_i||^2 - ||(XW)_i||^2 + eps^2)`,
/// then `W <- U V^T` with `U S V^T = svd(X^T Y)`.
///
/// The trace is [`regularized_primal_objective`].
pub fn solve_robust_primal<T: Scalar>(x: &DataMatrix<T>, cfg: &RobustConfig<T>) -> Result<SolverReport<T>> {
    let xv = x.values();
    cfg.base.check_dims(x.n_samples(), x.n_features())?;
    let eps = cfg.resolve_epsilon(max_of(&linalg::row_norms(xv)))?;
    let init = initial_point(&cfg.base, x.n_features(), InitKind::SpectralBall)?;
    let tol = T::lit(DEFAULT_RANK_TOL);
    run(
        &cfg.base,
        init,
        |w| regularized_primal_objective(x, w, eps),
        |w| {
            // same step as dcfw::dca_step with the row-wise ball penalty, but
            // with the radicands computed without cancellation
            let Some(rad) = radicands(x, w, eps)? else {
                return Err(Error::OutOfDomain("robust primal iterate left the spectral ball".into()));
            };
            let mut y = xv * w;
            for (i, mut row) in y.row_iter_mut().enumerate() {
                if row.norm_squared() == T::zero() {
                    continue;
                }
                if !(rad[i] > T::zero()) {
                    return Err(Error::OutOfDomain(format!("row {i} on the boundary with epsilon = 0")));
                }
                row /= rad[i].sqrt();
            }
            Ok(svd_compact(&xv.tr_mul(&y), tol)?.polar())
        },
    )
}

/// DCA on the kernelized dual: `Y = K H V Lambda^{-1/2} V^T`, then
/// `H_i = Y_i / sqrt(K_ii - ||Y_i||^2 + eps^2)`.
///
/// `Y` is formed as `L polar(L^T H)` with `K = L L^T`, which is the same
/// matrix. The trace is [`robust_dual_objective_eps`].
pub fn solve_robust_dual<T: Scalar>(k: &dyn KernelOperator<T>, cfg: &RobustConfig<T>) -> Result<SolverReport<T>> {
    let n = k.dim();
    cfg.base.check_dims(n, n)?;
    let eps = cfg.resolve_epsilon(max_of(&k.diagonal().map(|v| v.max(T::zero()).sqrt())))?;
    let s = cfg.base.components;
    let init = initial_point(&cfg.base, n, InitKind::FrobeniusBall)?;
    let l = k.sqrt_factor()?;
    run(
        &cfg.base,
        init,
        |h| factored_dual_objective(&l, h, eps),
        |h| {
            let (mut y, rad, rank) = dual_geometry(&l, h, eps * eps)?;
            if rank < s {
                return Err(Error::SingularInnerMatrix { kept: rank, expected: s });
            }
            for (i, mut row) in y.row_iter_mut().enumerate() {
                if row.norm_squared() == T::zero() {
                    continue;
                }
                if !(rad[i] > T::zero()) {
                    return Err(Error::OutOfDomain(format!("row {i} on the boundary with epsilon = 0")));
                }
                row /= rad[i].sqrt();
            }
            Ok(y)
        },
    )
}

/// Weights `beta_i = max(||X_i - W W^T X_i||, eps)` of one IRLS step.
pub fn irls_weights<T: Scalar>(x: &DMatrix<T>, w: &DMatrix<T>, epsilon: T) -> DVector<T> {
    linalg::row_norms(&residuals(x, w)).map(|r| r.max(epsilon))
}

/// Top-`s` eigenvectors of `X^T diag(1 / beta) X`.
pub(crate) fn weighted_top_eigenvectors<T: Scalar>(x: &DMatrix<T>, beta: &DVector<T>, s: usize) -> Result<DMatrix<T>> {
    if beta.iter().any(|b| !(*b > T::zero())) {
        return Err(Error::OutOfDomain("IRLS weight is zero; use epsilon > 0".into()));
    }
    let mut scaled = x.clone();
    for (i, mut row) in scaled.row_iter_mut().enumerate() {
        row /= beta[i].sqrt();
    }
    let m = linalg::symmetrize(&scaled.tr_mul(&scaled));
    let (_, vectors) = linalg::symmetric_eigen_sorted(&m);
    Ok(vectors.columns(0, s).into_owned())
}

/// IRLS: `beta_i <- max(||X_i - W W^T X_i||, eps)`, then `W` is the top-`s`
/// left singular vectors of `X^T diag(beta^{-1/2})`.
///
/// The trace is [`irls_objective`].
pub fn solve_robust_irls<T: Scalar>(x: &DataMatrix<T>, cfg: &RobustConfig<T>) -> Result<SolverReport<T>> {
    let xv = x.values();
    cfg.base.check_dims(x.n_samples(), x.n_features())?;
    let eps = cfg.resolve_epsilon(max_of(&linalg::row_norms(xv)))?;
    let s = cfg.base.components;
    let init = initial_point(&cfg.base, x.n_features(), InitKind::SpectralBall)?;
    run(
        &cfg.base,
        init,
        |w| irls_objective(x, w, eps),
        |w| weighted_top_eigenvectors(xv, &irls_weights(xv, w, eps), s),
    )
}
