//! Kernel matrices, Nyström factors and the out-of-sample projector.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;

use crate::dcfw::SpectralFunction;
use crate::error::{invalid, Error, Result};
use crate::linalg::{self, eig_compact, DataMatrix};
use crate::rng;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Linear,
    /// `k(x, y) = exp(-gamma ||x - y||^2)`.
    Rbf { gamma: f64 },
}

impl KernelSpec {
    pub fn rbf(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return invalid(format!("rbf gamma must be positive, got {gamma}"));
        }
        Ok(Self::Rbf { gamma })
    }

    pub fn eval<T: Scalar>(&self, x: &[T], y: &[T]) -> T {
        match self {
            Self::Linear => x.iter().zip(y).map(|(a, b)| *a * *b).fold(T::zero(), |s, v| s + v),
            Self::Rbf { gamma } => {
                let d2 = x
                    .iter()
                    .zip(y)
                    .map(|(a, b)| (*a - *b) * (*a - *b))
                    .fold(T::zero(), |s, v| s + v);
                (-T::lit(*gamma) * d2).exp()
            }
        }
    }

    /// `[k(x_i, y_j)]` for the rows of `x` and `y`.
    pub fn cross<T: Scalar>(&self, x: &DMatrix<T>, y: &DMatrix<T>) -> DMatrix<T> {
        match self {
            Self::Linear => x * y.transpose(),
            Self::Rbf { gamma } => {
                let g = T::lit(*gamma);
                let xs: Vec<T> = x.row_iter().map(|r| r.norm_squared()).collect();
                let ys: Vec<T> = y.row_iter().map(|r| r.norm_squared()).collect();
                let mut out = x * y.transpose();
                for j in 0..out.ncols() {
                    for i in 0..out.nrows() {
                        let d2 = (xs[i] + ys[j] - out[(i, j)] * T::lit(2.0)).max(T::zero());
                        out[(i, j)] = (-g * d2).exp();
                    }
                }
                out
            }
        }
    }
}

/// A symmetric PSD operator `H -> K H` on `N x s` blocks.
pub trait KernelOperator<T: Scalar> {
    fn dim(&self) -> usize;

    fn apply(&self, h: &DMatrix<T>) -> DMatrix<T>;

    fn diagonal(&self) -> DVector<T>;

    fn to_dense(&self) -> DMatrix<T> {
        self.apply(&DMatrix::identity(self.dim(), self.dim()))
    }

    /// `L` (N x r) with `K = L L^T`, from the compact eigendecomposition.
    fn sqrt_factor(&self) -> Result<DMatrix<T>> {
        let eig = eig_compact(&linalg::symmetrize(&self.to_dense()), T::lit(linalg::DEFAULT_RANK_TOL))?;
        let mut l = eig.vectors;
        for (mut col, lambda) in l.column_iter_mut().zip(eig.eigenvalues.iter()) {
            col *= lambda.sqrt();
        }
        Ok(l)
    }
}

impl<T: Scalar> KernelOperator<T> for DMatrix<T> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, h: &DMatrix<T>) -> DMatrix<T> {
        self * h
    }

    fn diagonal(&self) -> DVector<T> {
        DMatrix::diagonal(self)
    }

    fn to_dense(&self) -> DMatrix<T> {
        self.clone()
    }
}

/// Dense Gram matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix<T: Scalar> {
    values: DMatrix<T>,
}

impl<T: Scalar> KernelMatrix<T> {
    /// Wraps a user-supplied Gram matrix after checking symmetry and PSD-ness.
    pub fn from_dense(values: DMatrix<T>) -> Result<Self> {
        if values.nrows() != values.ncols() || values.is_empty() {
            return invalid("kernel matrix must be square and nonempty");
        }
        linalg::ensure_finite(&values, "kernel matrix")?;
        let scale = values.amax().max(T::one());
        if !linalg::is_symmetric(&values, T::lit(1e-10) * scale) {
            return invalid("kernel matrix is not symmetric");
        }
        let (lambda, _) = linalg::symmetric_eigen_sorted(&values);
        let min = lambda.iter().copied().fold(T::infinity(), |a, b| a.min(b));
        if min < -T::lit(1e-10) * scale {
            return invalid(format!("kernel matrix is not PSD (min eigenvalue {min:e})"));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &DMatrix<T> {
        &self.values
    }

    pub fn into_inner(self) -> DMatrix<T> {
        self.values
    }
}

impl<T: Scalar> KernelOperator<T> for KernelMatrix<T> {
    fn dim(&self) -> usize {
        self.values.nrows()
    }

    fn apply(&self, h: &DMatrix<T>) -> DMatrix<T> {
        &self.values * h
    }

    fn diagonal(&self) -> DVector<T> {
        self.values.diagonal()
    }

    fn to_dense(&self) -> DMatrix<T> {
        self.values.clone()
    }
}

pub fn kernel_matrix<T: Scalar>(x: &DataMatrix<T>, spec: KernelSpec) -> KernelMatrix<T> {
    let xv = x.values();
    let mut values = spec.cross(xv, xv);
    if let KernelSpec::Rbf { .. } = spec {
        values.fill_diagonal(T::one());
    }
    KernelMatrix {
        values: linalg::symmetrize(&values),
    }
}

/// `K ~ L L^T` with `L = C W^{-1/2}`, `C = K[:, pivots]`, `W = K[pivots, pivots]`.
#[derive(Debug, Clone)]
pub struct NystromKernel<T: Scalar> {
    factor: DMatrix<T>,
    pivots: Vec<usize>,
    jitter: Option<T>,
}

/// Relative jitter added to a singular Nyström core.
pub const NYSTROM_JITTER: f64 = 1e-10;

impl<T: Scalar> NystromKernel<T> {
    pub fn factor(&self) -> &DMatrix<T> {
        &self.factor
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Diagonal shift applied to the core, if it had to be regularized.
    pub fn jitter(&self) -> Option<T> {
        self.jitter
    }
}

impl<T: Scalar> KernelOperator<T> for NystromKernel<T> {
    fn dim(&self) -> usize {
        self.factor.nrows()
    }

    fn apply(&self, h: &DMatrix<T>) -> DMatrix<T> {
        &self.factor * self.factor.tr_mul(h)
    }

    fn diagonal(&self) -> DVector<T> {
        DVector::from_iterator(self.factor.nrows(), self.factor.row_iter().map(|r| r.norm_squared()))
    }

    fn sqrt_factor(&self) -> Result<DMatrix<T>> {
        Ok(self.factor.clone())
    }
}

/// Nyström factor on `m` pivots drawn without replacement from stream `seed`.
pub fn nystrom<T: Scalar>(x: &DataMatrix<T>, spec: KernelSpec, m: usize, seed: u64) -> Result<NystromKernel<T>> {
    let n = x.n_samples();
    if m == 0 || m > n {
        return invalid(format!("pivot count must lie in 1..={n}, got {m}"));
    }
    let mut pivots = sample(&mut rng::stream(seed, 0), n, m).into_vec();
    pivots.sort_unstable();
    nystrom_with_pivots(x, spec, &pivots)
}

pub fn nystrom_with_pivots<T: Scalar>(
    x: &DataMatrix<T>,
    spec: KernelSpec,
    pivots: &[usize],
) -> Result<NystromKernel<T>> {
    let n = x.n_samples();
    if pivots.is_empty() || pivots.iter().any(|&p| p >= n) {
        return invalid("pivots must be nonempty and index existing rows");
    }
    let xv = x.values();
    let xp = DMatrix::from_fn(pivots.len(), xv.ncols(), |i, j| xv[(pivots[i], j)]);
    let c = spec.cross(xv, &xp);
    let core = linalg::symmetrize(&spec.cross(&xp, &xp));
    let (lambda, vectors) = linalg::symmetric_eigen_sorted(&core);
    let lmax = lambda.iter().copied().fold(T::zero(), |a, b| a.max(b));
    if !(lmax > T::zero()) {
        return invalid("Nyström core is zero");
    }
    let floor = T::lit(NYSTROM_JITTER) * lmax;
    let lmin = lambda.iter().copied().fold(T::infinity(), |a, b| a.min(b));
    let jitter = if lmin <= floor { Some(floor) } else { None };
    let shift = jitter.unwrap_or_else(T::zero);
    let mut scaled = vectors.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col /= (lambda[j].max(T::zero()) + shift).sqrt();
    }
    let inv_sqrt = scaled * vectors.transpose();
    Ok(NystromKernel {
        factor: c * inv_sqrt,
        pivots: pivots.to_vec(),
        jitter,
    })
}

/// Precomputed map from kernel evaluations against the training set to the
/// `s` scores of a new point.
#[derive(Debug, Clone, PartialEq)]
pub struct OosProjector<T: Scalar> {
    matrix: DMatrix<T>,
    spec: KernelSpec,
    train_points: Option<DMatrix<T>>,
}

const MAGIC: &[u8; 6] = b"PCADC\x01";

impl<T: Scalar> OosProjector<T> {
    /// `V diag(mu ./ sqrt(lambda)) V^T H^T` where `H^T K H = V diag(lambda) V^T`
    /// and `mu` is the gradient selection of `g*` at `sqrt(lambda)`; `g` is the
    /// primal `G`.
    pub fn build<K: KernelOperator<T> + ?Sized>(
        h_star: &DMatrix<T>,
        k: &K,
        g: &SpectralFunction<T>,
        spec: KernelSpec,
        x: &DataMatrix<T>,
    ) -> Result<Self> {
        if h_star.nrows() != k.dim() || x.n_samples() != k.dim() {
            return invalid("H, K and the training data disagree on N");
        }
        let s = h_star.ncols();
        let inner = linalg::symmetrize(&h_star.tr_mul(&k.apply(h_star)));
        let eig = eig_compact(&inner, T::lit(linalg::DEFAULT_RANK_TOL))?;
        if eig.rank() < s {
            return Err(Error::SingularInnerMatrix {
                kept: eig.rank(),
                expected: s,
            });
        }
        let roots: Vec<T> = eig.eigenvalues.iter().map(|l| l.sqrt()).collect();
        let mu = g.conjugate()?.spectral_weights(&roots)?;
        let mut scaled = eig.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= mu[j] / roots[j];
        }
        let matrix = scaled * eig.vectors.transpose() * h_star.transpose();
        Ok(Self {
            matrix,
            spec,
            train_points: Some(x.values().clone()),
        })
    }

    pub fn components(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn spec(&self) -> KernelSpec {
        self.spec
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn is_compact(&self) -> bool {
        self.train_points.is_none()
    }

    pub fn n_features(&self) -> usize {
        match &self.train_points {
            Some(x) => x.ncols(),
            None => self.matrix.ncols(),
        }
    }

    /// For linear kernels, folds the training data into an `s x d` matrix and
    /// drops it. Other kernels are returned unchanged.
    pub fn compact(self) -> Self {
        match (&self.spec, &self.train_points) {
            (KernelSpec::Linear, Some(x)) => Self {
                matrix: &self.matrix * x,
                spec: self.spec,
                train_points: None,
            },
            _ => self,
        }
    }

    pub fn project_point(&self, x_new: &[T]) -> Result<DVector<T>> {
        if x_new.len() != self.n_features() {
            return invalid(format!(
                "point has {} features, projector expects {}",
                x_new.len(),
                self.n_features()
            ));
        }
        let scores = self.project_rows(&DMatrix::from_row_slice(1, x_new.len(), x_new))?;
        Ok(scores.row(0).transpose())
    }

    /// Scores for every row of `points`, one row per point.
    pub fn project_rows(&self, points: &DMatrix<T>) -> Result<DMatrix<T>> {
        if points.ncols() != self.n_features() {
            return invalid(format!(
                "points have {} features, projector expects {}",
                points.ncols(),
                self.n_features()
            ));
        }
        linalg::ensure_finite(points, "points")?;
        let evals = match &self.train_points {
            None => points.transpose(),
            Some(x) => self.spec.cross(x, points),
        };
        Ok((&self.matrix * evals).transpose())
    }

    pub fn serialize<W: Write>(&self, mut w: W) -> Result<()> {
        let (kind, gamma) = match (self.spec, self.is_compact()) {
            (KernelSpec::Linear, false) => (0u8, 0.0),
            (KernelSpec::Rbf { gamma }, _) => (1u8, gamma),
            (KernelSpec::Linear, true) => (2u8, 0.0),
        };
        w.write_all(MAGIC)?;
        w.write_all(&[kind])?;
        w.write_all(&gamma.to_le_bytes())?;
        let (s, cols) = self.matrix.shape();
        let d = self.n_features();
        for v in [s, cols, d] {
            w.write_all(&(v as u64).to_le_bytes())?;
        }
        write_rows(&mut w, &self.matrix)?;
        if let Some(x) = &self.train_points {
            write_rows(&mut w, x)?;
        }
        Ok(())
    }

    pub fn deserialize<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 6];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return invalid("not a projector file (bad magic or version)");
        }
        let mut kind = [0u8; 1];
        r.read_exact(&mut kind)?;
        let gamma = f64::from_le_bytes(read_array(&mut r)?);
        let s = u64::from_le_bytes(read_array(&mut r)?) as usize;
        let n = u64::from_le_bytes(read_array(&mut r)?) as usize;
        let d = u64::from_le_bytes(read_array(&mut r)?) as usize;
        let (spec, compact) = match kind[0] {
            0 => (KernelSpec::Linear, false),
            1 => (KernelSpec::rbf(gamma)?, false),
            2 => (KernelSpec::Linear, true),
            other => return invalid(format!("unknown projector kind {other}")),
        };
        if compact && n != d {
            return invalid("compact projector must be s x d");
        }
        let matrix = read_rows(&mut r, s, n)?;
        let train_points = if compact { None } else { Some(read_rows(&mut r, n, d)?) };
        Ok(Self {
            matrix,
            spec,
            train_points,
        })
    }
}

fn write_rows<T: Scalar, W: Write>(w: &mut W, m: &DMatrix<T>) -> Result<()> {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            w.write_all(&m[(i, j)].as_f64().to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_array<R: Read>(r: &mut R) -> Result<[u8; 8]> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_rows<T: Scalar, R: Read>(r: &mut R, rows: usize, cols: usize) -> Result<DMatrix<T>> {
    let mut m = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m[(i, j)] = T::lit(f64::from_le_bytes(read_array(r)?));
        }
    }
    Ok(m)
}
