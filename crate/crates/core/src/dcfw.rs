//! Spectral-function calculus for difference-of-convex programs.
//!
//! A [`SpectralFunction`] describes one of the convex pieces `G` or `F` of a
//! DC program `min G(W) - F(XW)`. Each descriptor knows how to evaluate
//! itself, its closed-form conjugate, and one deterministic element of its
//! subdifferential. Unitarily invariant kinds act on singular values; the two
//! row-wise kinds act on the rows and exist for least-absolute-deviation PCA.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::linalg::{self, svd_compact};
use crate::Scalar;

/// Slack allowed on indicator constraints when evaluating.
pub const DOMAIN_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum SpectralFunction<T: Scalar> {
    /// Indicator of `{ ||A||_{S_inf} <= 1 }`.
    IndicatorSpectralBall,
    /// Indicator of `{ ||A||_{S_2} <= 1 }`.
    IndicatorFrobeniusBall,
    /// Indicator of `{ ||A||_{S_q} <= 1 }` for a general exponent `q` in `[1, inf]`.
    IndicatorSchattenBall { q: f64 },
    /// `||A||_{S_p}`, `p` in `[1, inf]`.
    SchattenNorm { p: f64 },
    /// `(1/p) ||A||_{S_p}^p`, `p` in `(1, inf)`.
    SchattenPowerScaled { p: f64 },
    /// `1/2 ||A||_{S_inf}^2`.
    SpectralNormSqHalf,
    /// `1/2 ||A||_{S_1}^2`.
    NuclearNormSqHalf,
    /// `1/2 ||A||_{S_2}^2`.
    FrobeniusSqHalf,
    /// `||A||_{S_2}`.
    FrobeniusNorm,
    /// `sum_i -sqrt(r_i^2 + eps^2 - ||a_i||^2)` on `||a_i||^2 <= r_i^2 + eps^2`.
    RowwiseBallPenalty { row_norms: DVector<T>, epsilon: T },
    /// `sum_i r_i sqrt(1 + ||a_i||^2)`.
    RowwiseSqrtPenalty { row_norms: DVector<T> },
}

/// One element of a subdifferential, conformal with the evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgradient<T: Scalar> {
    pub matrix: DMatrix<T>,
}

impl<T: Scalar> Subgradient<T> {
    pub fn into_matrix(self) -> DMatrix<T> {
        self.matrix
    }
}

/// Hölder conjugate exponent, `1/p + 1/q = 1`.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

impl<T: Scalar> SpectralFunction<T> {
    pub fn schatten_norm(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return invalid(format!("SchattenNorm exponent must lie in [1, inf], got {p}"));
        }
        Ok(Self::SchattenNorm { p })
    }

    pub fn schatten_power(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return invalid(format!("SchattenPowerScaled exponent must lie in (1, inf), got {p}"));
        }
        Ok(Self::SchattenPowerScaled { p })
    }

    pub fn indicator_schatten_ball(q: f64) -> Result<Self> {
        if q.is_nan() || q < 1.0 {
            return invalid(format!("ball exponent must lie in [1, inf], got {q}"));
        }
        Ok(Self::IndicatorSchattenBall { q })
    }

    pub fn rowwise_ball(row_norms: DVector<T>, epsilon: T) -> Result<Self> {
        if row_norms.iter().any(|&r| !(r > T::zero()) || !r.is_finite_value()) {
            return invalid("RowwiseBallPenalty row norms must be positive and finite");
        }
        if epsilon < T::zero() {
            return invalid("RowwiseBallPenalty epsilon must be nonnegative");
        }
        Ok(Self::RowwiseBallPenalty { row_norms, epsilon })
    }

    pub fn rowwise_sqrt(row_norms: DVector<T>) -> Result<Self> {
        if row_norms.iter().any(|&r| r < T::zero() || !r.is_finite_value()) {
            return invalid("RowwiseSqrtPenalty row norms must be nonnegative and finite");
        }
        Ok(Self::RowwiseSqrtPenalty { row_norms })
    }

    /// Ball penalty built from the rows of a data matrix, the `F` of robust PCA.
    pub fn rowwise_ball_for(x: &DMatrix<T>, epsilon: T) -> Result<Self> {
        Self::rowwise_ball(linalg::row_norms(x), epsilon)
    }

    pub fn name(&self) -> String {
        match self {
            Self::IndicatorSpectralBall => "IndicatorSpectralBall".into(),
            Self::IndicatorFrobeniusBall => "IndicatorFrobeniusBall".into(),
            Self::IndicatorSchattenBall { q } => format!("IndicatorSchattenBall({q})"),
            Self::SchattenNorm { p } => format!("SchattenNorm({p})"),
            Self::SchattenPowerScaled { p } => format!("SchattenPowerScaled({p})"),
            Self::SpectralNormSqHalf => "SpectralNormSqHalf".into(),
            Self::NuclearNormSqHalf => "NuclearNormSqHalf".into(),
            Self::FrobeniusSqHalf => "FrobeniusSqHalf".into(),
            Self::FrobeniusNorm => "FrobeniusNorm".into(),
            Self::RowwiseBallPenalty { .. } => "RowwiseBallPenalty".into(),
            Self::RowwiseSqrtPenalty { .. } => "RowwiseSqrtPenalty".into(),
        }
    }

    /// True for every kind that depends on its argument only through the
    /// singular values.
    pub fn is_unitarily_invariant(&self) -> bool {
        !matches!(
            self,
            Self::RowwiseBallPenalty { .. } | Self::RowwiseSqrtPenalty { .. }
        )
    }

    fn row_params(&self) -> Option<&DVector<T>> {
        match self {
            Self::RowwiseBallPenalty { row_norms, .. } | Self::RowwiseSqrtPenalty { row_norms } => {
                Some(row_norms)
            }
            _ => None,
        }
    }

    fn check_rows(&self, a: &DMatrix<T>) -> Result<()> {
        if let Some(r) = self.row_params() {
            if r.len() != a.nrows() {
                return invalid(format!(
                    "{} expects {} rows, got {}",
                    self.name(),
                    r.len(),
                    a.nrows()
                ));
            }
        }
        Ok(())
    }

    /// Value of the absolutely symmetric function `g` with `self = g o sigma`.
    pub fn evaluate_spectrum(&self, sigma: &[T]) -> Result<T> {
        let tol = T::lit(DOMAIN_TOL);
        let half = T::lit(0.5);
        let ball = |q: f64| {
            if linalg::schatten_of_values(sigma, q) <= T::one() + tol {
                T::zero()
            } else {
                T::infinity()
            }
        };
        let value = match self {
            Self::IndicatorSpectralBall => ball(f64::INFINITY),
            Self::IndicatorFrobeniusBall => ball(2.0),
            Self::IndicatorSchattenBall { q } => ball(*q),
            Self::SchattenNorm { p } => linalg::schatten_of_values(sigma, *p),
            Self::SchattenPowerScaled { p } => {
                let pt = T::lit(*p);
                sigma.iter().map(|s| s.abs().powf(pt)).fold(T::zero(), |a, b| a + b) / pt
            }
            Self::SpectralNormSqHalf => {
                let m = linalg::schatten_of_values(sigma, f64::INFINITY);
                half * m * m
            }
            Self::NuclearNormSqHalf => {
                let m = linalg::schatten_of_values(sigma, 1.0);
                half * m * m
            }
            Self::FrobeniusSqHalf => half * sigma.iter().map(|s| *s * *s).fold(T::zero(), |a, b| a + b),
            Self::FrobeniusNorm => linalg::schatten_of_values(sigma, 2.0),
            Self::RowwiseBallPenalty { .. } | Self::RowwiseSqrtPenalty { .. } => {
                return invalid(format!("{} is not a spectral function", self.name()))
            }
        };
        Ok(value)
    }

    /// Function value; `+inf` outside an indicator domain.
    pub fn evaluate(&self, a: &DMatrix<T>) -> Result<T> {
        linalg::ensure_finite(a, "evaluation point")?;
        self.check_rows(a)?;
        match self {
            Self::FrobeniusSqHalf => Ok(T::lit(0.5) * a.norm_squared()),
            Self::FrobeniusNorm => Ok(a.norm()),
            Self::IndicatorFrobeniusBall => Ok(if a.norm() <= T::one() + T::lit(DOMAIN_TOL) {
                T::zero()
            } else {
                T::infinity()
            }),
            Self::RowwiseBallPenalty { row_norms, epsilon } => {
                let mut total = T::zero();
                for (i, row) in a.row_iter().enumerate() {
                    let cap = row_norms[i] * row_norms[i] + *epsilon * *epsilon;
                    let slack = cap - row.norm_squared();
                    if slack < -T::lit(DOMAIN_TOL) * cap.max(T::one()) {
                        return Ok(T::infinity());
                    }
                    total -= slack.max(T::zero()).sqrt();
                }
                Ok(total)
            }
            Self::RowwiseSqrtPenalty { row_norms } => Ok(a
                .row_iter()
                .enumerate()
                .map(|(i, row)| row_norms[i] * (T::one() + row.norm_squared()).sqrt())
                .fold(T::zero(), |x, y| x + y)),
            _ => {
                let sigma = linalg::singular_values(a);
                self.evaluate_spectrum(sigma.as_slice())
            }
        }
    }

    /// Closed-form conjugate descriptor.
    pub fn conjugate(&self) -> Result<Self> {
        let out = match self {
            Self::IndicatorSpectralBall => Self::SchattenNorm { p: 1.0 },
            Self::IndicatorFrobeniusBall => Self::FrobeniusNorm,
            Self::FrobeniusNorm => Self::IndicatorFrobeniusBall,
            Self::IndicatorSchattenBall { q } => {
                if q.is_infinite() {
                    Self::SchattenNorm { p: 1.0 }
                } else if *q == 2.0 {
                    Self::FrobeniusNorm
                } else {
                    Self::SchattenNorm {
                        p: conjugate_exponent(*q),
                    }
                }
            }
            Self::SchattenNorm { p } => {
                if *p == 1.0 {
                    Self::IndicatorSpectralBall
                } else if *p == 2.0 {
                    Self::IndicatorFrobeniusBall
                } else if *p >= 1.0 {
                    Self::IndicatorSchattenBall {
                        q: conjugate_exponent(*p),
                    }
                } else {
                    return Err(Error::NotInTable(self.name()));
                }
            }
            Self::SchattenPowerScaled { p } => {
                if !(*p > 1.0 && p.is_finite()) {
                    return Err(Error::NotInTable(self.name()));
                }
                Self::SchattenPowerScaled {
                    p: conjugate_exponent(*p),
                }
            }
            Self::SpectralNormSqHalf => Self::NuclearNormSqHalf,
            Self::NuclearNormSqHalf => Self::SpectralNormSqHalf,
            Self::FrobeniusSqHalf => Self::FrobeniusSqHalf,
            Self::RowwiseBallPenalty { row_norms, epsilon } => {
                let eps2 = *epsilon * *epsilon;
                Self::RowwiseSqrtPenalty {
                    row_norms: row_norms.map(|r| (r * r + eps2).sqrt()),
                }
            }
            Self::RowwiseSqrtPenalty { row_norms } => {
                if row_norms.iter().any(|&r| !(r > T::zero())) {
                    return Err(Error::NotInTable(format!(
                        "{} with a zero row weight",
                        self.name()
                    )));
                }
                Self::RowwiseBallPenalty {
                    row_norms: row_norms.clone(),
                    epsilon: T::zero(),
                }
            }
        };
        Ok(out)
    }

    /// Gradient selection `mu in dg(sigma)` for the absolutely symmetric `g`,
    /// evaluated at a nonincreasing vector of positive values.
    pub fn spectral_weights(&self, sigma: &[T]) -> Result<Vec<T>> {
        let tol = T::lit(DOMAIN_TOL);
        let zeros = || vec![T::zero(); sigma.len()];
        let in_ball = |q: f64| linalg::schatten_of_values(sigma, q) <= T::one() + tol;
        let outside = |name: String| Err(Error::OutOfDomain(name));
        match self {
            Self::IndicatorSpectralBall => {
                if in_ball(f64::INFINITY) {
                    Ok(zeros())
                } else {
                    outside(self.name())
                }
            }
            Self::IndicatorFrobeniusBall => {
                if in_ball(2.0) {
                    Ok(zeros())
                } else {
                    outside(self.name())
                }
            }
            Self::IndicatorSchattenBall { q } => {
                if in_ball(*q) {
                    Ok(zeros())
                } else {
                    outside(self.name())
                }
            }
            Self::SchattenNorm { p } => {
                if sigma.is_empty() {
                    return Ok(vec![]);
                }
                if *p == 1.0 {
                    Ok(vec![T::one(); sigma.len()])
                } else if p.is_infinite() {
                    let mut mu = zeros();
                    mu[0] = T::one();
                    Ok(mu)
                } else {
                    let norm = linalg::schatten_of_values(sigma, *p);
                    let e = T::lit(*p - 1.0);
                    Ok(sigma.iter().map(|s| (*s / norm).powf(e)).collect())
                }
            }
            Self::SchattenPowerScaled { p } => {
                let e = T::lit(*p - 1.0);
                Ok(sigma.iter().map(|s| s.powf(e)).collect())
            }
            Self::SpectralNormSqHalf => {
                let mut mu = zeros();
                if let Some(first) = sigma.first() {
                    mu[0] = *first;
                }
                Ok(mu)
            }
            Self::NuclearNormSqHalf => {
                let total = linalg::schatten_of_values(sigma, 1.0);
                Ok(vec![total; sigma.len()])
            }
            Self::FrobeniusSqHalf => Ok(sigma.to_vec()),
            Self::FrobeniusNorm => {
                let norm = linalg::schatten_of_values(sigma, 2.0);
                if norm == T::zero() {
                    Ok(zeros())
                } else {
                    Ok(sigma.iter().map(|s| *s / norm).collect())
                }
            }
            Self::RowwiseBallPenalty { .. } | Self::RowwiseSqrtPenalty { .. } => {
                invalid(format!("{} is not a spectral function", self.name()))
            }
        }
    }

    /// One deterministic element of the subdifferential at `a`.
    ///
    /// Zero singular values get weight zero.
    pub fn subgradient(&self, a: &DMatrix<T>, rank_tol: T) -> Result<Subgradient<T>> {
        linalg::ensure_finite(a, "subgradient point")?;
        self.check_rows(a)?;
        let matrix = match self {
            Self::FrobeniusSqHalf => a.clone(),
            Self::FrobeniusNorm => {
                let n = a.norm();
                if n == T::zero() {
                    DMatrix::zeros(a.nrows(), a.ncols())
                } else {
                    a / n
                }
            }
            Self::IndicatorFrobeniusBall => {
                if a.norm() > T::one() + T::lit(DOMAIN_TOL) {
                    return Err(Error::OutOfDomain(self.name()));
                }
                DMatrix::zeros(a.nrows(), a.ncols())
            }
            Self::RowwiseBallPenalty { row_norms, epsilon } => {
                let mut out = DMatrix::zeros(a.nrows(), a.ncols());
                for (i, row) in a.row_iter().enumerate() {
                    let sq = row.norm_squared();
                    if sq == T::zero() {
                        continue;
                    }
                    let r2 = row_norms[i] * row_norms[i];
                    let eps2 = *epsilon * *epsilon;
                    // rows pushed past the ball by rounding alone count as on it
                    let outside = sq - r2 - eps2 > T::lit(DOMAIN_TOL) * r2.max(T::one());
                    let slack = (r2 - sq).max(T::zero()) + eps2;
                    if outside || !(slack > T::zero()) {
                        return Err(Error::OutOfDomain(format!(
                            "{}: row {i} on or outside its ball",
                            self.name()
                        )));
                    }
                    out.set_row(i, &(row / slack.sqrt()));
                }
                out
            }
            Self::RowwiseSqrtPenalty { row_norms } => {
                let mut out = DMatrix::zeros(a.nrows(), a.ncols());
                for (i, row) in a.row_iter().enumerate() {
                    let scale = row_norms[i] / (T::one() + row.norm_squared()).sqrt();
                    out.set_row(i, &(row * scale));
                }
                out
            }
            _ => {
                let svd = svd_compact(a, rank_tol)?;
                let mu = self.spectral_weights(svd.singulars.as_slice())?;
                let mut scaled = svd.left.clone();
                for (j, mut col) in scaled.column_iter_mut().enumerate() {
                    col *= mu[j];
                }
                let out = scaled * svd.right.transpose();
                if out.shape() == a.shape() {
                    out
                } else {
                    DMatrix::zeros(a.nrows(), a.ncols())
                }
            }
        };
        Ok(Subgradient { matrix })
    }
}

/// `f(A) + f*(H) - <A, H>`; `+inf` if either term is infinite.
pub fn fenchel_young_gap<T: Scalar>(
    f: &SpectralFunction<T>,
    a: &DMatrix<T>,
    h: &DMatrix<T>,
) -> Result<T> {
    if a.shape() != h.shape() {
        return invalid("fenchel_young_gap shape mismatch");
    }
    let fa = f.evaluate(a)?;
    let fh = f.conjugate()?.evaluate(h)?;
    if !fa.is_finite_value() || !fh.is_finite_value() {
        return Ok(T::infinity());
    }
    Ok(fa + fh - linalg::inner(a, h))
}

/// One DCA step for `min G(W) - F(XW)`: `H in dF(XW)`, `W' in dG*(X^T H)`.
pub fn dca_step<T: Scalar>(
    g: &SpectralFunction<T>,
    f: &SpectralFunction<T>,
    apply_x: &dyn Fn(&DMatrix<T>) -> DMatrix<T>,
    apply_xt: &dyn Fn(&DMatrix<T>) -> DMatrix<T>,
    w: &DMatrix<T>,
    rank_tol: T,
) -> Result<DMatrix<T>> {
    let h = f.subgradient(&apply_x(w), rank_tol)?.matrix;
    let y = apply_xt(&h);
    Ok(g.conjugate()?.subgradient(&y, rank_tol)?.matrix)
}

/// DC objective `G(W) - F(XW)`.
pub fn dc_objective<T: Scalar>(
    g: &SpectralFunction<T>,
    f: &SpectralFunction<T>,
    apply_x: &dyn Fn(&DMatrix<T>) -> DMatrix<T>,
    w: &DMatrix<T>,
) -> Result<T> {
    let gw = g.evaluate(w)?;
    if !gw.is_finite_value() {
        return Ok(T::infinity());
    }
    Ok(gw - f.evaluate(&apply_x(w))?)
}
