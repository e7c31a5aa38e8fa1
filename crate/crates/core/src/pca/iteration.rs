use nalgebra::DMatrix;

use super::{initial_point, objective, run, FormulationId, InitKind, Problem, SolverConfig, SolverReport};
use crate::dcfw::DOMAIN_TOL;
use crate::error::{invalid, Result};
use crate::linalg::{self, qr_compact, svd_compact, DataMatrix, DEFAULT_RANK_TOL};
use crate::Scalar;

/// Singular values clipped at 1.
pub fn project_spectral_ball<T: Scalar>(w: &DMatrix<T>) -> Result<DMatrix<T>> {
    let svd = svd_compact(w, T::lit(DEFAULT_RANK_TOL))?;
    if svd.rank() == 0 || svd.singulars[0] <= T::one() {
        return Ok(w.clone());
    }
    Ok(svd.recompose_with(|s| s.min(T::one())))
}

pub fn project_frobenius_ball<T: Scalar>(h: &DMatrix<T>) -> DMatrix<T> {
    let n = h.norm();
    if n <= T::one() {
        h.clone()
    } else {
        h / n
    }
}

/// Block power method `W <- Q` with `Q R = qr(M W)`; `m_apply` must be
/// symmetric PSD on `dim`-vectors.
///
/// The trace holds `-1/2 tr(W^T M W)` (`+inf` while `||W||_inf > 1`), which
/// for `M = X^T X` is objective `L`.
pub fn simultaneous_iteration<T: Scalar>(
    m_apply: &dyn Fn(&DMatrix<T>) -> DMatrix<T>,
    dim: usize,
    cfg: &SolverConfig<T>,
) -> Result<SolverReport<T>> {
    cfg.check_dims(dim, dim)?;
    let init = initial_point(cfg, dim, InitKind::SpectralBall)?;
    let tol = T::lit(DEFAULT_RANK_TOL);
    run(
        cfg,
        init,
        |w| {
            if linalg::singular_values(w)[0] > T::one() + T::lit(DOMAIN_TOL) {
                return Ok(T::infinity());
            }
            Ok(-T::lit(0.5) * w.dot(&m_apply(w)))
        },
        |w| Ok(qr_compact(&m_apply(w), tol)?.0),
    )
}

/// [`simultaneous_iteration`] on `X^T X`.
pub fn simultaneous_iteration_gram<T: Scalar>(x: &DataMatrix<T>, cfg: &SolverConfig<T>) -> Result<SolverReport<T>> {
    cfg.check_dims(x.n_samples(), x.n_features())?;
    let xv = x.values();
    simultaneous_iteration(&|w: &DMatrix<T>| xv.tr_mul(&(xv * w)), x.n_features(), cfg)
}

/// Gradient of the convex part `F(image(V))` pulled back to `V`.
fn ascent_direction<T: Scalar>(form: FormulationId, problem: Problem<'_, T>, v: &DMatrix<T>) -> Result<DMatrix<T>> {
    let tol = T::lit(DEFAULT_RANK_TOL);
    let zeros = || DMatrix::zeros(v.nrows(), v.ncols());
    match (form, problem) {
        (FormulationId::L | FormulationId::N, _) => {
            let g = match problem {
                Problem::Samples(x) => x.tr_mul(&(x * v)),
                Problem::Kernel(k) => k.apply(v),
            };
            if form == FormulationId::L {
                return Ok(g);
            }
            let norm = v.dot(&g).max(T::zero()).sqrt();
            Ok(if norm > T::zero() { g / norm } else { zeros() })
        }
        (FormulationId::O | FormulationId::Q, Problem::Samples(x)) => {
            let svd = svd_compact(&x.tr_mul(v), tol)?;
            let scale = if form == FormulationId::Q {
                svd.singulars.iter().copied().fold(T::zero(), |a, b| a + b)
            } else {
                T::one()
            };
            if svd.rank() == 0 {
                return Ok(zeros());
            }
            Ok(x * svd.polar() * scale)
        }
        (FormulationId::O | FormulationId::Q, Problem::Kernel(k)) => {
            let kv = k.apply(v);
            let eig = linalg::eig_compact(&linalg::symmetrize(&v.tr_mul(&kv)), tol)?;
            if eig.rank() == 0 {
                return Ok(zeros());
            }
            let scale = if form == FormulationId::Q {
                eig.eigenvalues.iter().map(|l| l.sqrt()).fold(T::zero(), |a, b| a + b)
            } else {
                T::one()
            };
            Ok(kv * eig.spectral_map(|l| T::one() / l.sqrt()) * scale)
        }
        _ => invalid(format!(
            "proximal gradient supports l, n, o, q; got {}",
            form.label()
        )),
    }
}

/// Projected gradient on `delta(C) - F(image(V))`:
/// `V <- proj_C(V + stepsize * grad F)`. Any positive stepsize gives descent.
pub fn proximal_gradient<T: Scalar>(
    form: FormulationId,
    problem: Problem<'_, T>,
    cfg: &SolverConfig<T>,
) -> Result<SolverReport<T>> {
    let spectral = match form {
        FormulationId::L | FormulationId::N => true,
        FormulationId::O | FormulationId::Q => false,
        _ => return invalid(format!("proximal gradient supports l, n, o, q; got {}", form.label())),
    };
    let rows = problem.variable_rows(form);
    match problem {
        Problem::Samples(x) => cfg.check_dims(x.nrows(), x.ncols())?,
        Problem::Kernel(k) => cfg.check_dims(k.dim(), k.dim())?,
    }
    let kind = if spectral { InitKind::SpectralBall } else { InitKind::FrobeniusBall };
    let init = initial_point(cfg, rows, kind)?;
    let gamma = cfg.stepsize;
    run(
        cfg,
        init,
        |v| objective(form, problem, v),
        |v| {
            let moved = v + ascent_direction(form, problem, v)? * gamma;
            if spectral {
                project_spectral_ball(&moved)
            } else {
                Ok(project_frobenius_ball(&moved))
            }
        },
    )
}
