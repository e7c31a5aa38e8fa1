use nalgebra::DMatrix;

use super::{initial_point, objective, run, FormulationId, InitKind, Problem, SolverConfig, SolverReport};
use crate::error::{invalid, Error, Result};
use crate::kernel::KernelOperator;
use crate::linalg::{self, svd_compact, DEFAULT_RANK_TOL};
use crate::Scalar;

/// `K H V Lambda^{-1/2} V^T` (that is, `X U~ V~^T`) and `tr(Lambda^{1/2})`,
/// requiring `H^T K H` to keep all `s` eigenvalues.
fn whitened<T: Scalar>(k: &dyn KernelOperator<T>, h: &DMatrix<T>) -> Result<(DMatrix<T>, T)> {
    let s = h.ncols();
    let kh = k.apply(h);
    let eig = linalg::eig_compact(&linalg::symmetrize(&h.tr_mul(&kh)), T::lit(DEFAULT_RANK_TOL))?;
    if eig.rank() < s {
        return Err(Error::SingularInnerMatrix { kept: eig.rank(), expected: s });
    }
    let trace_root = eig.eigenvalues.iter().map(|l| l.sqrt()).fold(T::zero(), |a, b| a + b);
    Ok((kh * eig.spectral_map(|l| T::one() / l.sqrt()), trace_root))
}

fn normalized<T: Scalar>(h: DMatrix<T>) -> DMatrix<T> {
    let n = h.norm();
    if n > T::zero() {
        h / n
    } else {
        h
    }
}

/// One kernel-dual DCA update for row `form` of the family.
pub(crate) fn kernel_dual_step<T: Scalar>(
    form: FormulationId,
    k: &dyn KernelOperator<T>,
    h: &DMatrix<T>,
) -> Result<DMatrix<T>> {
    let tol = T::lit(DEFAULT_RANK_TOL);
    let trace_khk = || h.tr_mul(&k.apply(h)).trace().max(T::zero());
    Ok(match form {
        FormulationId::L => whitened(k, h)?.0,
        FormulationId::M => svd_compact(&k.apply(h), tol)?.polar(),
        FormulationId::N => normalized(whitened(k, h)?.0),
        FormulationId::O => {
            let t = trace_khk();
            let scale = if t > T::zero() { T::one() / t.sqrt() } else { T::one() };
            svd_compact(&(k.apply(h) * scale), tol)?.polar()
        }
        FormulationId::P => {
            let (y, tr) = whitened(k, h)?;
            normalized(y * tr)
        }
        FormulationId::Q => {
            let t = trace_khk();
            let svd = svd_compact(&k.apply(h), tol)?;
            if !(t > T::zero()) {
                return Ok(DMatrix::zeros(h.nrows(), h.ncols()));
            }
            let sum = svd.singulars.iter().copied().fold(T::zero(), |a, b| a + b);
            svd.polar() * (sum / t.sqrt())
        }
        _ => return invalid(format!("no kernel-dual row for {}", form.label())),
    })
}

/// DCA on the kernelized dual of `form` (one of `L`..`Q`).
///
/// Row `L` minimizes objective `M`, `N` minimizes `O`, `P` minimizes `Q`; rows
/// `M`, `O`, `Q` minimize the kernel readings of `L`, `N`, `P`.
pub fn kernel_dual_iteration<T: Scalar>(
    form: FormulationId,
    k: &dyn KernelOperator<T>,
    cfg: &SolverConfig<T>,
) -> Result<SolverReport<T>> {
    if matches!(form, FormulationId::HolderPrimal | FormulationId::HolderDual) {
        return invalid("kernel_dual_iteration covers formulations l through q");
    }
    let n = k.dim();
    cfg.check_dims(n, n)?;
    let kind = match form {
        FormulationId::M | FormulationId::O => InitKind::SpectralBall,
        _ => InitKind::FrobeniusBall,
    };
    let init = initial_point(cfg, n, kind)?;
    let target = form.dual();
    run(
        cfg,
        init,
        |h| objective(target, Problem::Kernel(k), h),
        |h| kernel_dual_step(form, k, h),
    )
}
