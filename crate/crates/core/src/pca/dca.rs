use nalgebra::DMatrix;

use super::{initial_point, kernel_dual, objective, run, FormulationId, InitKind, Problem, SolverConfig, SolverReport};
use crate::dcfw::{self, SpectralFunction};
use crate::error::{Error, Result};
use crate::kernel::KernelOperator;
use crate::linalg::{self, svd_compact, DataMatrix, DEFAULT_RANK_TOL};
use crate::Scalar;

/// DCA for the variance formulation: `W <- U V^T` with `U S V^T = svd(X^T X W)`.
pub fn solve_dca_variance_primal<T: Scalar>(x: &DataMatrix<T>, cfg: &SolverConfig<T>) -> Result<SolverReport<T>> {
    let xv = x.values();
    cfg.check_dims(x.n_samples(), x.n_features())?;
    let init = initial_point(cfg, x.n_features(), InitKind::SpectralBall)?;
    let tol = T::lit(DEFAULT_RANK_TOL);
    run(
        cfg,
        init,
        |w| objective(FormulationId::L, Problem::Samples(xv), w),
        |w| Ok(svd_compact(&xv.tr_mul(&(xv * w)), tol)?.polar()),
    )
}

/// Kernelized counterpart of [`solve_dca_variance_primal`]: `H <- U V^T`
/// with `U S V^T = svd(K H)`.
pub fn solve_dca_variance_dual<T: Scalar>(
    k: &dyn KernelOperator<T>,
    cfg: &SolverConfig<T>,
) -> Result<SolverReport<T>> {
    kernel_dual::kernel_dual_iteration(FormulationId::M, k, cfg)
}

/// DCA for the Hölder primal: `W <- U S^{1/3} V^T` with
/// `U S V^T = svd(X^T X W)`.
pub fn solve_dca_holder_primal<T: Scalar>(x: &DataMatrix<T>, cfg: &SolverConfig<T>) -> Result<SolverReport<T>> {
    let xv = x.values();
    cfg.check_dims(x.n_samples(), x.n_features())?;
    let init = initial_point(cfg, x.n_features(), InitKind::SpectralBall)?;
    let tol = T::lit(DEFAULT_RANK_TOL);
    run(
        cfg,
        init,
        |w| objective(FormulationId::HolderPrimal, Problem::Samples(xv), w),
        |w| {
            let svd = svd_compact(&xv.tr_mul(&(xv * w)), tol)?;
            let out = svd.recompose_with(|s| s.cbrt());
            Ok(if svd.rank() == 0 { DMatrix::zeros(w.nrows(), w.ncols()) } else { out })
        },
    )
}

/// DCA for the Hölder dual: `H <- K H V Lambda^{-1/3} V^T` with
/// `V Lambda V^T = eig(H^T K H)`.
///
/// Fails with `SingularInnerMatrix` when `H^T K H` loses rank.
pub fn solve_dca_holder_dual<T: Scalar>(
    k: &dyn KernelOperator<T>,
    cfg: &SolverConfig<T>,
) -> Result<SolverReport<T>> {
    let n = k.dim();
    cfg.check_dims(n, n)?;
    let init = initial_point(cfg, n, InitKind::FrobeniusBall)?;
    let s = cfg.components;
    run(
        cfg,
        init,
        |h| objective(FormulationId::HolderDual, Problem::Kernel(k), h),
        |h| {
            let kh = k.apply(h);
            let eig = linalg::eig_compact(&linalg::symmetrize(&h.tr_mul(&kh)), T::lit(DEFAULT_RANK_TOL))?;
            if eig.rank() < s {
                return Err(Error::SingularInnerMatrix { kept: eig.rank(), expected: s });
            }
            let third = T::lit(1.0 / 3.0);
            Ok(kh * eig.spectral_map(|l| T::one() / l.powf(third)))
        },
    )
}

/// DCA on any formulation straight from its `(G, F)` pair, with `X` for
/// primal forms and `X^T` for dual ones: `V <- dG*(A^T dF(A V))`.
pub fn solve_dca<T: Scalar>(form: FormulationId, x: &DataMatrix<T>, cfg: &SolverConfig<T>) -> Result<SolverReport<T>> {
    let xv = x.values();
    cfg.check_dims(x.n_samples(), x.n_features())?;
    let (g, f) = form.pair::<T>();
    let kind = match g {
        SpectralFunction::IndicatorFrobeniusBall => InitKind::FrobeniusBall,
        _ => InitKind::SpectralBall,
    };
    let problem = Problem::Samples(xv);
    let init = initial_point(cfg, problem.variable_rows(form), kind)?;
    let fwd = |v: &DMatrix<T>| xv * v;
    let bwd = |v: &DMatrix<T>| xv.tr_mul(v);
    let (apply_a, apply_at): (&dyn Fn(&DMatrix<T>) -> DMatrix<T>, &dyn Fn(&DMatrix<T>) -> DMatrix<T>) =
        if form.is_primal() { (&fwd, &bwd) } else { (&bwd, &fwd) };
    let tol = T::lit(DEFAULT_RANK_TOL);
    run(
        cfg,
        init,
        |v| objective(form, problem, v),
        |v| dcfw::dca_step(&g, &f, apply_a, apply_at, v, tol),
    )
}
