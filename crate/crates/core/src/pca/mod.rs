//! PCA solvers: DCA on the primal and kernelized dual formulations,
//! simultaneous iteration, projected gradient, objective evaluators and the
//! dense reference solution.

use std::str::FromStr;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use crate::dcfw::SpectralFunction;
use crate::error::{invalid, Result};
use crate::kernel::KernelOperator;
use crate::linalg::{self, DataMatrix, DEFAULT_RANK_TOL};
use crate::rng;
use crate::Scalar;

mod dca;
mod iteration;
mod kernel_dual;

pub use dca::{
    solve_dca, solve_dca_holder_dual, solve_dca_holder_primal, solve_dca_variance_dual, solve_dca_variance_primal,
};
pub use iteration::{
    project_frobenius_ball, project_spectral_ball, proximal_gradient, simultaneous_iteration,
    simultaneous_iteration_gram,
};
pub use kernel_dual::kernel_dual_iteration;

/// The PCA formulations. `L`..`Q` come in dual pairs `(L, M)`, `(N, O)`,
/// `(P, Q)`; the Hölder pair is `(HolderPrimal, HolderDual)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormulationId {
    /// `delta(||W||_inf <= 1) - 1/2 ||XW||_F^2`
    L,
    /// `1/2 ||H||_F^2 - ||X^T H||_S1`
    M,
    /// `delta(||W||_inf <= 1) - ||XW||_F`
    N,
    /// `delta(||H||_F <= 1) - ||X^T H||_S1`
    O,
    /// `1/2 ||W||_inf^2 - ||XW||_F`
    P,
    /// `delta(||H||_F <= 1) - 1/2 ||X^T H||_S1^2`
    Q,
    /// `1/4 ||W||_S4^4 - 1/2 ||XW||_F^2`
    HolderPrimal,
    /// `1/2 ||H||_F^2 - 3/4 ||X^T H||_S(4/3)^(4/3)`
    HolderDual,
}

impl FormulationId {
    pub const ALL: [FormulationId; 8] = [
        Self::L,
        Self::M,
        Self::N,
        Self::O,
        Self::P,
        Self::Q,
        Self::HolderPrimal,
        Self::HolderDual,
    ];

    /// Primal forms act on `W` (d x s) through `XW`; dual forms act on `H`
    /// (N x s) through `X^T H`.
    pub fn is_primal(self) -> bool {
        matches!(self, Self::L | Self::N | Self::P | Self::HolderPrimal)
    }

    pub fn dual(self) -> Self {
        match self {
            Self::L => Self::M,
            Self::M => Self::L,
            Self::N => Self::O,
            Self::O => Self::N,
            Self::P => Self::Q,
            Self::Q => Self::P,
            Self::HolderPrimal => Self::HolderDual,
            Self::HolderDual => Self::HolderPrimal,
        }
    }

    /// `(G, F)` with objective `G(V) - F(image of V)`.
    pub fn pair<T: Scalar>(self) -> (SpectralFunction<T>, SpectralFunction<T>) {
        use SpectralFunction as S;
        match self {
            Self::L => (S::IndicatorSpectralBall, S::FrobeniusSqHalf),
            Self::M => (S::FrobeniusSqHalf, S::SchattenNorm { p: 1.0 }),
            Self::N => (S::IndicatorSpectralBall, S::FrobeniusNorm),
            Self::O => (S::IndicatorFrobeniusBall, S::SchattenNorm { p: 1.0 }),
            Self::P => (S::SpectralNormSqHalf, S::FrobeniusNorm),
            Self::Q => (S::IndicatorFrobeniusBall, S::NuclearNormSqHalf),
            Self::HolderPrimal => (S::SchattenPowerScaled { p: 4.0 }, S::FrobeniusSqHalf),
            Self::HolderDual => (S::FrobeniusSqHalf, S::SchattenPowerScaled { p: 4.0 / 3.0 }),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::L => "l",
            Self::M => "m",
            Self::N => "n",
            Self::O => "o",
            Self::P => "p",
            Self::Q => "q",
            Self::HolderPrimal => "holder-primal",
            Self::HolderDual => "holder-dual",
        }
    }
}

impl FromStr for FormulationId {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.label().eq_ignore_ascii_case(s))
            .map_or_else(|| invalid(format!("unknown formulation '{s}'")), Ok)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StoppingRule<T: Scalar> {
    /// `|f_k - f_{k-1}| / max(1, |f_{k-1}|) < tol`.
    RelObjChange,
    /// Largest principal angle between consecutive iterates `< tol`.
    SubspaceAngle,
    /// `|f_k - f*| / |f*| <= tol` for a known optimum `f*`.
    RelErrToReference(T),
    /// Run exactly `max_iters` iterations.
    MaxItersOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIters,
    /// The configured time budget ran out.
    Deadline,
}

#[derive(Debug, Clone)]
pub struct SolverConfig<T: Scalar> {
    pub components: usize,
    pub tol: T,
    pub max_iters: usize,
    pub seed: u64,
    /// Projected-gradient stepsize; ignored by DCA.
    pub stepsize: T,
    pub stopping: StoppingRule<T>,
    /// Starting point; drawn from `seed` when absent.
    pub init: Option<DMatrix<T>>,
    /// Record every iterate in the report.
    pub keep_iterates: bool,
    pub time_budget: Option<Duration>,
}

impl<T: Scalar> SolverConfig<T> {
    pub fn new(components: usize) -> Self {
        Self {
            components,
            tol: T::lit(1e-10),
            max_iters: 1000,
            seed: 0,
            stepsize: T::one(),
            stopping: StoppingRule::RelObjChange,
            init: None,
            keep_iterates: false,
            time_budget: None,
        }
    }

    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_stepsize(mut self, stepsize: T) -> Self {
        self.stepsize = stepsize;
        self
    }

    pub fn with_stopping(mut self, stopping: StoppingRule<T>) -> Self {
        self.stopping = stopping;
        self
    }

    pub fn with_init(mut self, init: DMatrix<T>) -> Self {
        self.init = Some(init);
        self
    }

    pub fn keeping_iterates(mut self) -> Self {
        self.keep_iterates = true;
        self
    }

    pub fn with_time_budget(mut self, budget: Duration) -> Self {
        self.time_budget = Some(budget);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.components == 0 {
            return invalid("components must be positive");
        }
        if !(self.tol > T::zero()) {
            return invalid("tol must be positive");
        }
        if self.max_iters == 0 {
            return invalid("max_iters must be positive");
        }
        if !(self.stepsize > T::zero()) || !self.stepsize.is_finite_value() {
            return invalid("stepsize must be positive and finite");
        }
        Ok(())
    }

    pub(crate) fn check_dims(&self, n: usize, d: usize) -> Result<()> {
        self.validate()?;
        if self.components > n.min(d) {
            return invalid(format!(
                "components {} exceed min(N, d) = {}",
                self.components,
                n.min(d)
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolverReport<T: Scalar> {
    /// `W` (d x s) for primal solvers, `H` (N x s) for dual ones.
    pub variable: DMatrix<T>,
    /// Objective at the starting point followed by one value per iteration.
    pub objective_trace: Vec<T>,
    pub iterations: usize,
    /// Seconds.
    pub wall_time: f64,
    pub termination: Termination,
    /// Starting point and every iterate, when requested.
    pub iterates: Vec<DMatrix<T>>,
}

impl<T: Scalar> SolverReport<T> {
    pub fn objective(&self) -> T {
        *self.objective_trace.last().expect("trace holds the initial value")
    }
}

/// Data a formulation is evaluated against: the samples `X`, or a kernel `K`
/// standing in for `X X^T`.
///
/// With a kernel, primal forms are read with `X^T` in place of `X`, so every
/// form becomes a function of an `N x s` variable.
#[derive(Clone, Copy)]
pub enum Problem<'a, T: Scalar> {
    Samples(&'a DMatrix<T>),
    Kernel(&'a dyn KernelOperator<T>),
}

impl<'a, T: Scalar> Problem<'a, T> {
    /// Expected number of rows of the variable of `form`.
    pub fn variable_rows(&self, form: FormulationId) -> usize {
        match self {
            Self::Samples(x) if form.is_primal() => x.ncols(),
            Self::Samples(x) => x.nrows(),
            Self::Kernel(k) => k.dim(),
        }
    }

    /// Singular values of the linear image of `v` (`XV` or `X^T V`).
    pub(crate) fn image_singulars(&self, form: FormulationId, v: &DMatrix<T>) -> Result<Vec<T>> {
        let rows = self.variable_rows(form);
        if v.nrows() != rows {
            return invalid(format!(
                "variable has {} rows, formulation {} needs {rows}",
                v.nrows(),
                form.label()
            ));
        }
        linalg::ensure_finite(v, "variable")?;
        Ok(match self {
            Self::Samples(x) if form.is_primal() => linalg::singular_values(&(*x * v)).iter().copied().collect(),
            Self::Samples(x) => linalg::singular_values(&x.tr_mul(v)).iter().copied().collect(),
            Self::Kernel(k) => gram_singulars(*k, v),
        })
    }
}

/// `sqrt(lambda(V^T K V))`, i.e. the singular values of `X^T V`.
pub(crate) fn gram_singulars<T: Scalar>(k: &dyn KernelOperator<T>, v: &DMatrix<T>) -> Vec<T> {
    let inner = linalg::symmetrize(&v.tr_mul(&k.apply(v)));
    let (lambda, _) = linalg::symmetric_eigen_sorted(&inner);
    lambda.iter().map(|l| l.max(T::zero()).sqrt()).collect()
}

/// DC objective of `form`; `+inf` outside the constraint set.
pub fn objective<T: Scalar>(form: FormulationId, problem: Problem<'_, T>, variable: &DMatrix<T>) -> Result<T> {
    let sigma = problem.image_singulars(form, variable)?;
    let (g, f) = form.pair::<T>();
    let gv = g.evaluate(variable)?;
    if !gv.is_finite_value() {
        return Ok(T::infinity());
    }
    Ok(gv - f.evaluate_spectrum(&sigma)?)
}

/// Optimal value of `form` for data with singular values `sigma`
/// (nonincreasing) and `s` components.
pub fn formulation_optimum<T: Scalar>(form: FormulationId, sigma: &[T], s: usize) -> Result<T> {
    if s == 0 || s > sigma.len() {
        return invalid(format!("need 1 <= s <= {}, got {s}", sigma.len()));
    }
    let top = &sigma[..s];
    let sq: T = top.iter().map(|x| *x * *x).fold(T::zero(), |a, b| a + b);
    let half = T::lit(0.5);
    Ok(match form {
        FormulationId::L | FormulationId::M | FormulationId::P | FormulationId::Q => -half * sq,
        FormulationId::N | FormulationId::O => -sq.sqrt(),
        FormulationId::HolderPrimal | FormulationId::HolderDual => {
            -T::lit(0.25) * top.iter().map(|x| (*x * *x) * (*x * *x)).fold(T::zero(), |a, b| a + b)
        }
    })
}

fn check_rank<T: Scalar>(x: &DMatrix<T>, s: usize) -> Result<Vec<T>> {
    let svd = linalg::svd_compact(x, T::lit(DEFAULT_RANK_TOL))?;
    if s == 0 || s > svd.rank() {
        return invalid(format!("components {s} must lie in 1..=rank(X) = {}", svd.rank()));
    }
    Ok(svd.singulars.iter().copied().collect())
}

/// `-1/2 sum_{i<=s} sigma_i(X)^2`.
pub fn optimal_value_reference<T: Scalar>(x: &DataMatrix<T>, s: usize) -> Result<T> {
    let sigma = check_rank(x.values(), s)?;
    formulation_optimum(FormulationId::L, &sigma, s)
}

/// Top-`s` eigenvectors of `X^T X` and their eigenvalues `sigma_i^2`.
pub fn dense_pca_oracle<T: Scalar>(x: &DataMatrix<T>, s: usize) -> Result<(DMatrix<T>, DVector<T>)> {
    check_rank(x.values(), s)?;
    let gram = linalg::symmetrize(&x.values().tr_mul(x.values()));
    let (lambda, vectors) = linalg::symmetric_eigen_sorted(&gram);
    Ok((vectors.columns(0, s).into_owned(), lambda.rows(0, s).into_owned()))
}

/// Rotates `v` within its span so that its columns follow the eigenvectors of
/// the `s x s` matrix `V^T X^T X V` (primal) or `V^T K V` (kernel), largest
/// first.
pub fn align_components<T: Scalar>(problem: Problem<'_, T>, v: &DMatrix<T>) -> DMatrix<T> {
    let inner = match problem {
        Problem::Samples(x) if v.nrows() == x.ncols() => {
            let xv = x * v;
            xv.tr_mul(&xv)
        }
        Problem::Samples(x) => {
            let xv = x.tr_mul(v);
            xv.tr_mul(&xv)
        }
        Problem::Kernel(k) => v.tr_mul(&k.apply(v)),
    };
    let (_, vectors) = linalg::symmetric_eigen_sorted(&linalg::symmetrize(&inner));
    v * vectors
}

#[derive(Clone, Copy)]
pub(crate) enum InitKind {
    SpectralBall,
    FrobeniusBall,
}

/// The user's starting point, or a seeded Gaussian scaled onto the boundary
/// of the relevant ball.
pub(crate) fn initial_point<T: Scalar>(cfg: &SolverConfig<T>, rows: usize, kind: InitKind) -> Result<DMatrix<T>> {
    let s = cfg.components;
    if let Some(w) = &cfg.init {
        if w.shape() != (rows, s) {
            return invalid(format!("init has shape {:?}, expected ({rows}, {s})", w.shape()));
        }
        linalg::ensure_finite(w, "init")?;
        return Ok(w.clone());
    }
    let g: DMatrix<T> = rng::gaussian_matrix(&mut rng::stream(cfg.seed, 0), rows, s);
    let scale = match kind {
        InitKind::SpectralBall => linalg::singular_values(&g)[0],
        InitKind::FrobeniusBall => g.norm(),
    };
    Ok(g / scale)
}

fn rel_change<T: Scalar>(prev: T, next: T) -> T {
    if !prev.is_finite_value() || !next.is_finite_value() {
        return T::infinity();
    }
    (next - prev).abs() / prev.abs().max(T::one())
}

/// Shared iteration loop: evaluates, steps, records and checks the stopping
/// rule.
pub(crate) fn run<T, O, S>(cfg: &SolverConfig<T>, init: DMatrix<T>, mut objective: O, mut step: S) -> Result<SolverReport<T>>
where
    T: Scalar,
    O: FnMut(&DMatrix<T>) -> Result<T>,
    S: FnMut(&DMatrix<T>) -> Result<DMatrix<T>>,
{
    let start = Instant::now();
    let mut current = init;
    let mut value = objective(&current)?;
    let mut trace = vec![value];
    let mut iterates = Vec::new();
    if cfg.keep_iterates {
        iterates.push(current.clone());
    }
    let mut termination = Termination::MaxIters;
    let mut iterations = 0;
    for k in 1..=cfg.max_iters {
        if cfg.time_budget.is_some_and(|b| start.elapsed() > b) {
            termination = Termination::Deadline;
            break;
        }
        let next = step(&current)?;
        let next_value = objective(&next)?;
        iterations = k;
        trace.push(next_value);
        let converged = match cfg.stopping {
            StoppingRule::RelObjChange => rel_change(value, next_value) < cfg.tol,
            StoppingRule::SubspaceAngle => {
                linalg::subspace_distance(&current, &next).is_ok_and(|a| a < cfg.tol)
            }
            StoppingRule::RelErrToReference(reference) => {
                let denom = if reference == T::zero() { T::one() } else { reference.abs() };
                next_value.is_finite_value() && (next_value - reference).abs() / denom <= cfg.tol
            }
            StoppingRule::MaxItersOnly => false,
        };
        if cfg.keep_iterates {
            iterates.push(next.clone());
        }
        current = next;
        value = next_value;
        if converged {
            termination = Termination::Converged;
            break;
        }
    }
    Ok(SolverReport {
        variable: current,
        objective_trace: trace,
        iterations,
        wall_time: start.elapsed().as_secs_f64(),
        termination,
        iterates,
    })
}
