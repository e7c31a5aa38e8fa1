//! Runs every (method x problem x repetition) of an experiment and streams
//! the rows to CSV.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::RngCore;

use super::config::{BenchStopping, Experiment, GeneratorSpec, ProblemSpec};
use super::generate;
use super::records::{BenchRecord, RecordWriter, Status};
use crate::error::{invalid, Error, Result};
use crate::kernel::{kernel_matrix, KernelMatrix, KernelSpec};
use crate::linalg::{self, DataMatrix, DEFAULT_RANK_TOL};
use crate::pca::{self, FormulationId, Problem, SolverConfig, SolverReport, StoppingRule, Termination};
use crate::rng::{self, StreamRng};
use crate::robust::{self, RobustConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodId {
    DcaPrimal,
    DcaDual,
    HolderPrimal,
    HolderDual,
    /// Kernel-dual DCA row for a formulation in `L..=Q`.
    KernelDual(FormulationId),
    /// Projected gradient on `L`, `N`, `O` or `Q`.
    ProxGrad(FormulationId),
    SimIter,
    Dense,
    RobustPrimal,
    RobustDual,
    RobustIrls,
}

impl MethodId {
    pub fn all() -> Vec<MethodId> {
        use FormulationId as F;
        let mut v = vec![Self::DcaPrimal, Self::DcaDual, Self::HolderPrimal, Self::HolderDual];
        v.extend([F::L, F::M, F::N, F::O, F::P, F::Q].map(Self::KernelDual));
        v.extend([F::L, F::N, F::O, F::Q].map(Self::ProxGrad));
        v.extend([Self::SimIter, Self::Dense, Self::RobustPrimal, Self::RobustDual, Self::RobustIrls]);
        v
    }

    /// Formulation whose objective the method reports, if any.
    pub fn formulation(self) -> Option<FormulationId> {
        match self {
            Self::DcaPrimal | Self::SimIter | Self::Dense => Some(FormulationId::L),
            Self::DcaDual => Some(FormulationId::M),
            Self::HolderPrimal => Some(FormulationId::HolderPrimal),
            Self::HolderDual => Some(FormulationId::HolderDual),
            Self::KernelDual(f) => Some(f.dual()),
            Self::ProxGrad(f) => Some(f),
            Self::RobustPrimal | Self::RobustDual | Self::RobustIrls => None,
        }
    }

    fn needs_kernel(self) -> bool {
        matches!(
            self,
            Self::DcaDual | Self::HolderDual | Self::KernelDual(_) | Self::RobustDual
        )
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DcaPrimal => f.write_str("dca-primal"),
            Self::DcaDual => f.write_str("dca-dual"),
            Self::HolderPrimal => f.write_str("holder-primal"),
            Self::HolderDual => f.write_str("holder-dual"),
            Self::KernelDual(form) => write!(f, "kdual-{}", form.label()),
            Self::ProxGrad(form) => write!(f, "pg-{}", form.label()),
            Self::SimIter => f.write_str("simiter"),
            Self::Dense => f.write_str("dense"),
            Self::RobustPrimal => f.write_str("robust-primal"),
            Self::RobustDual => f.write_str("robust-dual"),
            Self::RobustIrls => f.write_str("robust-irls"),
        }
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::all()
            .into_iter()
            .find(|m| m.to_string() == s)
            .map_or_else(|| invalid(format!("unknown method '{s}'")), Ok)
    }
}

/// A generated problem plus everything derived from it outside the timed
/// region.
pub struct Instance {
    pub data: DataMatrix<f64>,
    pub kernel: Option<KernelMatrix<f64>>,
    /// Singular values of the data, largest first.
    pub sigma: Vec<f64>,
    /// Seed for solver starting points.
    pub solver_seed: u64,
}

fn generate_data(rng: &mut StreamRng, spec: &ProblemSpec, generator: &GeneratorSpec) -> Result<DataMatrix<f64>> {
    let (n, d) = (spec.n_samples, spec.n_features);
    match generator {
        GeneratorSpec::Gaussian => generate::gen_gaussian_with(rng, n, d),
        GeneratorSpec::FixedSpectrum(s) => generate::gen_fixed_spectrum_with(rng, n, d, &s.values(n.min(d))),
        GeneratorSpec::Contaminated {
            base,
            fraction,
            noise_sigma,
        } => {
            let clean = generate_data(rng, spec, base)?;
            Ok(generate::contaminate_with(rng, &clean, *fraction, *noise_sigma)?.0)
        }
    }
}

/// Builds problem `index` of a suite from stream `(spec.seed, index)`.
pub fn build_instance(spec: &ProblemSpec, index: u64, with_kernel: bool) -> Result<Instance> {
    let mut rng = rng::stream(spec.seed, index);
    let data = generate_data(&mut rng, spec, &spec.generator)?;
    let solver_seed = rng.next_u64();
    let sigma: Vec<f64> = linalg::svd_compact(data.values(), DEFAULT_RANK_TOL)?
        .singulars
        .iter()
        .copied()
        .collect();
    let kernel = with_kernel.then(|| kernel_matrix(&data, KernelSpec::Linear));
    Ok(Instance {
        data,
        kernel,
        sigma,
        solver_seed,
    })
}

/// Solver settings shared by every method on one problem.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub components: usize,
    pub tol: f64,
    pub max_iters: usize,
    pub stopping: BenchStopping,
    pub time_budget: Option<Duration>,
}

fn solver_config(method: MethodId, inst: &Instance, run: &RunSettings) -> Result<SolverConfig<f64>> {
    let stopping = match run.stopping {
        BenchStopping::RelErr => match method.formulation() {
            Some(form) => StoppingRule::RelErrToReference(pca::formulation_optimum(form, &inst.sigma, run.components)?),
            None => StoppingRule::RelObjChange,
        },
        BenchStopping::RelObj => StoppingRule::RelObjChange,
        BenchStopping::Angle => StoppingRule::SubspaceAngle,
    };
    let mut cfg = SolverConfig::new(run.components)
        .with_tol(run.tol)
        .with_max_iters(run.max_iters)
        .with_seed(inst.solver_seed)
        .with_stopping(stopping);
    if let Some(b) = run.time_budget {
        cfg = cfg.with_time_budget(b);
    }
    Ok(cfg)
}

/// Runs one method on one instance. Only this call is timed by the harness.
pub fn run_method(method: MethodId, inst: &Instance, run: &RunSettings) -> Result<SolverReport<f64>> {
    let cfg = solver_config(method, inst, run)?;
    let x = &inst.data;
    let kernel = || {
        inst.kernel
            .as_ref()
            .ok_or_else(|| Error::InvalidInput(format!("{method} needs the kernel matrix")))
    };
    match method {
        MethodId::DcaPrimal => pca::solve_dca_variance_primal(x, &cfg),
        MethodId::DcaDual => pca::solve_dca_variance_dual(kernel()?, &cfg),
        MethodId::HolderPrimal => pca::solve_dca_holder_primal(x, &cfg),
        MethodId::HolderDual => pca::solve_dca_holder_dual(kernel()?, &cfg),
        MethodId::KernelDual(form) => pca::kernel_dual_iteration(form, kernel()?, &cfg),
        MethodId::ProxGrad(form) => pca::proximal_gradient(form, Problem::Samples(x.values()), &cfg),
        MethodId::SimIter => pca::simultaneous_iteration_gram(x, &cfg),
        MethodId::Dense => {
            let start = Instant::now();
            let (w, _) = pca::dense_pca_oracle(x, run.components)?;
            let value = pca::objective(FormulationId::L, Problem::Samples(x.values()), &w)?;
            Ok(SolverReport {
                variable: w,
                objective_trace: vec![value],
                iterations: 0,
                wall_time: start.elapsed().as_secs_f64(),
                termination: Termination::Converged,
                iterates: Vec::new(),
            })
        }
        MethodId::RobustPrimal => robust::solve_robust_primal(x, &RobustConfig::new(cfg)),
        MethodId::RobustDual => robust::solve_robust_dual(kernel()?, &RobustConfig::new(cfg)),
        MethodId::RobustIrls => robust::solve_robust_irls(x, &RobustConfig::new(cfg)),
    }
}

struct Outcome {
    ms: f64,
    objective: Option<f64>,
    iterations: usize,
    status: Status,
}

fn timed(method: MethodId, inst: &Instance, run: &RunSettings) -> Outcome {
    let start = Instant::now();
    let result = run_method(method, inst, run);
    let elapsed = start.elapsed();
    let over_budget = run.time_budget.is_some_and(|b| elapsed > b);
    match result {
        Ok(r) if r.termination == Termination::Deadline || over_budget => Outcome {
            ms: elapsed.as_secs_f64() * 1e3,
            objective: None,
            iterations: r.iterations,
            status: Status::Skipped,
        },
        Ok(r) => Outcome {
            ms: elapsed.as_secs_f64() * 1e3,
            objective: Some(r.objective()).filter(|v| v.is_finite()),
            iterations: r.iterations,
            status: match r.termination {
                Termination::Converged => Status::Converged,
                _ => Status::MaxIters,
            },
        },
        Err(_) => Outcome {
            ms: elapsed.as_secs_f64() * 1e3,
            objective: None,
            iterations: 0,
            status: Status::Failed,
        },
    }
}

/// Runs every experiment, writing one CSV row per repetition as soon as it
/// finishes. Returns the rows as well.
///
/// Each problem gets stream `(seed, index)` with `index` counting problems
/// across the whole suite. After `warmup` untimed solves, `reps` timed ones
/// follow; once a repetition is skipped the remaining ones are recorded as
/// skipped without running.
pub fn run_suite<W: Write>(experiments: &[Experiment], out: W) -> Result<Vec<BenchRecord>> {
    let mut writer = RecordWriter::new(out)?;
    let mut records = Vec::new();
    let mut index = 0u64;
    for ex in experiments {
        let with_kernel = ex.methods.iter().any(|m| m.needs_kernel());
        for spec in &ex.problems {
            let inst = build_instance(spec, index, with_kernel)?;
            index += 1;
            let settings = RunSettings {
                components: spec.components,
                tol: spec.tol,
                max_iters: ex.max_iters,
                stopping: ex.stopping,
                time_budget: Some(ex.time_budget),
            };
            for &method in &ex.methods {
                let mut skip = false;
                for _ in 0..ex.warmup {
                    if timed(method, &inst, &settings).status == Status::Skipped {
                        skip = true;
                        break;
                    }
                }
                for rep in 0..ex.reps {
                    let outcome = if skip {
                        Outcome {
                            ms: 0.0,
                            objective: None,
                            iterations: 0,
                            status: Status::Skipped,
                        }
                    } else {
                        timed(method, &inst, &settings)
                    };
                    skip |= outcome.status == Status::Skipped;
                    let record = BenchRecord {
                        method: method.to_string(),
                        generator: spec.generator.label(),
                        n_samples: spec.n_samples,
                        n_features: spec.n_features,
                        components: spec.components,
                        tol: spec.tol,
                        seed: spec.seed,
                        rep,
                        ms: outcome.ms,
                        objective: outcome.objective,
                        iterations: outcome.iterations,
                        status: outcome.status,
                    };
                    writer.write(&record)?;
                    records.push(record);
                }
            }
        }
    }
    Ok(records)
}
