use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;

use pcadc::bench::{self, io::read_matrix, io::write_matrix};
use pcadc::kernel::kernel_matrix;
use pcadc::pca::{self, Problem};
use pcadc::robust;
use pcadc::{
    DataMatrix, Error, FormulationId, KernelSpec, OosProjector, RobustConfig, SolverConfig, SolverReport,
    SpectralFunction,
};

#[derive(Parser)]
#[command(name = "pcadc", version, about = "PCA and robust kernel PCA as difference-of-convex programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one formulation on a matrix CSV.
    Solve(SolveArgs),
    /// Run a benchmark config and write raw rows.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate raw benchmark rows to mean and std per cell.
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Project points with a saved out-of-sample model.
    Oos {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KernelArg {
    Linear,
    Rbf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Dca,
    Pg,
}

#[derive(clap::Args)]
struct SolveArgs {
    /// l, m, n, o, p, q, holder-primal, holder-dual, robust-primal,
    /// robust-dual, robust-irls, simiter or dense.
    #[arg(long)]
    formulation: String,
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    components: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Solve the kernelized problem (dual variable, N x s).
    #[arg(long, value_enum)]
    kernel: Option<KernelArg>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Robust regularizer; defaults to 1e-8 times the largest row norm.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    stepsize: Option<f64>,
    #[arg(long, value_enum, default_value = "dca")]
    method: MethodArg,
    /// Subtract column means first.
    #[arg(long)]
    center: bool,
    /// Solution matrix (W, d x s, or H, N x s).
    #[arg(long)]
    out: PathBuf,
    /// Save an out-of-sample projector (kernel duals and robust-dual only).
    #[arg(long)]
    model_out: Option<PathBuf>,
}

/// Solver failures exit with 1, everything else with 2.
enum Failure {
    Usage(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::InvalidInput(_) | Error::Io(_) => Failure::Usage(e.to_string()),
            _ => Failure::Solver(e.to_string()),
        }
    }
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn with_path(path: &Path, e: Error) -> Failure {
    match e {
        Error::Parse { .. } => Failure::Usage(format!("{}: {e}", path.display())),
        other => other.into(),
    }
}

fn kernel_spec(args: &SolveArgs) -> Result<Option<KernelSpec>, Failure> {
    match (args.kernel, args.gamma) {
        (None, Some(_)) => Err(Failure::Usage("--gamma needs --kernel rbf".into())),
        (None, None) => Ok(None),
        (Some(KernelArg::Linear), Some(_)) => Err(Failure::Usage("--gamma only applies to --kernel rbf".into())),
        (Some(KernelArg::Linear), None) => Ok(Some(KernelSpec::Linear)),
        (Some(KernelArg::Rbf), g) => Ok(Some(KernelSpec::rbf(g.unwrap_or(1.0))?)),
    }
}

fn solve(args: SolveArgs) -> Result<(), Failure> {
    let mut x = read_matrix(open(&args.input)?).map_err(|e| with_path(&args.input, e))?;
    if args.center {
        x = x.centered();
    }
    let spec = kernel_spec(&args)?;
    let mut cfg = SolverConfig::new(args.components)
        .with_tol(args.tol)
        .with_max_iters(args.max_iters)
        .with_seed(args.seed);
    if let Some(step) = args.stepsize {
        cfg = cfg.with_stepsize(step);
    }
    cfg.validate()?;
    let robust_cfg = || {
        let r = RobustConfig::new(cfg.clone());
        match args.epsilon {
            Some(e) => r.with_epsilon(e),
            None => r,
        }
    };
    if args.epsilon.is_some() && !args.formulation.starts_with("robust-") {
        return Err(Failure::Usage("--epsilon only applies to robust formulations".into()));
    }
    if args.method == MethodArg::Pg && !matches!(args.formulation.as_str(), "l" | "n" | "o" | "q") {
        return Err(Failure::Usage("--method pg supports l, n, o and q".into()));
    }
    let samples_only = |name: &str| match spec {
        Some(_) => Err(Failure::Usage(format!("{name} does not take --kernel"))),
        None => Ok(()),
    };

    // (report, primal G for the projector, kernel used)
    let (report, projector_g, kernel): (SolverReport<f64>, Option<SpectralFunction<f64>>, _) =
        match args.formulation.as_str() {
            "robust-primal" => {
                samples_only("robust-primal")?;
                (robust::solve_robust_primal(&x, &robust_cfg())?, None, None)
            }
            "robust-irls" => {
                samples_only("robust-irls")?;
                (robust::solve_robust_irls(&x, &robust_cfg())?, None, None)
            }
            "robust-dual" => {
                let spec = spec.unwrap_or(KernelSpec::Linear);
                let k = kernel_matrix(&x, spec);
                let r = robust::solve_robust_dual(&k, &robust_cfg())?;
                (r, Some(SpectralFunction::IndicatorSpectralBall), Some((k, spec)))
            }
            "simiter" => {
                samples_only("simiter")?;
                (pca::simultaneous_iteration_gram(&x, &cfg)?, None, None)
            }
            "dense" => {
                samples_only("dense")?;
                let (w, _) = pca::dense_pca_oracle(&x, args.components)?;
                let value = pca::objective(FormulationId::L, Problem::Samples(x.values()), &w)?;
                let report = SolverReport {
                    variable: w,
                    objective_trace: vec![value],
                    iterations: 0,
                    wall_time: 0.0,
                    termination: pca::Termination::Converged,
                    iterates: Vec::new(),
                };
                (report, None, None)
            }
            name => {
                let form: FormulationId = name.parse()?;
                solve_formulation(form, &x, spec, args.method, &cfg)?
            }
        };

    write_matrix(&report.variable, create(&args.out)?)?;
    eprintln!(
        "objective {:.12e}  iterations {}  termination {:?}",
        report.objective(),
        report.iterations,
        report.termination
    );
    if let Some(path) = &args.model_out {
        let (Some(g), Some((k, spec))) = (projector_g, kernel) else {
            return Err(Failure::Usage(
                "--model-out needs a kernelized dual: m, o, q, holder-dual or robust-dual with --kernel".into(),
            ));
        };
        let proj = OosProjector::build(&report.variable, &k, &g, spec, &x)?;
        proj.serialize(create(path)?)?;
    }
    Ok(())
}

type Solved = (SolverReport<f64>, Option<SpectralFunction<f64>>, Option<(pcadc::KernelMatrix<f64>, KernelSpec)>);

fn solve_formulation(
    form: FormulationId,
    x: &DataMatrix<f64>,
    spec: Option<KernelSpec>,
    method: MethodArg,
    cfg: &SolverConfig<f64>,
) -> Result<Solved, Failure> {
    let Some(spec) = spec else {
        let r = match method {
            MethodArg::Pg => pca::proximal_gradient(form, Problem::Samples(x.values()), cfg)?,
            MethodArg::Dca if form == FormulationId::L => pca::solve_dca_variance_primal(x, cfg)?,
            MethodArg::Dca => pca::solve_dca(form, x, cfg)?,
        };
        return Ok((r, None, None));
    };
    let k = kernel_matrix(x, spec);
    let r = match (method, form) {
        (MethodArg::Pg, _) => pca::proximal_gradient(form, Problem::Kernel(&k), cfg)?,
        (MethodArg::Dca, FormulationId::HolderDual) => pca::solve_dca_holder_dual(&k, cfg)?,
        (MethodArg::Dca, FormulationId::HolderPrimal) => {
            return Err(Failure::Usage("holder-primal has no kernel form; use holder-dual".into()))
        }
        (MethodArg::Dca, _) => pca::kernel_dual_iteration(form.dual(), &k, cfg)?,
    };
    // Only dual-side variables map back to the primal through the projector.
    let g = (!form.is_primal()).then(|| form.dual().pair::<f64>().0);
    Ok((r, g, Some((k, spec))))
}

fn run_bench(config: &Path, out: &Path) -> Result<(), Failure> {
    let text = std::fs::read_to_string(config).map_err(|e| Failure::Usage(format!("{}: {e}", config.display())))?;
    let experiments = bench::parse_config(&text).map_err(|e| with_path(config, e))?;
    let rows = bench::run_suite(&experiments, create(out)?)?;
    let failed = rows.iter().filter(|r| r.status == bench::Status::Failed).count();
    eprintln!("{} rows written to {} ({failed} failed)", rows.len(), out.display());
    Ok(())
}

fn run_summarize(input: &Path, out: &Path) -> Result<(), Failure> {
    let rows = bench::read_records(open(input)?).map_err(|e| with_path(input, e))?;
    bench::records::write_summary(&bench::summarize(&rows), create(out)?)?;
    Ok(())
}

fn run_oos(model: &Path, points: &Path, out: &Path) -> Result<(), Failure> {
    let proj = OosProjector::<f64>::deserialize(open(model)?).map_err(|e| with_path(model, e))?;
    let pts = read_matrix(open(points)?).map_err(|e| with_path(points, e))?;
    let scores: DMatrix<f64> = proj.project_rows(pts.values())?;
    write_matrix(&scores, create(out)?)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Bench { config, out } => run_bench(&config, &out),
        Command::Summarize { input, out } => run_summarize(&input, &out),
        Command::Oos { model, points, out } => run_oos(&model, &points, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("solver failed: {msg}");
            ExitCode::from(1)
        }
    }
}
