use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use srr_lasso::bench::{self, BenchProtocol, ProblemSource};
use srr_lasso::io::{self, InputFormat, TraceFormat};
use srr_lasso::spectral::{self, ProductScheme};
use srr_lasso::{DesignMatrix, Error, Problem, RefineMethod, SolverConfig, Status, Variant};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MAX_SWEEPS: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;
pub const EXIT_SPECTRAL_BOUND: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "srr-lasso", version, about = "Lasso by coordinate descent with successive ray refinement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one Lasso problem.
    Solve(SolveArgs),
    /// Compare sweep counts of cd, srrc and srrt over a ratio grid.
    Bench(BenchArgs),
    /// Write a seeded Gaussian problem as two CSV files.
    Synth(SynthArgs),
    /// Eigenvalues of the Gauss-Seidel iteration matrix as JSON.
    Eigen(EigenArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// CSV (last column is the response unless --response is given) or libsvm file.
    #[arg(long)]
    input: PathBuf,
    /// Separate one-column CSV with the response.
    #[arg(long)]
    response: Option<PathBuf>,
    /// Input format; guessed from the extension by default.
    #[arg(long, value_parser = ["csv", "libsvm"])]
    format: Option<String>,
    /// Scale every column to unit Euclidean norm.
    #[arg(long)]
    normalize: bool,
}

impl InputArgs {
    fn load(&self) -> anyhow::Result<(DesignMatrix, Vec<f64>)> {
        let format = match self.format.as_deref() {
            Some("csv") => InputFormat::Csv,
            Some(_) => InputFormat::Libsvm,
            None => InputFormat::guess(&self.input),
        };
        let (x, y) = io::load(&self.input, format, self.response.as_deref())?;
        Ok(if self.normalize {
            (x.normalized_columns().0, y)
        } else {
            (x, y)
        })
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Regularization weight.
    #[arg(long, conflicts_with = "ratio", required_unless_present = "ratio")]
    lambda: Option<f64>,
    /// Regularization as a fraction of ||X^T y||_inf.
    #[arg(long)]
    ratio: Option<f64>,
    #[arg(long, default_value = "cd")]
    variant: Variant,
    /// Refinement factor method for lambda > 0.
    #[arg(long, default_value = "auto")]
    refine: RefineMethod,
    /// Stop when ||beta^k - beta^{k-1}||_2 <= this; 0 disables.
    #[arg(long, default_value_t = 1e-6)]
    step_tol: f64,
    /// Stop when the objective is at most this.
    #[arg(long)]
    target: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    max_sweeps: usize,
    /// Write the per-sweep trace here (.csv or .jsonl).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the solution vector here, one value per line.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Use this data file instead of synthetic problems.
    #[arg(long, conflicts_with_all = ["n", "p"])]
    input: Option<PathBuf>,
    #[arg(long, requires = "input")]
    response: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "libsvm"], requires = "input")]
    format: Option<String>,
    #[arg(long, requires = "input")]
    normalize: bool,
    /// Synthetic sample count.
    #[arg(long, default_value_t = 500)]
    n: usize,
    /// Synthetic variable count.
    #[arg(long, default_value_t = 1000)]
    p: usize,
    /// First synthetic seed; run i uses seed + i.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.1, 0.05, 0.01])]
    ratios: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [Variant::Cd, Variant::Srrc, Variant::Srrt])]
    variants: Vec<Variant>,
    #[arg(long, default_value_t = 1e-6)]
    cd_step_tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_sweeps: usize,
    #[arg(long, default_value = "auto")]
    refine: RefineMethod,
    /// Worker threads.
    #[arg(long, env = "SRR_LASSO_JOBS")]
    jobs: Option<usize>,
    /// Write one CSV row per run here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out_x: PathBuf,
    #[arg(long)]
    out_y: PathBuf,
}

#[derive(Debug, Args)]
struct EigenArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Trace whose refinement factors feed the per-sweep products.
    #[arg(long)]
    alphas_from: Option<PathBuf>,
    /// Product recursion; defaults to the variant recorded in the trace.
    #[arg(long, value_parser = ["cd", "srrc", "srrt"])]
    scheme: Option<String>,
    #[arg(long, default_value_t = spectral::DEFAULT_MAX_DIM)]
    max_dim: usize,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => EXIT_USAGE,
            };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
        Command::Synth(a) => cmd_synth(&a, out),
        Command::Eigen(a) => cmd_eigen(&a, out, err),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::Unsupported(_)) => EXIT_UNSUPPORTED,
                _ => EXIT_USAGE,
            }
        }
    }
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let (x, y) = a.input.load()?;
    let lambda = match (a.lambda, a.ratio) {
        (Some(l), None) => l,
        (None, Some(r)) => bench::lambda_from_ratio(&x, &y, r)?,
        _ => bail!("exactly one of --lambda and --ratio is required"),
    };
    let problem = Problem::new(x, y, lambda)?;
    let config = SolverConfig {
        refine_method: a.refine,
        trace: a.trace.is_some(),
        ..SolverConfig::new(a.variant)
    }
    .with_step_tol((a.step_tol > 0.0).then_some(a.step_tol))
    .with_target(a.target)
    .with_max_sweeps(a.max_sweeps);
    let outcome = srr_lasso::solve(&problem, &config)?;

    if let Some(path) = &a.trace {
        io::write_trace(&outcome.trace, path, TraceFormat::from_path(path))?;
    }
    if let Some(path) = &a.out {
        io::write_vector_csv(path, &outcome.beta)?;
    }
    let status = match outcome.status {
        Status::Converged(reason) => format!("converged ({reason:?})"),
        Status::MaxSweeps => "max sweeps reached".to_string(),
    };
    writeln!(out, "variant   {}", a.variant)?;
    writeln!(out, "lambda    {}", outcome.lambda)?;
    writeln!(out, "objective {:.12e}", outcome.objective)?;
    writeln!(out, "sweeps    {}", outcome.sweeps)?;
    writeln!(out, "sparsity  {:.6}", outcome.sparsity())?;
    writeln!(out, "status    {status}")?;
    Ok(if outcome.converged() {
        EXIT_OK
    } else {
        EXIT_MAX_SWEEPS
    })
}

fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let source = match &a.input {
        Some(path) => {
            let input = InputArgs {
                input: path.clone(),
                response: a.response.clone(),
                format: a.format.clone(),
                normalize: a.normalize,
            };
            let (x, y) = input.load()?;
            ProblemSource::Data {
                name: path.display().to_string(),
                x,
                y,
            }
        }
        None => ProblemSource::Synthetic {
            n: a.n,
            p: a.p,
            base_seed: a.seed,
        },
    };
    let protocol = BenchProtocol {
        ratios: a.ratios.clone(),
        cd_step_tol: a.cd_step_tol,
        repeats: a.repeats,
        variants: a.variants.clone(),
        max_sweeps: a.max_sweeps,
        refine_method: a.refine,
    };
    let jobs = a
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let report = bench::run_bench(&source, &protocol, jobs)?;
    write!(out, "{}", bench::render_table(&report))?;
    if let Some(path) = &a.out {
        bench::write_runs_csv_file(&report, path)?;
    }
    let failed = report.cells.iter().any(|c| c.failures > 0);
    Ok(if failed { EXIT_MAX_SWEEPS } else { EXIT_OK })
}

fn cmd_synth(a: &SynthArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let spec = io::SyntheticSpec {
        n: a.n,
        p: a.p,
        seed: a.seed,
    };
    let (x, y) = io::synth(&spec)?;
    io::write_matrix_csv(&a.out_x, &x)?;
    io::write_vector_csv(&a.out_y, &y)?;
    writeln!(
        out,
        "wrote {} x {} to {} and {}",
        a.n,
        a.p,
        a.out_x.display(),
        a.out_y.display()
    )?;
    Ok(EXIT_OK)
}

fn read_factors(path: &Path, scheme: Option<&str>) -> anyhow::Result<(ProductScheme, Vec<f64>)> {
    let trace = io::read_trace(path, TraceFormat::from_path(path))
        .with_context(|| format!("reading refinement factors from {}", path.display()))?;
    let scheme = match (scheme, trace.meta) {
        (Some("cd"), _) => ProductScheme::Cd,
        (Some("srrc"), _) => ProductScheme::Srrc,
        (Some(_), _) => ProductScheme::Srrt,
        (None, Some(m)) => match m.variant {
            Variant::Cd => ProductScheme::Cd,
            Variant::Srrc => ProductScheme::Srrc,
            Variant::Srrt => ProductScheme::Srrt,
        },
        (None, None) => bail!("trace has no metadata line; pass --scheme"),
    };
    Ok((scheme, trace.refinement_factors()))
}

fn cmd_eigen(a: &EigenArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let (x, _) = a.input.load()?;
    let factors = a
        .alphas_from
        .as_deref()
        .map(|p| read_factors(p, a.scheme.as_deref()))
        .transpose()?;
    let report = spectral::eigen_report(
        &x,
        factors.as_ref().map(|(s, f)| (*s, f.as_slice())),
        a.max_dim,
    )?;
    serde_json::to_writer_pretty(&mut *out, &report)?;
    writeln!(out)?;
    if report.within_bound {
        Ok(EXIT_OK)
    } else {
        writeln!(
            err,
            "spectral bound violated: max |delta| = {} > 1 + {}",
            report.max_magnitude,
            spectral::SPECTRAL_BOUND_TOL
        )?;
        Ok(EXIT_SPECTRAL_BOUND)
    }
}
