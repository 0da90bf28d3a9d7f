//! Command-line driver for nonbinary LDPC / SC-LDPC density-evolution
//! experiments.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{parse_degree_map, EnsembleSpec};
use output::OutFormat;

#[derive(Debug)]
pub enum CliError {
    /// Configuration or argument problems (exit code 1).
    Validation(String),
    /// One or more checks of the verification suite failed (exit code 2).
    LemmaFailure(Vec<String>),
    /// A DE run hit its iteration cap (exit code 3).
    NonConvergence(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::LemmaFailure(_) => 2,
            CliError::NonConvergence(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(msg) => write!(f, "validation error: {msg}"),
            CliError::LemmaFailure(names) => {
                write!(f, "lemma suite failure: {}", names.join(", "))
            }
            CliError::NonConvergence(msg) => write!(f, "non-convergence: {msg}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "nbde",
    about = "Density evolution for nonbinary LDPC and SC-LDPC ensembles on the BEC",
    version
)]
struct Cli {
    /// JSON experiment spec; flags below override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Field extension degree m (densities live on dimensions 0..=m).
    #[arg(long, global = true)]
    m: Option<usize>,

    /// Edge-perspective VN degrees, e.g. "3:1" or "2:0.5,4:0.5".
    #[arg(long, global = true)]
    lambda: Option<String>,

    /// Edge-perspective CN degrees, e.g. "6:1".
    #[arg(long, global = true)]
    rho: Option<String>,

    /// Single erasure probability (alternative to a grid in the config).
    #[arg(long, global = true)]
    epsilon: Option<f64>,

    /// Coupling length N.
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Coupling width w.
    #[arg(long, global = true)]
    w: Option<usize>,

    /// RNG seed recorded in output metadata.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for ε-grid sweeps (fallback: NBDE_JOBS, then all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output format for stdout.
    #[arg(long, global = true, value_enum, default_value = "json")]
    out: OutFormat,

    /// Directory for auxiliary CSV exports (wave profiles, CFPs).
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the exact-identity and lemma suite for the configured m.
    Verify {
        /// Samples per randomized check.
        #[arg(long, default_value_t = 2_000)]
        samples: usize,
        /// Corrupt the coefficient table first (negative control).
        #[arg(long, hide = true)]
        corrupt_table: bool,
    },
    /// Uncoupled BP threshold of the configured ensemble.
    Threshold,
    /// Energy-gap sweep and potential threshold.
    Potential,
    /// Coupled-chain analysis: threshold, wave profile, middle points.
    Coupled,
    /// Dump the exact coefficient tensors as CSV.
    DumpTables,
}

fn resolve_spec(cli: &Cli) -> Result<EnsembleSpec, CliError> {
    let mut spec = match &cli.config {
        Some(path) => EnsembleSpec::load(path)?,
        None => EnsembleSpec::default(),
    };
    if let Some(m) = cli.m {
        spec.m = m;
    }
    if let Some(text) = &cli.lambda {
        spec.lambda = parse_degree_map(text)?;
    }
    if let Some(text) = &cli.rho {
        spec.rho = parse_degree_map(text)?;
    }
    if let Some(eps) = cli.epsilon {
        spec.epsilon = Some(eps);
        spec.epsilon_grid = None;
    }
    if let Some(n) = cli.n {
        spec.n = Some(n);
    }
    if let Some(w) = cli.w {
        spec.w = Some(w);
    }
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    Ok(spec)
}

fn worker_pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let jobs = jobs
        .or_else(|| std::env::var("NBDE_JOBS").ok().and_then(|s| s.parse().ok()))
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        });
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Validation(format!("cannot build worker pool: {e}")))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let spec = resolve_spec(cli)?;
    let pool = worker_pool(cli.jobs)?;
    match &cli.command {
        Command::Verify {
            samples,
            corrupt_table,
        } => commands::verify::run(&spec, cli.out, *samples, *corrupt_table),
        Command::Threshold => commands::threshold::run(&spec, cli.out),
        Command::Potential => pool.install(|| commands::potential::run(&spec, cli.out)),
        Command::Coupled => commands::coupled::run(&spec, cli.out, cli.output_dir.as_deref()),
        Command::DumpTables => commands::dump_tables::run(&spec, cli.out),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
