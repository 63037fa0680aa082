use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod grid;
mod output;
mod validate;

use config::{parse_value, Config};
use output::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Validation(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<clusterq_core::Error> for CliError {
    fn from(e: clusterq_core::Error) -> Self {
        use clusterq_core::Error as E;
        match e {
            E::InvalidParameter(_)
            | E::OddSeparation(_)
            | E::WindowTooSmall { .. }
            | E::SizeGuard { .. }
            | E::InsufficientPoints { .. } => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "clusterq", version, about = "Correlations of the cluster-like chain in a transverse field")]
struct Cli {
    /// Absolute accuracy of each G_r integral [default: 1e-10]
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output file [default: stdout]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format [default: csv]
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Worker threads [default: physical cores]
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Flat key = value file; command-line flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Correlators and correlation measures over a (B, R) grid
    Sweep(commands::SweepArgs),
    /// Exponential or power-law fits of a measure against R
    Fit(commands::FitArgs),
    /// Field where next-nearest-neighbour entanglement appears
    Birth(commands::BirthArgs),
    /// Exact-diagonalization cross-checks of the analytic pipeline
    Validate(validate::ValidateArgs),
    /// Low-lying levels, degeneracy and edge splitting of finite chains
    Spectrum(commands::SpectrumArgs),
    /// String order correlator against string length
    Sop(commands::SopArgs),
}

/// Settings shared by every command after merging flags and config.
#[derive(Debug, Clone)]
pub struct Context {
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub config: Config,
}

pub const DEFAULT_TOL: f64 = clusterq_core::gfunction::DEFAULT_TOL;

fn build_context(cli: &Cli) -> Result<Context, CliError> {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let tol = config.resolve(cli.tol, "tol", parse_value::<f64>)?.unwrap_or(DEFAULT_TOL);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::Usage(format!("tolerance must be positive, got {tol}")));
    }
    let out = config.resolve(cli.out.clone(), "out", |s| Ok(PathBuf::from(s)))?;
    let format = config.resolve(cli.format, "format", |s| s.parse())?.unwrap_or(Format::Csv);
    let jobs = config
        .resolve(cli.jobs, "jobs", parse_value::<usize>)?
        .unwrap_or_else(num_cpus::get_physical);
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    Ok(Context {
        tol,
        out,
        format,
        config,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = build_context(&cli)?;
    match cli.command {
        Command::Sweep(a) => commands::sweep(&ctx, a),
        Command::Fit(a) => commands::fit(&ctx, a),
        Command::Birth(a) => commands::birth(&ctx, a),
        Command::Validate(a) => validate::run(&ctx, a),
        Command::Spectrum(a) => commands::spectrum(&ctx, a),
        Command::Sop(a) => commands::sop(&ctx, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("clusterq: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
