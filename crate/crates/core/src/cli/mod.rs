//! Command-line front end: config ingestion, dispatch and result files.

mod commands;
pub mod config;
pub mod output;

pub use commands::{cmd_bounds, cmd_crossover, cmd_sweep, invert_signal_gain};
pub use config::{emit_config, extract_embedded, parse_config, ConfigError, ProtocolSelection, RunConfig};
pub use output::{ResultDocument, BOUNDS_HEADER, CROSSOVER_HEADER, SWEEP_HEADER};

use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::path::PathBuf;

/// Exit statuses.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const IO: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("usage: {0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("numerical failure{}: {message}", .distance.map(|z| format!(" at z = {z} m")).unwrap_or_default())]
    Numerical { distance: Option<f64>, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => exit::CONFIG,
            CliError::Io { .. } => exit::IO,
            CliError::Numerical { .. } => exit::NUMERICAL,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "fso-qkd", version, about = "MIMO free-space-optical decoy-state QKD key-rate simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Key rate and QBER against distance.
    Sweep(CommonArgs),
    /// Two-way/one-way crossover distance for each antenna count.
    Crossover(CommonArgs),
    /// Decoy-state bounds from measured gains and error rates.
    Bounds(BoundsArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// Config document, or a result CSV with an embedded config.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output CSV; the summary goes beside it with extension .summary.json.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "N")]
    pub trials: Option<usize>,
    #[arg(long, value_enum)]
    pub protocol: Option<ProtocolSelection>,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Debug, Args, Clone)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Observations CSV with columns intensity,Q,E.
    #[arg(long, value_name = "PATH")]
    pub obs: PathBuf,
    /// Transmissivity for the two-photon yield; inferred from the signal gain when absent.
    #[arg(long, value_name = "T")]
    pub transmissivity: Option<f64>,
}

/// Parses arguments, runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::CONFIG } else { exit::OK };
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: &Command) -> Result<(), CliError> {
    let common = match command {
        Command::Sweep(c) | Command::Crossover(c) => c,
        Command::Bounds(b) => &b.common,
    };
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // Fails only if a pool already exists, e.g. when called twice in one process.
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("--threads ignored: {e}");
        }
    }
    match command {
        Command::Sweep(c) => cmd_sweep(c),
        Command::Crossover(c) => cmd_crossover(c),
        Command::Bounds(b) => cmd_bounds(b),
    }
}
