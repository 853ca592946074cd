//! `wgqed`: run scattering, sweep, decay and convergence experiments and
//! evaluate the bare/physical parameter map.
//!
//! Exit codes: 0 ok, 1 input error, 2 invalid renormalization region,
//! 3 numerical abort.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wgqed_core::experiments::{self, Error};

#[derive(Debug, Parser)]
#[command(
    name = "wgqed",
    version,
    about = "Single-photon waveguide QED experiments with cutoff renormalization"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Directory for CSV/JSON artifacts.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for sweeps and convergence studies.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Keep every m-th trajectory point.
    #[arg(long, global = true, value_name = "M", default_value_t = 1)]
    pub record_every: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bare -> physical parameters, or physical -> bare with --omega-a.
    Renorm(RenormArgs),
    /// One scattering run: trajectory.csv, final_state.csv, summary.json.
    Scatter,
    /// Parameter sweep: sweep.csv (one per window), summary.json.
    Sweep,
    /// Atomic decay fit: summary.json.
    Decay,
    /// Step-count convergence study: convergence.csv, summary.json.
    Converge,
    /// Grid size and Hilbert-space dimension of the model block.
    GridInfo {
        #[arg(long, default_value_t = 1)]
        n_excitations: u32,
    },
}

#[derive(Debug, Clone, Args)]
pub struct RenormArgs {
    #[arg(long)]
    pub omega0: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_ir: Option<f64>,
    #[arg(long)]
    pub lambda_uv: Option<f64>,
    #[arg(long, conflicts_with_all = ["omega0", "gamma", "lambda_ir", "lambda_uv"])]
    pub omega_a: Option<f64>,
    #[arg(long, requires = "omega_a")]
    pub gamma_phys: Option<f64>,
    #[arg(long, requires = "omega_a")]
    pub half_width: Option<f64>,
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    InvalidRegion(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::InvalidRegion(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::InvalidRegion(m) => write!(f, "{m}"),
            CliError::Numerical(m) => write!(f, "numerical abort: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidRegion { .. } => CliError::InvalidRegion(e.to_string()),
            Error::NonFinite { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.global.threads {
        experiments::configure_threads(n)?;
    }
    if cli.global.record_every == 0 {
        return Err(CliError::Input("--record-every must be >= 1".into()));
    }
    match &cli.command {
        Command::Renorm(args) => commands::renorm(&cli.global, args),
        Command::Scatter => commands::scatter(&cli.global),
        Command::Sweep => commands::sweep(&cli.global),
        Command::Decay => commands::decay(&cli.global),
        Command::Converge => commands::converge(&cli.global),
        Command::GridInfo { n_excitations } => commands::grid_info(&cli.global, *n_excitations),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wgqed: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
