//! `gfisher`: Fisher-information reports, parameter sweeps, and oracle
//! verification runs for the entangled multi-phase sensor.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical or oracle
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod config;
mod run;

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    /// Invalid configuration; exits with code 2.
    Config(String),
    /// Numerical or oracle failure; exits with code 3.
    Run(String),
    /// I/O failure; exits with code 1.
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Run(msg) => write!(f, "numerical failure: {msg}"),
            CliError::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Run(_) => ExitCode::from(3),
            CliError::Io(_) => ExitCode::from(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(
    name = "gfisher",
    about = "Quantum and classical Fisher information for a parameter probed through an array of optical phases",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-point Fisher report (QFI, CFI modes, intermediates).
    Report(CommonArgs),
    /// Parameter sweep over M, tau, eta, N, or phiH.
    Sweep(CommonArgs),
    /// Truncated Fock-space SLD oracle vs the closed-form QFI (M = 1).
    Oracle(CommonArgs),
    /// Monte-Carlo homodyne estimation vs the closed-form CFI.
    Montecarlo(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON configuration file; flat keys, all optional.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format; defaults to csv for sweeps and json otherwise.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Random seed for Monte-Carlo runs.
    #[arg(long)]
    seed: Option<u64>,
    /// Override any config key, e.g. --set tau=0.8 --set model=rf.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Report(a) | Command::Sweep(a) | Command::Oracle(a) | Command::Montecarlo(a) => a,
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let args = cli.command.args();
    let cfg = RunConfig::load(args.config.as_deref(), &args.set)?;

    let format = args.format.unwrap_or(match cfg.format.as_deref() {
        Some("csv") => OutputFormat::Csv,
        Some("json") => OutputFormat::Json,
        _ => match cli.command {
            Command::Sweep(_) => OutputFormat::Csv,
            _ => OutputFormat::Json,
        },
    });
    let seed = args.seed.unwrap_or(cfg.seed);

    let output = match cli.command {
        Command::Report(_) => run::run_report(&cfg, format)?,
        Command::Sweep(_) => run::run_sweep(&cfg, format)?,
        Command::Oracle(_) => run::run_oracle(&cfg, format)?,
        Command::Montecarlo(_) => run::run_montecarlo(&cfg, seed, format)?,
    };

    let destination = args.out.clone().or_else(|| cfg.out.clone().map(PathBuf::from));
    match destination {
        Some(path) => std::fs::write(&path, output)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{output}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
