//! `wavepar` — batch front end for the parametric wave-propagation library.
//!
//! Exit codes: 0 success, 2 config error, 3 numeric failure, 4 domain error
//! (no bounded orbit), 5 verification failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{load_config, CliError};

#[derive(Debug, Parser)]
#[command(
    name = "wavepar",
    about = "Parametric (phase-parameter) analysis of 1D wave propagation in periodic media",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker-thread bound for internal partitioning. Current computations
    /// are sequential with a fixed summation order, so results never depend
    /// on this value.
    #[arg(long)]
    threads: Option<usize>,
    /// Override the verification tolerances (verify subcommand).
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stop-band metrics, standing-wave curve, and reconstructed q(x).
    Stopband(RunArgs),
    /// Transmission-band parametric curve for a given C specification.
    Transmission(RunArgs),
    /// Integrable-family metrics: tau, complex increment, phase advance.
    Family(RunArgs),
    /// Run the parametric pipeline and the direct monodromy oracle,
    /// compare, and gate on the configured tolerances.
    Verify(RunArgs),
    /// Search Fourier coefficients maximizing stop-band attenuation.
    Design(RunArgs),
}

fn validate_threads(args: &RunArgs) -> Result<(), CliError> {
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::config("--threads must be >= 1"));
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Stopband(args) => {
            validate_threads(args)?;
            let cfg = load_config(&args.config)?;
            commands::cmd_stopband(&cfg, &args.out)
        }
        Command::Transmission(args) => {
            validate_threads(args)?;
            let cfg = load_config(&args.config)?;
            commands::cmd_transmission(&cfg, &args.out)
        }
        Command::Family(args) => {
            validate_threads(args)?;
            let cfg = load_config(&args.config)?;
            commands::cmd_family(&cfg, &args.out)
        }
        Command::Verify(args) => {
            validate_threads(args)?;
            let cfg = load_config(&args.config)?;
            commands::cmd_verify(&cfg, &args.out, args.tol)
        }
        Command::Design(args) => {
            validate_threads(args)?;
            let cfg = load_config(&args.config)?;
            commands::cmd_design(&cfg, &args.out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("wavepar: {}", err.message);
            ExitCode::from(err.code as u8)
        }
    }
}
