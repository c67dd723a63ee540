//! Command-line harness for the saddle-point solver: run configured solves,
//! emit the step-size bound comparison, and sweep step sizes against the
//! positive-definiteness certificate.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use commands::{cmd_bounds, cmd_solve, cmd_sweep, EXIT_CONFIG_ERROR};

#[derive(Parser)]
#[command(
    name = "proxsaddle",
    about = "Predictor-corrector proximal splitting with block-metric step-size certification",
    version
)]
struct Cli {
    /// Write CSV output here instead of the default destination.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    /// Suppress the human-readable summary.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configured solve and write its iteration trace as CSV.
    ///
    /// Exit status: 0 converged, 1 config error, 2 iteration limit,
    /// 3 diverged.
    Solve {
        /// TOML run configuration.
        config: PathBuf,
    },
    /// Print the classic and metric step-size bounds over a grid of
    /// operator norms as CSV (norm_a,bound_ct,bound_new).
    Bounds {
        /// First operator norm (>= 0).
        start: f64,
        /// Last operator norm (inclusive).
        stop: f64,
        /// Grid spacing (> 0).
        step: f64,
    },
    /// Run the configured problem across a grid of equal step sizes and
    /// summarize certification and outcome per step as CSV.
    Sweep {
        /// TOML run configuration (its lambda entry is ignored).
        config: PathBuf,
        /// Step sizes, space- or comma-separated.
        #[arg(value_name = "LAMBDA", num_args = 0..)]
        lambdas: Vec<String>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_CONFIG_ERROR,
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };

    let result = match &cli.command {
        Command::Solve { config } => cmd_solve(config, cli.output.as_deref(), cli.quiet),
        Command::Bounds { start, stop, step } => {
            cmd_bounds(*start, *stop, *step, cli.output.as_deref())
        }
        Command::Sweep { config, lambdas } => {
            cmd_sweep(config, lambdas, cli.output.as_deref(), cli.quiet)
        }
    };

    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_CONFIG_ERROR as u8)
        }
    }
}
