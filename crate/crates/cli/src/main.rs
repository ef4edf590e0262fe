//! `eitest`: run the event information test on CSV data, generate synthetic
//! pairs, run benchmark sweeps, and calibrate the two-sample tests.
//!
//! Exit codes: 0 when the command completed (the statistical decision is in
//! the report), 2 for usage or input errors, 1 for internal failures.

mod commands;
mod error;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{bench, calibrate, simulate, test};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "eitest",
    version,
    about = "Event information test for time series and event series"
)]
struct Cli {
    /// Worker threads for parallel work (defaults to all cores).
    #[arg(long, global = true, env = "EITEST_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test a time series and an event series for shared information.
    Test(test::TestArgs),
    /// Generate a synthetic series/event pair from an impact model.
    Simulate(simulate::SimulateArgs),
    /// Run benchmark sweeps and write rate tables.
    Bench(bench::BenchArgs),
    /// Measure the rejection rate of a two-sample test under the null.
    Calibrate(calibrate::CalibrateArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Internal(format!("cannot start thread pool: {e}")))?;
    }
    match cli.command {
        Command::Test(args) => test::run(&args),
        Command::Simulate(args) => simulate::run(&args),
        Command::Bench(args) => bench::run(&args),
        Command::Calibrate(args) => calibrate::run(&args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
