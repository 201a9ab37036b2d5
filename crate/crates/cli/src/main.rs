//! Command-line front end: stream generation, online detection, KL
//! estimation, false-alarm/delay estimation, threshold calibration, and
//! config-driven tradeoff curves.

mod commands;
mod config;
mod csvio;
mod error;
mod manifest;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub use error::CliError;

use commands::{CalibrateArgs, CurveArgs, DetectArgs, GenArgs, KlArgs, MtfaArgs, WaddArgs};

#[derive(Parser)]
#[command(
    name = "wdcusum",
    version,
    about = "Quickest detection of a growing dynamic anomaly in a sensor network",
    after_help = "Exit codes: 0 success/alarm, 2 usage, 3 configuration, 4 calibration \
                  failure, 5 censoring budget exceeded, 6 I/O, 7 detect ended without alarm."
)]
struct Cli {
    /// Worker threads for Monte Carlo runs (0 = all cores). Results do
    /// not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled observation stream as CSV.
    Gen(GenArgs),
    /// Run the detector over a stream CSV and emit the statistic trace.
    Detect(DetectArgs),
    /// Estimate per-phase KL numbers by Monte Carlo.
    Kl(KlArgs),
    /// Estimate mean time to false alarm.
    Mtfa(MtfaArgs),
    /// Estimate worst-path detection delay (change active from k = 1).
    Wadd(WaddArgs),
    /// Bisect the threshold to hit a target mean time to false alarm.
    Calibrate(CalibrateArgs),
    /// Sweep a gamma grid from a config file and emit tradeoff rows.
    Curve(CurveArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.workers > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global();
    }
    let result = match cli.command {
        Command::Gen(args) => commands::gen(args),
        Command::Detect(args) => commands::detect(args),
        Command::Kl(args) => commands::kl(args),
        Command::Mtfa(args) => commands::mtfa(args),
        Command::Wadd(args) => commands::wadd(args),
        Command::Calibrate(args) => commands::calibrate(args),
        Command::Curve(args) => commands::curve(args),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
