//! `bosonq`: joint detection statistics of polarized single photons in a
//! linear interferometer, driven by a JSON run configuration.
//!
//! Subcommands select the run mode; everything else lives in the config
//! file. `--seed` and `--out` override the corresponding config fields,
//! `--quiet` suppresses the stdout report. Exit codes: 0 success, 2 config
//! error, 3 guard violation, 4 numerical failure.

mod config;
mod error;
mod report;
mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::Mode;
use crate::run::Invocation;

#[derive(Parser)]
#[command(
    name = "bosonq",
    version,
    about = "Joint detection statistics of polarized photons in linear interferometers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Instantaneous N-fold detection rate at explicit detection times.
    Rate(CommonArgs),
    /// Detection probability integrated over per-detector time windows.
    Probability(CommonArgs),
    /// Enumerate joint outcomes on a time grid and draw seeded samples.
    Sample(CommonArgs),
    /// Coincidence probability versus relative emission delay, as CSV.
    SweepDelay(CommonArgs),
    /// Permanent of an explicit complex matrix.
    Permanent(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override the sampling seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Base path for output files (<base>.json plus mode-specific siblings).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress the stdout report.
    #[arg(long)]
    quiet: bool,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (mode, args) = match &cli.command {
        Command::Rate(args) => (Mode::Rate, args),
        Command::Probability(args) => (Mode::Probability, args),
        Command::Sample(args) => (Mode::Sample, args),
        Command::SweepDelay(args) => (Mode::SweepDelay, args),
        Command::Permanent(args) => (Mode::Permanent, args),
    };
    let invocation = Invocation {
        config: args.config.clone(),
        seed: args.seed,
        out: args.out.clone(),
        quiet: args.quiet,
    };
    if let Err(err) = run::dispatch(mode, &invocation) {
        eprintln!("{err}");
        std::process::exit(err.exit_code());
    }
}
