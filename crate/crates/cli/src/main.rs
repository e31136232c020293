//! `levy-dividend` command-line tool.
//!
//! Exit codes: 0 success, 1 i/o failure, 2 configuration error, 3 violated
//! mathematical precondition, 4 failed verification.

mod commands;
mod error;
mod manifest;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "levy-dividend", version, about = "Optimal dividend barriers for mixed-exponential Lévy risk models")]
pub struct Cli {
    /// JSON model configuration.
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    /// Discount rate.
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Output file; stdout when absent. A manifest is written to `<out>.manifest.json`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Simulation seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute rho, the tilted ruin law, h and the optimal barrier.
    Solve,
    /// Check the verification conditions for a barrier value function.
    VerifyHjb(VerifyArgs),
    /// Tabulate barrier value functions over a grid of barriers.
    BarrierSweep(SweepArgs),
    /// Ruin probability on a grid of initial capitals.
    Ruin(RuinArgs),
    /// Monte Carlo estimates of dividends or ruin.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    /// Barrier level; defaults to the optimal barrier.
    #[arg(long)]
    pub barrier: Option<f64>,
    /// Right end of the grid; defaults to 3 max(b, 1).
    #[arg(long)]
    pub grid_max: Option<f64>,
    #[arg(long, default_value_t = 300)]
    pub grid_points: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    /// Explicit barrier levels; overrides the range flags.
    #[arg(long, value_delimiter = ',')]
    pub b: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0)]
    pub b_min: f64,
    /// Defaults to 3 b*.
    #[arg(long)]
    pub b_max: Option<f64>,
    #[arg(long, default_value_t = 121)]
    pub b_points: usize,
    /// Initial capitals at which `V_b` is tabulated.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2,5")]
    pub x: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct RuinArgs {
    /// Explicit initial capitals; overrides the range flags.
    #[arg(long, value_delimiter = ',')]
    pub x: Option<Vec<f64>>,
    #[arg(long, default_value_t = 10.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OnOff {
    On,
    Off,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub x0: f64,
    /// Dividend barrier. With `--delta`, estimates discounted dividends;
    /// with `--q`, the ruin transform of the reflected process.
    #[arg(long)]
    pub barrier: Option<f64>,
    /// Ruin-time discount for transform estimates.
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long)]
    pub tmax: Option<f64>,
    #[arg(long, value_enum, default_value_t = OnOff::On)]
    pub bridge: OnOff,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Solve => commands::solve(cli),
        Command::VerifyHjb(a) => commands::verify(cli, a),
        Command::BarrierSweep(a) => commands::sweep(cli, a),
        Command::Ruin(a) => commands::ruin(cli, a),
        Command::Simulate(a) => commands::simulate(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
