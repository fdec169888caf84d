mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use homewalk_core::lattice::GridPoint;

#[derive(Parser)]
#[command(name = "homewalk", version, about = "Guided random walk homing workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Run the sweep strategy and record hitting times.
    Simulate(SimulateArgs),
    /// Return-count bounds and impossibility thresholds.
    Bounds(BoundsArgs),
    /// Best box scale and the largest feasible design probability.
    Optimize(OptimizeArgs),
    /// Largest single-cell probability of the exact distribution.
    Anticoncentration(AntiArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Args, Clone, Debug)]
pub struct Output {
    /// Directory for the output files and manifest.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct SimulateArgs {
    /// Error probability of the walk.
    #[arg(long)]
    pub p: f64,
    /// Home cell as X,Y.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub home: GridPoint,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_steps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Start of the first sweep phase.
    #[arg(long, default_value_t = 256)]
    pub t0: u64,
    /// Box scale of the strategy.
    #[arg(long, default_value_t = 4.566)]
    pub a: f64,
    /// Target tail exponent.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Design error probability of the strategy.
    #[arg(long, default_value_t = 0.01139)]
    pub p0: f64,
    /// Comma-separated survival checkpoints; log-spaced by default.
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Vec<u64>,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
    /// Worker threads; never changes the output.
    #[arg(long)]
    #[serde(skip)]
    pub threads: Option<usize>,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct BoundsArgs {
    /// Even horizon; the first horizon of a sweep when --tau-max is given.
    #[arg(long)]
    pub tau: Option<u32>,
    /// Sweep the threshold over even horizons up to this one.
    #[arg(long, conflicts_with = "p")]
    pub tau_max: Option<u32>,
    /// Evaluate the return-count bound at this p instead of solving for
    /// the threshold.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct OptimizeArgs {
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InstructionKind {
    Straight,
    Zigzag,
    Sweep,
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct AntiArgs {
    #[arg(long)]
    pub p: f64,
    /// Comma-separated step counts.
    #[arg(long, value_delimiter = ',', required = true)]
    pub t: Vec<u64>,
    #[arg(long, value_enum, default_value = "straight")]
    pub instructions: InstructionKind,
    #[command(flatten)]
    #[serde(skip)]
    pub output: Output,
}

#[derive(Args, Clone, Debug)]
pub struct ReplayArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
    #[command(flatten)]
    pub output: Output,
    #[arg(long)]
    pub threads: Option<usize>,
}

fn parse_point(s: &str) -> Result<GridPoint, String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected X,Y, got {s:?}"))?;
    let coord = |v: &str| {
        v.trim()
            .parse::<i64>()
            .map_err(|e| format!("bad coordinate {v:?}: {e}"))
    };
    Ok(GridPoint::new(coord(x)?, coord(y)?))
}

/// Why a command failed; decides the exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or inputs, exit 2.
    Usage(String),
    /// Resource or runtime errors, exit 1.
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
