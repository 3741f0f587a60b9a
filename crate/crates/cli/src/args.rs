use std::path::PathBuf;

use abcd_core::io::OutputFormat;
use clap::{Args, Parser, Subcommand};

use crate::commands::{BranchArg, ExecMode, Mode};
use crate::config::FastCase;

/// Solitary waves of the abcd Boussinesq system: solves, branch traces,
/// front scans and the verification suite.
///
/// Every value may also come from a `key = value` file given with `--config`;
/// flags win over the file.
#[derive(Debug, Parser)]
#[command(name = "abcd", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default `out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Comma-separated output formats: csv, json, gnuplot-dat (default csv,json).
    #[arg(long, global = true, value_delimiter = ',')]
    pub format: Option<Vec<OutputFormat>>,
    /// sequential or parallel (default parallel when built with it).
    #[arg(long, global = true)]
    pub exec: Option<ExecMode>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form stationary wave with residual and identity diagnostics.
    Stationary(StationaryArgs),
    /// Classical Boussinesq base wave of the fast family.
    FastBase(FastBaseArgs),
    /// Trace the slow branch in the speed from the stationary wave.
    ContinueSlow(ContinueSlowArgs),
    /// Trace the fast branch in s at fixed speed.
    ContinueFast(ContinueFastArgs),
    /// Several independent branches, one output directory per job.
    Sweep(SweepArgs),
    /// Monotone-front nonexistence scans.
    Fronts(FrontsArgs),
    /// Run the full invariant suite; exit 4 unless every check passes.
    Verify,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Half length L of the computational domain [0, L].
    #[arg(long, visible_alias = "L")]
    pub half_length: Option<f64>,
    /// Number of grid nodes.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct StepArgs {
    #[arg(long)]
    pub initial_step: Option<f64>,
    #[arg(long)]
    pub max_step: Option<f64>,
    #[arg(long)]
    pub max_points: Option<usize>,
    /// Far-field amplitude that triggers a domain extension.
    #[arg(long)]
    pub tail_tol: Option<f64>,
    #[arg(long)]
    pub max_retruncations: Option<usize>,
    /// Ellipticity gap below which the branch ends (default 1e-3).
    #[arg(long)]
    pub gap_tol: Option<f64>,
    /// Stagnation gap below which a fast branch ends (default 1e-3).
    #[arg(long)]
    pub stag_tol: Option<f64>,
    /// Blowup threshold on N (default 1e6).
    #[arg(long)]
    pub n_max: Option<f64>,
    #[arg(long)]
    pub residual_tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
}

#[derive(Debug, Args)]
pub struct StationaryArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// plus or minus (default plus).
    #[arg(long)]
    pub branch: Option<BranchArg>,
    /// Also check the first integral; exit 4 if it exceeds 1e-7.
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct FastBaseArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct ContinueSlowArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub lambda_max: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub steps: StepArgs,
}

#[derive(Debug, Args)]
pub struct ContinueFastArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub k: Option<f64>,
    #[arg(long)]
    pub s_max: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub steps: StepArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// slow or fast.
    #[arg(long)]
    pub family: Option<Mode>,
    /// Slow sweep: comma-separated beta values.
    #[arg(long, value_delimiter = ',')]
    pub betas: Option<Vec<f64>>,
    /// Fast sweep: comma-separated lambda:k pairs.
    #[arg(long, value_delimiter = ',')]
    pub cases: Option<Vec<FastCase>>,
    #[arg(long)]
    pub lambda_max: Option<f64>,
    #[arg(long)]
    pub s_max: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub steps: StepArgs,
}

#[derive(Debug, Args)]
pub struct FrontsArgs {
    /// slow or fast.
    #[arg(long)]
    pub mode: Option<Mode>,
    /// Slow mode: beta of the family.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Slow mode: number of scan points on (0, 1/t^2).
    #[arg(long)]
    pub scan_n: Option<usize>,
    /// Fast mode: upper end of the sampled speeds (1, lambda_max].
    #[arg(long)]
    pub lambda_max: Option<f64>,
    /// Fast mode: number of sampled speeds.
    #[arg(long)]
    pub samples: Option<usize>,
}
