//! Command-line front end: baseline and optimized schedules, weight dumps, and
//! simulator comparisons.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod schedule_file;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use schedule_file::{ScheduleFile, ScheduleParams};

/// Failure classes; each maps to a process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Invalid flags or inputs (exit 2).
    Usage(String),
    /// The computation itself failed (exit 1).
    Numeric(String),
}

impl CliError {
    pub fn usage(e: impl fmt::Display) -> Self {
        CliError::Usage(e.to_string())
    }

    pub fn numeric(e: impl fmt::Display) -> Self {
        CliError::Numeric(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Parser)]
#[command(
    name = "stepopt",
    version,
    about = "Optimized time steps for diffusion ODE samplers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a baseline grid (uniform-t, uniform-lambda or EDM) with its objective.
    Baseline(BaselineArgs),
    /// Optimize the interior steps and write the resulting schedule.
    Optimize(OptimizeArgs),
    /// Compare schedule files on an analytic Gaussian-mixture model.
    Simulate(SimulateArgs),
    /// Print the integration weights of a schedule file.
    DumpWeights(DumpWeightsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    UniformT,
    UniformLambda,
    Edm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    UniformT,
    UniformLambda,
    Edm,
    #[value(name = "best-of-3")]
    BestOf3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Lagrange,
    Taylor,
}

/// Flags shared by `baseline` and `optimize`.
#[derive(Debug, Clone, Args)]
pub struct SpecArgs {
    /// Noise schedule: vp-linear, vp-cosine or ve-edm.
    #[arg(long, default_value = "vp-linear")]
    pub schedule: String,
    /// Number of steps.
    #[arg(long = "N", value_name = "N")]
    pub steps: usize,
    /// Start time (defaults: 1 for vp-linear, 0.992 for vp-cosine, 80 for ve-edm).
    #[arg(long = "T", value_name = "T")]
    pub t_start: Option<f64>,
    /// End time (defaults: 1e-3 for VP schedules, 0.002 for ve-edm).
    #[arg(long)]
    pub eps: Option<f64>,
    /// Order: a single k (warm-up min(n, k)) or a comma list k_1,…,k_N.
    #[arg(long, default_value = "3")]
    pub order: String,
    /// Exponent p in the error proxy σ^p/α.
    #[arg(long, default_value_t = 1)]
    pub p: u32,
    #[arg(long, value_enum, default_value = "lagrange")]
    pub kind: KindArg,
    /// EDM exponent ρ.
    #[arg(long, default_value_t = 7)]
    pub rho: u32,
    #[arg(long)]
    pub beta_min: Option<f64>,
    #[arg(long)]
    pub beta_max: Option<f64>,
    /// Cosine-schedule shift s.
    #[arg(long)]
    pub cosine_s: Option<f64>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the weight table of the resulting grid to this file.
    #[arg(long)]
    pub dump_weights: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BaselineArgs {
    #[arg(long, value_enum)]
    pub scheme: SchemeArg,
    #[command(flatten)]
    pub spec: SpecArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    /// Initialization; defaults to uniform-lambda for p = 1 and uniform-t otherwise.
    #[arg(long, value_enum)]
    pub init: Option<InitArg>,
    /// Minimum gap between consecutive λ values.
    #[arg(long)]
    pub margin: Option<f64>,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub grad_tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub step_tol: f64,
    #[command(flatten)]
    pub spec: SpecArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Model JSON file; the built-in two-component 2-D mixture when omitted.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Schedule file to evaluate (repeatable).
    #[arg(long = "steps", required = true)]
    pub steps: Vec<PathBuf>,
    #[arg(long, default_value_t = 4096)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub rng_seed: u64,
    /// JSON report file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional CSV table: label,N,mean_l2,median_l2.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DumpWeightsArgs {
    /// Schedule file.
    #[arg(long = "steps")]
    pub steps: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Baseline(args) => commands::cmd_baseline(&args).map(|_| ()),
        Command::Optimize(args) => commands::cmd_optimize(&args).map(|_| ()),
        Command::Simulate(args) => commands::cmd_simulate(&args).map(|_| ()),
        Command::DumpWeights(args) => commands::cmd_dump_weights(&args),
    }
}
