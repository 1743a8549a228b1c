use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use srpat_core::sampler::SamplerKind;

#[derive(Debug, Parser)]
#[command(name = "srpat", version, about = "Self-reinforced preferential attachment trees: simulation and verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grow SRPAT replicas and record tracked vertices.
    Simulate(SimulateArgs),
    /// Grow classical PAT(delta) replicas for comparison.
    Pat(PatArgs),
    /// Deterministic beta series and fixed points.
    Beta(BetaArgs),
    /// Crossover times T(i).
    Crossover(CrossoverArgs),
    /// Exact mean degree against the Gamma upper bound.
    Bounds(BoundsArgs),
    /// Pathwise ODE comparison on dense-recorded windows.
    SaVerify(SaVerifyArgs),
    /// Growth-exponent fits from a trajectory file.
    Fit(FitArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Pat(_) => "pat",
            Command::Beta(_) => "beta",
            Command::Crossover(_) => "crossover",
            Command::Bounds(_) => "bounds",
            Command::SaVerify(_) => "sa-verify",
            Command::Fit(_) => "fit",
        }
    }
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads for replicas; SRPAT_JOBS overrides. 0 means all cores.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub t_max: u64,
    /// Comma-separated vertices to record.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub track: Vec<u32>,
    /// `geometric:<ratio>` or `list:<t1,t2,...>`.
    #[arg(long, default_value = "geometric:1.1")]
    pub snapshots: String,
    #[arg(long, default_value = "fast", value_parser = parse_sampler)]
    pub sampler: SamplerKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub replicas: u32,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct PatArgs {
    #[arg(long)]
    pub t_max: u64,
    /// Shift; must exceed -1.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta: f64,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub track: Vec<u32>,
    #[arg(long, default_value = "geometric:1.1")]
    pub snapshots: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub replicas: u32,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BetaArgs {
    /// Comma-separated start vertices.
    #[arg(long, value_delimiter = ',', required = true)]
    pub i: Vec<u64>,
    #[arg(long)]
    pub t_max: u64,
    /// Output times; every step when omitted.
    #[arg(long)]
    pub snapshots: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CrossoverArgs {
    /// All vertices `1..=i_max`, or the `--i-grid` points within it.
    #[arg(long, conflicts_with = "i")]
    pub i_max: Option<u64>,
    /// Explicit comma-separated vertices.
    #[arg(long, value_delimiter = ',')]
    pub i: Vec<u64>,
    /// `all`, `geometric:<ratio>` or `list:<i1,i2,...>` over `1..=i_max`.
    #[arg(long, default_value = "all")]
    pub i_grid: String,
    /// Iteration cap per vertex.
    #[arg(long, default_value_t = srpat_core::determin::DEFAULT_CROSSOVER_CAP)]
    pub cap: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub i: Vec<u64>,
    #[arg(long)]
    pub t_max: u64,
    /// Output times (default geometric grid from each i).
    #[arg(long, default_value = "geometric:1.1")]
    pub snapshots: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SaVerifyArgs {
    /// Window starts t; each window is [t, 2t].
    #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
    pub windows: Vec<u64>,
    /// Vertex whose path is recorded.
    #[arg(long, default_value_t = 1)]
    pub track: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub replicas: u32,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// trajectory.csv from `simulate` or `pat`.
    #[arg(long)]
    pub input: PathBuf,
    /// Fit window `t_lo,t_hi`; whole record when omitted.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub window: Vec<u64>,
    /// Smallest degree used by the tail regression on histogram.csv.
    #[arg(long, default_value_t = 10)]
    pub tail_min: u32,
    #[command(flatten)]
    pub common: Common,
}

fn parse_sampler(s: &str) -> Result<SamplerKind, String> {
    s.parse::<SamplerKind>().map_err(|e| e.to_string())
}
