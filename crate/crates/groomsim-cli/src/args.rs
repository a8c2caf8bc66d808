//! Command-line surface. Defaults follow the standard protocol values:
//! 100 groomers, 200 generations, 300 grooming actions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "groomsim",
    version,
    about = "Simulates the evolution of social grooming strategies (s, q) and analyzes the outcomes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a single simulation and write result.json + records.jsonl
    Run(RunArgs),
    /// Run a parameter sweep from a spec file (resumable, parallel)
    Sweep(SweepArgs),
    /// Estimate the selection-gradient field on an (s, q) lattice
    Agos(AgosArgs),
    /// Integrate a typical (s, q) orbit driven by the gradient estimator
    Orbit(OrbitArgs),
    /// Derive analysis CSVs from existing result files
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Cooperation capacity per groomee (R_c)
    #[arg(long)]
    pub rc: Option<u32>,
    /// Number of groomees / group size (M)
    #[arg(long)]
    pub m: Option<u32>,
    /// Grooming actions per groomer per generation (R_g)
    #[arg(long, default_value_t = 300)]
    pub rg: u32,
    /// Number of generations (T)
    #[arg(long, default_value_t = 200)]
    pub t: u32,
    /// Number of groomers (N)
    #[arg(long, default_value_t = 100)]
    pub n: u32,
    /// Simulation seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file mirroring the flag names
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Capture the final generation's grooming event log in result.json
    #[arg(long)]
    pub capture_event_log: bool,
    /// Suppress wall-clock metadata so reruns are byte-identical
    #[arg(long)]
    pub reproducible: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep specification JSON file (field names of the spec schema)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the spec's base seed
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory (checkpointed; rerun to resume)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads
    #[arg(long, default_value_t = default_parallelism())]
    pub parallelism: usize,
    /// Suppress wall-clock metadata so reruns are byte-identical
    #[arg(long)]
    pub reproducible: bool,
}

#[derive(Debug, Args)]
pub struct AgosArgs {
    /// Cooperation capacity per groomee (R_c)
    #[arg(long)]
    pub rc: Option<u32>,
    /// Number of groomees / group size (M)
    #[arg(long)]
    pub m: Option<u32>,
    /// Grooming actions per groomer per generation (R_g)
    #[arg(long, default_value_t = 300)]
    pub rg: u32,
    /// Number of groomers (N)
    #[arg(long, default_value_t = 100)]
    pub n: u32,
    /// Replicates per lattice cell
    #[arg(long, default_value_t = 30)]
    pub replicates: u32,
    /// Population sampling sigma around each lattice point
    #[arg(long, default_value_t = 0.2)]
    pub sample_sigma: f64,
    #[arg(long, default_value_t = -4.0, allow_negative_numbers = true)]
    pub s_min: f64,
    #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
    pub s_max: f64,
    #[arg(long, default_value_t = 0.5)]
    pub s_step: f64,
    #[arg(long, default_value_t = 0.0)]
    pub q_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub q_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub q_step: f64,
    /// Base seed for the per-cell streams
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file mirroring the flag names
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Suppress wall-clock metadata so reruns are byte-identical
    #[arg(long)]
    pub reproducible: bool,
}

#[derive(Debug, Args)]
pub struct OrbitArgs {
    /// Cooperation capacity per groomee (R_c)
    #[arg(long)]
    pub rc: Option<u32>,
    /// Number of groomees / group size (M)
    #[arg(long)]
    pub m: Option<u32>,
    /// Grooming actions per groomer per generation (R_g)
    #[arg(long, default_value_t = 300)]
    pub rg: u32,
    /// Number of groomers (N)
    #[arg(long, default_value_t = 100)]
    pub n: u32,
    /// Orbit start point, s component
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub s0: f64,
    /// Orbit start point, q component
    #[arg(long, default_value_t = 0.5)]
    pub q0: f64,
    /// Number of integration steps
    #[arg(long, default_value_t = 200)]
    pub steps: u32,
    /// Per-component Gaussian noise added each step
    #[arg(long, default_value_t = 0.01)]
    pub noise_sigma: f64,
    /// Gradient replicates per step
    #[arg(long, default_value_t = 30)]
    pub replicates: u32,
    /// Population sampling sigma for the gradient estimator
    #[arg(long, default_value_t = 0.2)]
    pub sample_sigma: f64,
    /// Seed of the orbit stream
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file mirroring the flag names
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Suppress wall-clock metadata so reruns are byte-identical
    #[arg(long)]
    pub reproducible: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// A result.json from `run` (strength distribution + profile)
    #[arg(long)]
    pub result: Option<PathBuf>,
    /// A sweep.csv from `sweep` (trend frequencies + transition curves)
    #[arg(long)]
    pub sweep_csv: Option<PathBuf>,
    /// Recorded in output metadata only
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON config file mirroring the flag names
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Suppress wall-clock metadata so reruns are byte-identical
    #[arg(long)]
    pub reproducible: bool,
}

pub fn default_parallelism() -> usize {
    std::thread::available_parallelism().map(std::num::NonZero::get).unwrap_or(1)
}
