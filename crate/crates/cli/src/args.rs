use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use goalpinn_core::adaptive::Sampling;
use goalpinn_core::problem::LossKind;

#[derive(Debug, Parser)]
#[command(name = "goalpinn", version, about = "Goal-oriented adaptive sampling for PINN and Deep Ritz Poisson solvers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one case and write trace.csv, manifest.json and checkpoints.
    Run(RunArgs),
    /// Uniform baseline against adaptive sampling over several seeds.
    Compare(CompareArgs),
    /// Finite-difference check of network jets and parameter gradients.
    Gradcheck(GradcheckArgs),
    /// Render convergence plots from trace files.
    Plot(PlotArgs),
    /// Re-run a manifest and compare the trace with the recorded one.
    Replay(ReplayArgs),
    /// Print the built-in case table as JSON.
    Cases,
}

fn parse_kebab<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn parse_mode(s: &str) -> Result<LossKind, String> {
    parse_kebab(s).map_err(|_| format!("unknown mode '{s}' (expected pinn or deep-ritz)"))
}

fn parse_sampling(s: &str) -> Result<Sampling, String> {
    parse_kebab(s).map_err(|_| format!("unknown sampling '{s}' (expected uniform, dwr-resample or dwr-refine)"))
}

/// Training overrides shared by `run` and `compare`. Precedence is case
/// defaults, then the `--config` file, then these flags.
#[derive(Debug, Clone, Default, Args)]
pub struct TrainFlags {
    #[arg(long)]
    pub case: u32,
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<LossKind>,
    #[arg(long, value_parser = parse_sampling)]
    pub sampling: Option<Sampling>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Repeatable; replaces the case's resample schedule.
    #[arg(long = "resample-epoch")]
    pub resample_epochs: Vec<usize>,
    #[arg(long)]
    pub refine_interval: Option<usize>,
    #[arg(long)]
    pub refine_count: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub n_interior: Option<usize>,
    #[arg(long)]
    pub m_boundary: Option<usize>,
    #[arg(long)]
    pub pool_factor: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub weighted_quadrature: bool,
    #[arg(long)]
    pub adjoint_epochs: Option<usize>,
    #[arg(long)]
    pub z_prime_epochs: Option<usize>,
    #[arg(long)]
    pub estimator_stride: Option<usize>,
    /// Log the simple estimator in uniform runs too (trains an adjoint).
    #[arg(long)]
    pub baseline_estimators: bool,
    #[arg(long)]
    pub functional_points: Option<usize>,
    #[arg(long)]
    pub gauss_nodes: Option<usize>,
    /// JSON file with `TrainConfig` fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub train: TrainFlags,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write plot.svg.
    #[arg(long)]
    pub plot: bool,
    #[arg(long, default_value_t = 1)]
    pub avg_window: usize,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub train: TrainFlags,
    /// Comma-separated; defaults to `--seed` (or 0).
    #[arg(long, value_delimiter = ',')]
    pub seeds: Vec<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Final errors and plotted curves average |J error| over this many epochs.
    #[arg(long, default_value_t = 1)]
    pub avg_window: usize,
}

#[derive(Debug, Clone, Args)]
pub struct GradcheckArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub input_dim: usize,
    #[arg(long, default_value_t = 8)]
    pub width: usize,
    /// Residual blocks of the resnet; the MLP gets `2 * blocks + 1` layers.
    #[arg(long, default_value_t = 2)]
    pub blocks: usize,
    /// Random networks per architecture and activation.
    #[arg(long, default_value_t = 1)]
    pub nets: usize,
    /// Jet check points per network.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    /// Replace tanh by a copy with a sign error in its second derivative.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    /// Repeatable; one series per trace.
    #[arg(long = "trace", required = true)]
    pub traces: Vec<PathBuf>,
    /// Series labels, in the order of `--trace`.
    #[arg(long = "label")]
    pub labels: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub avg_window: usize,
    #[arg(long)]
    pub title: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}
