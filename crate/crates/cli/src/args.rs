//! Command-line argument definitions. Every setting is also available
//! through a `--config` TOML file; explicit flags win over the file.

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(
    name = "dvq",
    about = "Long-term trend forecasting by double vector quantization",
    version
)]
pub struct Cli {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for sweeps and Monte-Carlo paths (default: all cores).
    /// Results do not depend on this value.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Directory for output files.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    /// TOML run configuration; flags override file values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic benchmark series and write it as CSV.
    Generate(GenerateArgs),
    /// Fit a model on a series and write the model file plus a fit report.
    Fit(FitArgs),
    /// Grid-search (n1, n2) on a chronological split, refit the winner.
    Sweep(SweepArgs),
    /// Simulate a Monte-Carlo ensemble from a model file.
    Forecast(ForecastArgs),
    /// Drift, boundedness and occupancy diagnostics for a model file.
    Stability(StabilityArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    MackeyGlass,
    Logistic,
    SineNoise,
    SyntheticLoad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitKind {
    Sample,
    PcaLine,
}

/// Input series: an existing CSV or an inline generator.
#[derive(Debug, Args, Default)]
pub struct InputArgs {
    /// Single-column CSV file (optional header).
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Generator kind, when no input file is given.
    #[arg(long, value_enum)]
    pub kind: Option<GenKind>,

    /// Number of values to generate.
    #[arg(long)]
    pub length: Option<usize>,

    /// Mackey-Glass delay tau.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Mackey-Glass production coefficient.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Mackey-Glass decay coefficient.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Mackey-Glass nonlinearity exponent.
    #[arg(long)]
    pub exponent: Option<f64>,
    /// Logistic-map growth rate.
    #[arg(long)]
    pub r: Option<f64>,
    /// Logistic-map start point (seeded when omitted).
    #[arg(long)]
    pub x0: Option<f64>,
    /// Sine period in samples.
    #[arg(long)]
    pub period: Option<f64>,
    /// Sine amplitude.
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Gaussian noise level.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Load baseline level.
    #[arg(long)]
    pub base: Option<f64>,
    /// Load daily sinusoid amplitude.
    #[arg(long)]
    pub daily_amplitude: Option<f64>,
    /// Load weekly modulation depth.
    #[arg(long)]
    pub weekly_amplitude: Option<f64>,
    /// Load linear trend per hour.
    #[arg(long)]
    pub trend: Option<f64>,
}

/// Lag structure of the regressor.
#[derive(Debug, Args, Default)]
pub struct LagArgs {
    /// Block size d (1 = scalar forecasting, 24 = daily blocks, ...).
    #[arg(long)]
    pub lag_d: Option<usize>,

    /// Comma-separated block offsets, e.g. `0,1,2,3,5,6`.
    #[arg(long)]
    pub lag_offsets: Option<String>,
}

/// SOM hyperparameters shared by fit and sweep.
#[derive(Debug, Args, Default)]
pub struct SomArgs {
    /// Batch training epochs.
    #[arg(long)]
    pub epochs: Option<usize>,

    /// Initial neighborhood radius (default: k/4).
    #[arg(long)]
    pub radius_start: Option<f64>,

    /// Final neighborhood radius.
    #[arg(long)]
    pub radius_end: Option<f64>,

    /// Codebook initialization.
    #[arg(long, value_enum)]
    pub init: Option<InitKind>,

    /// Z-score the series with learning-set statistics before fitting.
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub input: InputArgs,

    /// Output file (default: `<out-dir>/series.csv`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[command(flatten)]
    pub lag: LagArgs,

    /// Regressor-space prototype count.
    #[arg(long)]
    pub n1: Option<usize>,

    /// Deformation-space prototype count.
    #[arg(long)]
    pub n2: Option<usize>,

    #[command(flatten)]
    pub som: SomArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,

    #[command(flatten)]
    pub lag: LagArgs,

    /// n1 axis: `start:end:step`, a comma list, or a single value.
    #[arg(long)]
    pub n1_grid: Option<String>,

    /// n2 axis: same grammar as --n1-grid.
    #[arg(long)]
    pub n2_grid: Option<String>,

    /// Chronological split fractions `learn,valid,test`.
    #[arg(long)]
    pub split: Option<String>,

    /// Chronological split as absolute counts `learn,valid,test`.
    #[arg(long)]
    pub split_counts: Option<String>,

    /// Validation horizon (in d-blocks).
    #[arg(long)]
    pub horizon: Option<usize>,

    /// Monte-Carlo paths per validation score.
    #[arg(long)]
    pub paths: Option<usize>,

    #[command(flatten)]
    pub som: SomArgs,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    /// Model file produced by `fit` or `sweep`.
    #[arg(long)]
    pub model: PathBuf,

    #[command(flatten)]
    pub input: InputArgs,

    /// Forecast horizon (in d-blocks).
    #[arg(long)]
    pub horizon: Option<usize>,

    /// Monte-Carlo paths.
    #[arg(long)]
    pub paths: Option<usize>,

    /// Quantile band levels `lower,upper`.
    #[arg(long)]
    pub levels: Option<String>,

    /// Optional truth CSV overlaid on the trend chart.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StabilityArgs {
    /// Model file produced by `fit` or `sweep`.
    #[arg(long)]
    pub model: PathBuf,

    #[command(flatten)]
    pub input: InputArgs,

    /// Comma-separated drift probe scales.
    #[arg(long)]
    pub scales: Option<String>,

    /// Occupancy simulation steps.
    #[arg(long)]
    pub steps: Option<usize>,

    /// Paths for the boundedness ensemble.
    #[arg(long)]
    pub paths: Option<usize>,

    /// Horizon for the boundedness ensemble (in d-blocks).
    #[arg(long)]
    pub horizon: Option<usize>,

    /// Range margin as a fraction of the training range.
    #[arg(long)]
    pub margin: Option<f64>,
}
