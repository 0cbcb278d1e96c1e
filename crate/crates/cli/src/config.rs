//! TOML run configuration (version 1). Every field mirrors a command-line
//! flag; flags override file values. Unknown keys are rejected so typos
//! surface before any work starts.

use serde::Deserialize;
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub version: Option<u32>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub input: InputConfig,
    #[serde(default)]
    pub lag: LagConfig,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub som: SomFileConfig,
    #[serde(default)]
    pub sweep: SweepFileConfig,
    #[serde(default)]
    pub forecast: ForecastFileConfig,
    #[serde(default)]
    pub stability: StabilityFileConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub file: Option<PathBuf>,
    /// Generator kind: mackey_glass | logistic | sine_noise | synthetic_load.
    pub kind: Option<String>,
    pub length: Option<usize>,
    pub tau: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub exponent: Option<f64>,
    pub r: Option<f64>,
    pub x0: Option<f64>,
    pub period: Option<f64>,
    pub amplitude: Option<f64>,
    pub noise: Option<f64>,
    pub base: Option<f64>,
    pub daily_amplitude: Option<f64>,
    pub weekly_amplitude: Option<f64>,
    pub trend: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LagConfig {
    pub d: Option<usize>,
    pub offsets: Option<Vec<usize>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    pub fractions: Option<Vec<f64>>,
    pub counts: Option<Vec<usize>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SomFileConfig {
    pub n1: Option<usize>,
    pub n2: Option<usize>,
    pub epochs: Option<usize>,
    pub radius_start: Option<f64>,
    pub radius_end: Option<f64>,
    /// sample | pca_line
    pub init: Option<String>,
    pub normalize: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFileConfig {
    pub n1_grid: Option<String>,
    pub n2_grid: Option<String>,
    pub horizon: Option<usize>,
    pub paths: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForecastFileConfig {
    pub horizon: Option<usize>,
    pub paths: Option<usize>,
    pub levels: Option<Vec<f64>>,
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityFileConfig {
    pub scales: Option<Vec<f64>>,
    pub steps: Option<usize>,
    pub paths: Option<usize>,
    pub horizon: Option<usize>,
    pub margin: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let config: FileConfig = toml::from_str(&text)
            .map_err(|e| CliError::usage(format!("config {}: {e}", path.display())))?;
        if let Some(version) = config.version {
            if version != 1 {
                return Err(CliError::usage(format!(
                    "config {}: unsupported version {version} (expected 1)",
                    path.display()
                )));
            }
        }
        Ok(config)
    }
}
