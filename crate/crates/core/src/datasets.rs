//! Synthetic benchmark generators and single-column CSV I/O.
//!
//! The generators stand in for the classic experiment data at desk scale: a
//! chaotic Mackey-Glass series for scalar forecasting and an hourly synthetic
//! load series (daily and weekly seasonality) for the vector case. Real data
//! files can be supplied through [`load_csv`] instead.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::series::TimeSeries;

/// A seeded synthetic series generator. All variants are deterministic given
/// their seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Generator {
    /// Mackey-Glass delay differential equation
    /// `x' = beta x(t-tau) / (1 + x(t-tau)^exponent) - gamma x(t)`,
    /// integrated by fixed-step Euler (dt = 0.1) and sampled once per time
    /// unit after a warm-up. The default `tau = 17` regime is chaotic. The
    /// seed perturbs the initial condition.
    MackeyGlass {
        length: usize,
        seed: u64,
        tau: f64,
        beta: f64,
        gamma: f64,
        exponent: f64,
    },
    /// Logistic map `x(t+1) = r x(t) (1 - x(t))`, chaotic at the default
    /// `r = 4`. `x0 = None` draws the start point from the seed.
    Logistic {
        length: usize,
        seed: u64,
        r: f64,
        x0: Option<f64>,
    },
    /// `amplitude * sin(2 pi t / period) + noise * N(0, 1)`.
    SineNoise {
        length: usize,
        seed: u64,
        period: f64,
        amplitude: f64,
        noise: f64,
    },
    /// Hourly load analog:
    /// `base + daily_amplitude * sin(2 pi t / 24) * (1 + weekly_amplitude *
    /// sin(2 pi t / 168)) + trend * t + noise * N(0, 1)`.
    SyntheticLoad {
        length: usize,
        seed: u64,
        base: f64,
        daily_amplitude: f64,
        weekly_amplitude: f64,
        trend: f64,
        noise: f64,
    },
}

impl Generator {
    /// Mackey-Glass defaults: `tau = 17`, `beta = 0.2`, `gamma = 0.1`,
    /// `exponent = 10`.
    pub fn mackey_glass(length: usize, seed: u64) -> Self {
        Self::MackeyGlass {
            length,
            seed,
            tau: 17.0,
            beta: 0.2,
            gamma: 0.1,
            exponent: 10.0,
        }
    }

    /// Logistic map defaults: `r = 4`, seeded start point.
    pub fn logistic(length: usize, seed: u64) -> Self {
        Self::Logistic {
            length,
            seed,
            r: 4.0,
            x0: None,
        }
    }

    /// Sine defaults: period 50, amplitude 1, no noise.
    pub fn sine_noise(length: usize, seed: u64) -> Self {
        Self::SineNoise {
            length,
            seed,
            period: 50.0,
            amplitude: 1.0,
            noise: 0.0,
        }
    }

    /// Load defaults: base 100, daily amplitude 20, weekly modulation 0.3,
    /// no trend, noise 2.
    pub fn synthetic_load(length: usize, seed: u64) -> Self {
        Self::SyntheticLoad {
            length,
            seed,
            base: 100.0,
            daily_amplitude: 20.0,
            weekly_amplitude: 0.3,
            trend: 0.0,
            noise: 2.0,
        }
    }

    pub fn length(&self) -> usize {
        match self {
            Self::MackeyGlass { length, .. }
            | Self::Logistic { length, .. }
            | Self::SineNoise { length, .. }
            | Self::SyntheticLoad { length, .. } => *length,
        }
    }
}

/// One standard normal variate by the Box-Muller transform. Hand-rolled so
/// the stream of draws is an implementation constant of this crate and does
/// not shift under dependency upgrades.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            break u;
        }
    };
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn generate_mackey_glass(
    length: usize,
    seed: u64,
    tau: f64,
    beta: f64,
    gamma: f64,
    exponent: f64,
) -> Result<Vec<f64>> {
    if tau <= 0.0 || beta <= 0.0 || gamma <= 0.0 || exponent <= 0.0 {
        return Err(Error::InvalidConfig(
            "mackey_glass parameters must be positive".into(),
        ));
    }
    const DT: f64 = 0.1;
    const SAMPLE_EVERY: usize = 10; // one sample per time unit
    const WARMUP_STEPS: usize = 1000;

    let delay_steps = (tau / DT).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // delay window x(t - tau)..x(t), perturbed initial condition
    let mut window: std::collections::VecDeque<f64> = (0..delay_steps + 1)
        .map(|_| 1.2 + 0.1 * (rng.gen::<f64>() - 0.5))
        .collect();

    let mut values = Vec::with_capacity(length);
    let total_steps = WARMUP_STEPS + length * SAMPLE_EVERY;
    for step in 0..total_steps {
        let delayed = window[0];
        let current = window[delay_steps];
        let next =
            current + DT * (beta * delayed / (1.0 + delayed.powf(exponent)) - gamma * current);
        window.pop_front();
        window.push_back(next);
        if step >= WARMUP_STEPS && (step - WARMUP_STEPS).is_multiple_of(SAMPLE_EVERY) {
            values.push(next);
        }
    }
    Ok(values)
}

/// Generates a deterministic series from a seeded configuration.
pub fn generate(cfg: &Generator) -> Result<TimeSeries> {
    if cfg.length() == 0 {
        return Err(Error::InvalidConfig("length must be >= 1".into()));
    }
    match cfg {
        Generator::MackeyGlass {
            length,
            seed,
            tau,
            beta,
            gamma,
            exponent,
        } => {
            let values = generate_mackey_glass(*length, *seed, *tau, *beta, *gamma, *exponent)?;
            Ok(TimeSeries::new("mackey_glass", values)?.with_sample_period("1"))
        }
        Generator::Logistic { length, seed, r, x0 } => {
            if !(0.0 < *r && *r <= 4.0) {
                return Err(Error::InvalidConfig(format!(
                    "logistic r must be in (0, 4], got {r}"
                )));
            }
            let mut x = match x0 {
                Some(x0) => {
                    if !(0.0..=1.0).contains(x0) {
                        return Err(Error::InvalidConfig(format!(
                            "logistic x0 must be in [0, 1], got {x0}"
                        )));
                    }
                    *x0
                }
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                    0.1 + 0.8 * rng.gen::<f64>()
                }
            };
            let mut values = Vec::with_capacity(*length);
            for _ in 0..*length {
                values.push(x);
                x = r * x * (1.0 - x);
            }
            TimeSeries::new("logistic", values)
        }
        Generator::SineNoise {
            length,
            seed,
            period,
            amplitude,
            noise,
        } => {
            if *period <= 0.0 || *noise < 0.0 {
                return Err(Error::InvalidConfig(
                    "sine_noise needs period > 0 and noise >= 0".into(),
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let values = (0..*length)
                .map(|t| {
                    amplitude * (std::f64::consts::TAU * t as f64 / period).sin()
                        + noise * gaussian(&mut rng)
                })
                .collect();
            TimeSeries::new("sine_noise", values)
        }
        Generator::SyntheticLoad {
            length,
            seed,
            base,
            daily_amplitude,
            weekly_amplitude,
            trend,
            noise,
        } => {
            if *noise < 0.0 {
                return Err(Error::InvalidConfig("noise must be >= 0".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let values = (0..*length)
                .map(|t| {
                    let t = t as f64;
                    let daily = (std::f64::consts::TAU * t / 24.0).sin();
                    let weekly = (std::f64::consts::TAU * t / 168.0).sin();
                    base + daily_amplitude * daily * (1.0 + weekly_amplitude * weekly)
                        + trend * t
                        + noise * gaussian(&mut rng)
                })
                .collect();
            Ok(TimeSeries::new("synthetic_load", values)?.with_sample_period("1h"))
        }
    }
}

/// Loads a single-column numeric CSV. A non-numeric first line is treated as
/// a header; any later non-numeric line is an error naming the line number.
pub fn load_csv(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".to_string());

    let mut values = Vec::new();
    let mut first_content_line = true;
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        match trimmed.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if first_content_line => {} // optional header
            Err(_) => {
                return Err(Error::CsvParse {
                    path: path.to_path_buf(),
                    line: idx + 1,
                    content: trimmed.to_string(),
                });
            }
        }
        first_content_line = false;
    }
    TimeSeries::new(name, values)
}

/// Writes one value per line, shortest round-trip decimal rendering, so
/// `load_csv(save_csv(x)) == x` exactly.
pub fn save_csv(series: &TimeSeries, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    for v in series.values() {
        writeln!(out, "{v}").expect("writing to a String cannot fail");
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Autocorrelation at the given lag: the Pearson correlation between the
/// series and its lagged copy over their overlap, so an exactly periodic
/// signal scores 1 at its period.
pub fn autocorrelation(series: &TimeSeries, lag: usize) -> Result<f64> {
    let x = series.values();
    let n = x.len();
    if lag == 0 || lag + 2 > n {
        return Err(Error::InvalidConfig(format!(
            "lag must leave at least 2 overlapping points, got lag {lag} for length {n}"
        )));
    }
    let m = n - lag;
    let mean_a = x[..m].iter().sum::<f64>() / m as f64;
    let mean_b = x[lag..].iter().sum::<f64>() / m as f64;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for t in 0..m {
        let da = x[t] - mean_a;
        let db = x[t + lag] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok(cov / (var_a * var_b).sqrt())
}
