//! Time-series container, lag-spec regressor/deformation construction and
//! chronological splitting.
//!
//! A regressor gathers selected past values of the series into one vector;
//! a deformation is the difference between two regressors lying `d` steps
//! apart. Components are stored most-recent-first, so for the contiguous
//! scalar case the regressor at time `t` is `[x(t), x(t-1), ..., x(t-p+1)]`.
//! Time indices are 1-based throughout and name the newest sample of a row.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A scalar time series with all-finite values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    name: String,
    sample_period: Option<String>,
}

impl TimeSeries {
    /// Validates and wraps raw values. Rejects empty input and non-finite
    /// values (missing data is not supported).
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { name, index });
        }
        Ok(Self {
            values,
            name,
            sample_period: None,
        })
    }

    /// Attaches a sampling-period annotation such as `"1h"`.
    pub fn with_sample_period(mut self, period: impl Into<String>) -> Self {
        self.sample_period = Some(period.into());
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// A valid series is never empty; kept for interface completeness.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sample_period(&self) -> Option<&str> {
        self.sample_period.as_deref()
    }

    /// Smallest value of the series.
    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Largest value of the series.
    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Chronological concatenation `self ++ other`, keeping `self`'s metadata.
    pub fn concat(&self, other: &TimeSeries) -> TimeSeries {
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        TimeSeries {
            values,
            name: format!("{}+{}", self.name, other.name),
            sample_period: self.sample_period.clone(),
        }
    }

    fn segment(&self, start: usize, end: usize, suffix: &str) -> TimeSeries {
        TimeSeries {
            values: self.values[start..end].to_vec(),
            name: format!("{}/{}", self.name, suffix),
            sample_period: self.sample_period.clone(),
        }
    }
}

/// Lag structure of a regressor: block size `d` and the strictly increasing
/// block offsets (in units of `d`), offset 0 always present.
///
/// The regressor dimension is `p = offsets.len() * d`. Offsets need not be
/// contiguous, e.g. `d = 1, offsets = {0, 1, 2, 3, 5, 6}` skips `x(t-4)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LagSpec {
    d: usize,
    offsets: Vec<usize>,
}

impl LagSpec {
    pub fn new(d: usize, offsets: Vec<usize>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidLagSpec("block size d must be >= 1".into()));
        }
        if offsets.is_empty() {
            return Err(Error::InvalidLagSpec("offsets must be non-empty".into()));
        }
        if offsets[0] != 0 {
            return Err(Error::InvalidLagSpec(
                "offset 0 (the most recent block) must be present".into(),
            ));
        }
        if !offsets.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidLagSpec(
                "offsets must be strictly increasing".into(),
            ));
        }
        Ok(Self { d, offsets })
    }

    /// Contiguous scalar spec of dimension `p`: `d = 1`, offsets `0..p`.
    pub fn contiguous(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidLagSpec(
                "regressor dimension must be >= 1".into(),
            ));
        }
        Self::new(1, (0..p).collect())
    }

    /// Block size `d`.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Block offsets, in units of `d`.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    /// Number of blocks `m`.
    pub fn block_count(&self) -> usize {
        self.offsets.len()
    }

    /// Regressor dimension `p = m * d`.
    pub fn dim(&self) -> usize {
        self.offsets.len() * self.d
    }

    /// Minimum number of past values needed to form one regressor:
    /// `d * (o_max + 1)`.
    pub fn span(&self) -> usize {
        self.d * (self.offsets[self.offsets.len() - 1] + 1)
    }
}

/// Regressors extracted from a series under a [`LagSpec`].
///
/// Row `i` is the regressor whose newest sample is `x(times[i])`
/// (1-based); components are most-recent-first. Rows are emitted at stride
/// `d`, aligned so the final series value is the newest sample of the last
/// row.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressorSet {
    times: Vec<usize>,
    rows: Vec<Vec<f64>>,
    dim: usize,
}

impl RegressorSet {
    pub fn times(&self) -> &[usize] {
        &self.times
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Regressor dimension `p`.
    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Deformations `regressor(t+d) - regressor(t)`, aligned with the regressor
/// each one is associated to: row `i` carries the time index of its source
/// regressor.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationSet {
    times: Vec<usize>,
    rows: Vec<Vec<f64>>,
    dim: usize,
}

impl DeformationSet {
    pub fn times(&self) -> &[usize] {
        &self.times
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Builds every regressor whose required past values all exist.
///
/// The regressor at (1-based) time `t` concatenates, most recent block first,
/// the blocks `[x(t - o*d), x(t - o*d - 1), ..., x(t - o*d - d + 1)]` for each
/// offset `o`. Rows are emitted chronologically at stride `d`, aligned to the
/// series end; leading values that do not fill a whole stride are unused.
pub fn build_regressors(series: &TimeSeries, spec: &LagSpec) -> Result<RegressorSet> {
    let n = series.len();
    let span = spec.span();
    if n < span {
        return Err(Error::SeriesTooShort {
            name: series.name().to_string(),
            got: n,
            needed: span,
        });
    }
    let d = spec.d();
    let x = series.values();

    // Newest-sample times t = n, n-d, n-2d, ... while a full regressor fits.
    let count = (n - span) / d + 1;
    let mut times = Vec::with_capacity(count);
    let mut rows = Vec::with_capacity(count);
    for i in 0..count {
        let t = n - (count - 1 - i) * d;
        let mut row = Vec::with_capacity(spec.dim());
        for &o in spec.offsets() {
            let newest = t - o * d; // 1-based index of the block's newest sample
            for j in 0..d {
                row.push(x[newest - j - 1]);
            }
        }
        times.push(t);
        rows.push(row);
    }
    Ok(RegressorSet {
        times,
        rows,
        dim: spec.dim(),
    })
}

/// Differences between consecutive (stride-`d`) regressors. Exactly
/// `regs.len() - 1` rows; row `i` is `regs.row(i+1) - regs.row(i)` and carries
/// `regs.times()[i]`.
pub fn build_deformations(regs: &RegressorSet, spec: &LagSpec) -> Result<DeformationSet> {
    if regs.len() < 2 {
        return Err(Error::EmptyInput(
            "at least 2 regressors are required to form deformations".into(),
        ));
    }
    let d = spec.d();
    let mut times = Vec::with_capacity(regs.len() - 1);
    let mut rows = Vec::with_capacity(regs.len() - 1);
    for i in 0..regs.len() - 1 {
        let (t0, t1) = (regs.times()[i], regs.times()[i + 1]);
        if t1 - t0 != d {
            return Err(Error::InvalidConfig(format!(
                "regressor rows at t={t0} and t={t1} are not {d} steps apart"
            )));
        }
        let row: Vec<f64> = regs
            .row(i + 1)
            .iter()
            .zip(regs.row(i))
            .map(|(next, cur)| next - cur)
            .collect();
        times.push(t0);
        rows.push(row);
    }
    Ok(DeformationSet {
        times,
        rows,
        dim: regs.dim(),
    })
}

fn check_fractions(fractions: [f64; 3]) -> Result<()> {
    if fractions.iter().any(|f| *f <= 0.0 || !f.is_finite()) {
        return Err(Error::InvalidSplit(format!(
            "fractions must be positive, got {fractions:?}"
        )));
    }
    let sum: f64 = fractions.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidSplit(format!(
            "fractions must sum to 1, got {sum}"
        )));
    }
    Ok(())
}

/// Contiguous chronological split into (learning, validation, test) by
/// fractions: learning earliest, test latest, no shuffling.
pub fn split_chronological(
    series: &TimeSeries,
    learn_frac: f64,
    valid_frac: f64,
    test_frac: f64,
) -> Result<(TimeSeries, TimeSeries, TimeSeries)> {
    check_fractions([learn_frac, valid_frac, test_frac])?;
    let n = series.len();
    let n_learn = (n as f64 * learn_frac).round() as usize;
    let n_valid = (n as f64 * valid_frac).round() as usize;
    if n_learn == 0 || n_valid == 0 || n_learn + n_valid >= n {
        return Err(Error::InvalidSplit(format!(
            "fractions ({learn_frac}, {valid_frac}, {test_frac}) leave an empty segment for n={n}"
        )));
    }
    split_counts(series, n_learn, n_valid, n - n_learn - n_valid)
}

/// Split by absolute counts. `n_learn + n_valid + n_test` may be smaller than
/// the series length; any remaining tail is left unused.
pub fn split_counts(
    series: &TimeSeries,
    n_learn: usize,
    n_valid: usize,
    n_test: usize,
) -> Result<(TimeSeries, TimeSeries, TimeSeries)> {
    let n = series.len();
    if n_learn == 0 || n_valid == 0 || n_test == 0 {
        return Err(Error::InvalidSplit(format!(
            "all segments must be non-empty, got ({n_learn}, {n_valid}, {n_test})"
        )));
    }
    let total = n_learn + n_valid + n_test;
    if total > n {
        return Err(Error::InvalidSplit(format!(
            "counts ({n_learn}, {n_valid}, {n_test}) sum to {total} > series length {n}"
        )));
    }
    Ok((
        series.segment(0, n_learn, "learn"),
        series.segment(n_learn, n_learn + n_valid, "valid"),
        series.segment(n_learn + n_valid, total, "test"),
    ))
}

/// Z-score parameters estimated from a learning series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub mean: f64,
    pub sd: f64,
}

impl NormParams {
    /// Estimates mean and sample standard deviation (n-1 denominator).
    pub fn estimate(series: &TimeSeries) -> Result<Self> {
        let n = series.len();
        if n < 2 {
            return Err(Error::SeriesTooShort {
                name: series.name().to_string(),
                got: n,
                needed: 2,
            });
        }
        let mean = series.values().iter().sum::<f64>() / n as f64;
        let var = series
            .values()
            .iter()
            .map(|v| (v - mean).powi(2))
            .sum::<f64>()
            / (n - 1) as f64;
        if var == 0.0 {
            return Err(Error::ZeroVariance);
        }
        Ok(Self {
            mean,
            sd: var.sqrt(),
        })
    }

    /// Raw value to z-score.
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.mean) / self.sd
    }

    /// Z-score back to a raw value.
    pub fn invert(&self, z: f64) -> f64 {
        z * self.sd + self.mean
    }
}

/// Z-score normalization using the series' own statistics. Returns the
/// normalized series together with the parameters needed to invert it.
pub fn normalize(series: &TimeSeries) -> Result<(TimeSeries, NormParams)> {
    let params = NormParams::estimate(series)?;
    let normalized = TimeSeries {
        values: series.values().iter().map(|v| params.apply(*v)).collect(),
        name: series.name.clone(),
        sample_period: series.sample_period.clone(),
    };
    Ok((normalized, params))
}

/// Exact inverse of [`normalize`] (up to floating-point rounding).
pub fn denormalize(series: &TimeSeries, params: &NormParams) -> TimeSeries {
    TimeSeries {
        values: series.values().iter().map(|v| params.invert(*v)).collect(),
        name: series.name.clone(),
        sample_period: series.sample_period.clone(),
    }
}
