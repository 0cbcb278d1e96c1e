//! The double-quantization model: codebooks for regressors and deformations,
//! the empirical transition matrix linking them, the stochastic simulation
//! loop, and Monte-Carlo ensemble statistics.
//!
//! Simulation draws use ChaCha8 streams (see [`crate::rng`]); Monte-Carlo
//! path `i` owns the stream derived from `(master_seed, i)`, so ensembles are
//! bit-identical regardless of how paths are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::series::{
    build_deformations, build_regressors, normalize, LagSpec, NormParams, TimeSeries,
};
use crate::som::{assign_clusters, bmu, train, Codebook, SomConfig};

/// Row-stochastic matrix of empirical conditional frequencies
/// `P(deformation cluster j | regressor cluster i)`, kept together with the
/// raw co-occurrence counts it was estimated from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    rows: Vec<Vec<f64>>,
    counts: Vec<Vec<u64>>,
    row_support: Vec<u64>,
}

impl TransitionMatrix {
    /// Estimates the matrix from aligned (regressor cluster, deformation
    /// cluster) pairs.
    pub fn from_pairs(n1: usize, n2: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::NoTransitions);
        }
        let mut counts = vec![vec![0u64; n2]; n1];
        for &(i, j) in pairs {
            if i >= n1 {
                return Err(Error::ClusterOutOfRange { index: i, n: n1 });
            }
            if j >= n2 {
                return Err(Error::ClusterOutOfRange { index: j, n: n2 });
            }
            counts[i][j] += 1;
        }
        let row_support: Vec<u64> = counts.iter().map(|row| row.iter().sum()).collect();
        let rows = counts
            .iter()
            .zip(&row_support)
            .map(|(row, &support)| {
                if support == 0 {
                    vec![0.0; n2]
                } else {
                    row.iter().map(|&c| c as f64 / support as f64).collect()
                }
            })
            .collect();
        Ok(Self {
            rows,
            counts,
            row_support,
        })
    }

    /// Number of regressor clusters.
    pub fn n1(&self) -> usize {
        self.rows.len()
    }

    /// Number of deformation clusters.
    pub fn n2(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Conditional probabilities of row `i` (all zeros when unsupported).
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn row_support(&self) -> &[u64] {
        &self.row_support
    }

    /// Whether row `i` was estimated from at least one pair.
    pub fn is_supported(&self, i: usize) -> bool {
        self.row_support[i] > 0
    }
}

/// Inverse-CDF draw over a probability row: the smallest `j` whose cumulative
/// sum exceeds `u`. Falls back to the last positive entry if rounding leaves
/// `u` beyond the final cumulative sum.
pub fn inverse_cdf(row: &[f64], u: f64) -> usize {
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (j, &p) in row.iter().enumerate() {
        if p > 0.0 {
            last_positive = j;
        }
        cum += p;
        if cum > u {
            return j;
        }
    }
    last_positive
}

/// Options for [`fit_opts`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FitOptions {
    /// Z-score the series with its own statistics before building regressors.
    /// Off by default; simulated values are always reported in raw units.
    pub normalize: bool,
    /// Master seed recorded in the model file.
    pub seed_of_fit: u64,
}

/// The trained forecaster: both codebooks, the transition matrix, the lag
/// structure and optional normalization parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DvqModel {
    reg_codebook: Codebook,
    def_codebook: Codebook,
    transition: TransitionMatrix,
    spec: LagSpec,
    norm: Option<NormParams>,
    seed_of_fit: u64,
    reg_config: SomConfig,
    def_config: SomConfig,
}

/// Fits a model on `series` with default options (no normalization).
pub fn fit(
    series: &TimeSeries,
    spec: &LagSpec,
    cfg_x: &SomConfig,
    cfg_y: &SomConfig,
) -> Result<DvqModel> {
    fit_opts(series, spec, cfg_x, cfg_y, &FitOptions::default())
}

/// Fits a model: builds regressors and deformations, trains both codebooks,
/// and estimates the transition matrix from the aligned cluster pairs.
pub fn fit_opts(
    series: &TimeSeries,
    spec: &LagSpec,
    cfg_x: &SomConfig,
    cfg_y: &SomConfig,
    opts: &FitOptions,
) -> Result<DvqModel> {
    let (working, norm) = if opts.normalize {
        let (normalized, params) = normalize(series)?;
        (normalized, Some(params))
    } else {
        (series.clone(), None)
    };

    let regs = build_regressors(&working, spec)?;
    if regs.len() < 2 {
        return Err(Error::SeriesTooShort {
            name: series.name().to_string(),
            got: series.len(),
            needed: spec.span() + spec.d(),
        });
    }
    let defs = build_deformations(&regs, spec)?;

    let reg_som = train(regs.rows(), cfg_x)?;
    let def_som = train(defs.rows(), cfg_y)?;

    // Pair each deformation with the regressor it is associated to; the last
    // regressor has no deformation and only contributes to codebook training.
    let paired = &regs.rows()[..defs.len()];
    let reg_labels = assign_clusters(&reg_som.codebook, paired)?;
    let def_labels = assign_clusters(&def_som.codebook, defs.rows())?;
    let pairs: Vec<(usize, usize)> = reg_labels.into_iter().zip(def_labels).collect();
    let transition = TransitionMatrix::from_pairs(cfg_x.k, cfg_y.k, &pairs)?;

    Ok(DvqModel {
        reg_codebook: reg_som.codebook,
        def_codebook: def_som.codebook,
        transition,
        spec: spec.clone(),
        norm,
        seed_of_fit: opts.seed_of_fit,
        reg_config: cfg_x.clone(),
        def_config: cfg_y.clone(),
    })
}

/// Post-fit diagnostics recomputed from a model and its training series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitDiagnostics {
    pub reg_quantization_error: f64,
    pub def_quantization_error: f64,
    pub reg_dead_units: usize,
    pub def_dead_units: usize,
    pub empty_rows: usize,
    pub pairs: usize,
}

/// Quantization errors, dead units and empty transition rows of `model` with
/// respect to the series it was fitted on.
pub fn diagnostics(model: &DvqModel, series: &TimeSeries) -> Result<FitDiagnostics> {
    let working = match &model.norm {
        Some(params) => TimeSeries::new(
            series.name(),
            series.values().iter().map(|v| params.apply(*v)).collect(),
        )?,
        None => series.clone(),
    };
    let regs = build_regressors(&working, &model.spec)?;
    let defs = build_deformations(&regs, &model.spec)?;

    let reg_labels = assign_clusters(&model.reg_codebook, regs.rows())?;
    let def_labels = assign_clusters(&model.def_codebook, defs.rows())?;
    let mut reg_occ = vec![0usize; model.reg_codebook.k()];
    for l in &reg_labels {
        reg_occ[*l] += 1;
    }
    let mut def_occ = vec![0usize; model.def_codebook.k()];
    for l in &def_labels {
        def_occ[*l] += 1;
    }

    Ok(FitDiagnostics {
        reg_quantization_error: crate::som::quantization_error(&model.reg_codebook, regs.rows())?,
        def_quantization_error: crate::som::quantization_error(&model.def_codebook, defs.rows())?,
        reg_dead_units: reg_occ.iter().filter(|c| **c == 0).count(),
        def_dead_units: def_occ.iter().filter(|c| **c == 0).count(),
        empty_rows: (0..model.transition.n1())
            .filter(|&i| !model.transition.is_supported(i))
            .count(),
        pairs: model.transition.row_support().iter().sum::<u64>() as usize,
    })
}

impl DvqModel {
    pub fn reg_codebook(&self) -> &Codebook {
        &self.reg_codebook
    }

    pub fn def_codebook(&self) -> &Codebook {
        &self.def_codebook
    }

    pub fn transition(&self) -> &TransitionMatrix {
        &self.transition
    }

    pub fn spec(&self) -> &LagSpec {
        &self.spec
    }

    pub fn norm(&self) -> Option<&NormParams> {
        self.norm.as_ref()
    }

    pub fn seed_of_fit(&self) -> u64 {
        self.seed_of_fit
    }

    pub fn reg_config(&self) -> &SomConfig {
        &self.reg_config
    }

    pub fn def_config(&self) -> &SomConfig {
        &self.def_config
    }

    /// Resolves the transition row used for `cluster`: the cluster itself if
    /// supported, otherwise the nearest supported regressor prototype
    /// (Euclidean over prototypes, ties to the lowest index). Dead SOM units
    /// and refits can leave rows without support; the fallback keeps
    /// simulations total while staying local.
    pub fn effective_cluster(&self, cluster: usize) -> Result<usize> {
        let n1 = self.transition.n1();
        if cluster >= n1 {
            return Err(Error::ClusterOutOfRange {
                index: cluster,
                n: n1,
            });
        }
        if self.transition.is_supported(cluster) {
            return Ok(cluster);
        }
        let own = self.reg_codebook.prototype(cluster);
        let mut best: Option<(usize, f64)> = None;
        for i in 0..n1 {
            if !self.transition.is_supported(i) {
                continue;
            }
            let dist: f64 = self
                .reg_codebook
                .prototype(i)
                .iter()
                .zip(own)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if best.is_none_or(|(_, d)| dist < d) {
                best = Some((i, dist));
            }
        }
        best.map(|(i, _)| i)
            .ok_or(Error::UnsupportedRow { cluster })
    }

    /// Draws a deformation prototype index from the transition row of
    /// `cluster` by inverse CDF over one uniform variate.
    pub fn sample_deformation(&self, cluster: usize, rng: &mut ChaCha8Rng) -> Result<usize> {
        let row = self.effective_cluster(cluster)?;
        let u: f64 = rng.gen();
        Ok(inverse_cdf(self.transition.row(row), u))
    }
}

/// Rolling-buffer simulation state. The buffer holds the last `span` values
/// in model space (normalized when the model was fitted normalized) and
/// grows by one `d`-block per step.
pub(crate) struct Simulator<'a> {
    model: &'a DvqModel,
    buffer: Vec<f64>,
    step: usize,
}

impl<'a> Simulator<'a> {
    pub(crate) fn new(model: &'a DvqModel, history: &TimeSeries) -> Result<Self> {
        let span = model.spec.span();
        if history.len() < span {
            return Err(Error::SeriesTooShort {
                name: history.name().to_string(),
                got: history.len(),
                needed: span,
            });
        }
        let tail = &history.values()[history.len() - span..];
        let buffer = match &model.norm {
            Some(params) => tail.iter().map(|v| params.apply(*v)).collect(),
            None => tail.to_vec(),
        };
        Ok(Self {
            model,
            buffer,
            step: 0,
        })
    }

    /// The regressor ending at the newest buffered value, most-recent-first.
    pub(crate) fn current_regressor(&self) -> Vec<f64> {
        let spec = &self.model.spec;
        let d = spec.d();
        let end = self.buffer.len();
        let mut row = Vec::with_capacity(spec.dim());
        for &o in spec.offsets() {
            for j in 0..d {
                row.push(self.buffer[end - 1 - o * d - j]);
            }
        }
        row
    }

    /// One simulation step: BMU lookup, deformation draw, additive update.
    /// Returns the regressor cluster used and the new `d`-block in
    /// chronological order (still in model space). A simulated regressor
    /// that drifts outside the training data simply maps to its nearest
    /// prototype; no special out-of-range handling exists.
    pub(crate) fn step(&mut self, rng: &mut ChaCha8Rng) -> Result<(usize, Vec<f64>)> {
        let regressor = self.current_regressor();
        let cluster = bmu(&self.model.reg_codebook, &regressor)?;
        let deformation_idx = self.model.sample_deformation(cluster, rng)?;
        let deformation = self.model.def_codebook.prototype(deformation_idx);

        let d = self.model.spec.d();
        // The predicted regressor is regressor + deformation; its leading
        // block holds the d newest predicted values, newest first.
        let block: Vec<f64> = (0..d)
            .rev()
            .map(|c| regressor[c] + deformation[c])
            .collect();
        self.step += 1;
        if block.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSimulation { step: self.step });
        }
        self.buffer.extend_from_slice(&block);
        let drop = self.buffer.len() - self.model.spec.span();
        self.buffer.drain(..drop);
        Ok((cluster, block))
    }

    /// Maps a model-space value back to raw units.
    pub(crate) fn denorm(&self, v: f64) -> f64 {
        match &self.model.norm {
            Some(params) => params.invert(v),
            None => v,
        }
    }
}

/// Simulates one stochastic path of `horizon` steps from the end of
/// `history`. Returns `horizon` values in the scalar case and
/// `horizon * d` values (chronological) in the vector case, in raw units.
pub fn simulate_path(
    model: &DvqModel,
    history: &TimeSeries,
    horizon: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    if horizon == 0 {
        return Err(Error::InvalidConfig("horizon must be >= 1".into()));
    }
    let mut sim = Simulator::new(model, history)?;
    let mut path = Vec::with_capacity(horizon * model.spec().d());
    for _ in 0..horizon {
        let (_, block) = sim.step(rng)?;
        path.extend(block.iter().map(|v| sim.denorm(*v)));
    }
    Ok(path)
}

/// A Monte-Carlo ensemble of simulated paths plus the regressor the
/// simulation started from.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastEnsemble {
    paths: Vec<Vec<f64>>,
    seeds: Vec<u64>,
    origin: Vec<f64>,
    horizon: usize,
    block: usize,
}

impl ForecastEnsemble {
    /// Simulated paths, one row per path, `horizon * d` values each.
    pub fn paths(&self) -> &[Vec<f64>] {
        &self.paths
    }

    /// Per-path RNG seeds, aligned with `paths`.
    pub fn seeds(&self) -> &[u64] {
        &self.seeds
    }

    /// The initial regressor, in raw units, most-recent-first.
    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    /// Number of simulation steps (`d`-blocks in the vector case).
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Block size `d`; each path holds `horizon * d` scalar values.
    pub fn block(&self) -> usize {
        self.block
    }

    /// Number of paths.
    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    /// Scalar values per path.
    pub fn step_count(&self) -> usize {
        self.horizon * self.block
    }

    /// Mean of the ensemble at every scalar step.
    pub fn mean_path(&self) -> Vec<f64> {
        let steps = self.step_count();
        let mut mean = vec![0.0f64; steps];
        for path in &self.paths {
            for (m, v) in mean.iter_mut().zip(path) {
                *m += v;
            }
        }
        let n = self.paths.len() as f64;
        for m in &mut mean {
            *m /= n;
        }
        mean
    }
}

/// Runs `n_paths` independent simulations. Path `i` uses the RNG stream
/// derived from `(master_seed, i)`, so the ensemble does not depend on
/// execution order or thread count.
pub fn monte_carlo(
    model: &DvqModel,
    history: &TimeSeries,
    horizon: usize,
    n_paths: usize,
    master_seed: u64,
) -> Result<ForecastEnsemble> {
    if n_paths == 0 {
        return Err(Error::InvalidConfig("n_paths must be >= 1".into()));
    }
    let seeds: Vec<u64> = (0..n_paths as u64)
        .map(|i| derive_seed(master_seed, i))
        .collect();
    let paths: Vec<Vec<f64>> = seeds
        .par_iter()
        .map(|&seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            simulate_path(model, history, horizon, &mut rng)
        })
        .collect::<Result<_>>()?;

    let sim = Simulator::new(model, history)?;
    let origin = sim
        .current_regressor()
        .iter()
        .map(|v| sim.denorm(*v))
        .collect();

    Ok(ForecastEnsemble {
        paths,
        seeds,
        origin,
        horizon,
        block: model.spec().d(),
    })
}

/// Per-step trend statistics of an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendSummary {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// The quantile levels behind `lower` and `upper`.
    pub levels: (f64, f64),
}

impl TrendSummary {
    pub fn steps(&self) -> usize {
        self.mean.len()
    }

    /// Per-step `(lower, upper)` band bounds.
    pub fn iter_bands(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.lower.iter().copied().zip(self.upper.iter().copied())
    }
}

/// Linear-interpolation quantile of a sorted sample (the common "type 7"
/// convention): position `q * (n - 1)` interpolated between neighbors.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Per-step sample mean, unbiased variance and empirical quantile band.
/// Requires at least two paths.
pub fn summarize(ens: &ForecastEnsemble, levels: (f64, f64)) -> Result<TrendSummary> {
    let n = ens.len();
    if n < 2 {
        return Err(Error::InvalidConfig(
            "at least 2 paths are required to summarize an ensemble".into(),
        ));
    }
    let (lo, hi) = levels;
    if !(0.0 < lo && lo < hi && hi < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "quantile levels must satisfy 0 < lower < upper < 1, got ({lo}, {hi})"
        )));
    }
    let steps = ens.step_count();
    let mut mean = Vec::with_capacity(steps);
    let mut variance = Vec::with_capacity(steps);
    let mut lower = Vec::with_capacity(steps);
    let mut upper = Vec::with_capacity(steps);
    let mut column = vec![0.0f64; n];
    for s in 0..steps {
        for (c, path) in column.iter_mut().zip(ens.paths()) {
            *c = path[s];
        }
        let m = column.iter().sum::<f64>() / n as f64;
        let v = column.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
        column.sort_by(|a, b| a.partial_cmp(b).expect("ensemble values are finite"));
        mean.push(m);
        variance.push(v);
        lower.push(quantile_sorted(&column, lo));
        upper.push(quantile_sorted(&column, hi));
    }
    Ok(TrendSummary {
        mean,
        variance,
        lower,
        upper,
        levels,
    })
}

// --- model file (JSON) ---------------------------------------------------

/// On-disk codebook: prototypes plus the SOM configuration that produced it.
#[derive(Debug, Serialize, Deserialize)]
struct CodebookFile {
    k: usize,
    p: usize,
    prototypes: Vec<Vec<f64>>,
    som_config: SomConfig,
}

#[derive(Debug, Serialize, Deserialize)]
struct TransitionFile {
    counts: Vec<Vec<u64>>,
    rows: Vec<Vec<f64>>,
    row_support: Vec<u64>,
}

/// Version-1 model document.
#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    spec: LagSpec,
    norm: Option<NormParams>,
    reg_codebook: CodebookFile,
    def_codebook: CodebookFile,
    transition: TransitionFile,
    seed_of_fit: u64,
}

const FORMAT_VERSION: u32 = 1;

fn codebook_to_file(cb: &Codebook, cfg: &SomConfig) -> CodebookFile {
    CodebookFile {
        k: cb.k(),
        p: cb.dim(),
        prototypes: cb.prototypes().to_vec(),
        som_config: cfg.clone(),
    }
}

fn codebook_from_file(file: CodebookFile, field: &str) -> Result<(Codebook, SomConfig)> {
    if file.prototypes.len() != file.k {
        return Err(Error::ModelFormat(format!(
            "{field}.k is {} but {field}.prototypes has {} entries",
            file.k,
            file.prototypes.len()
        )));
    }
    if file.prototypes.iter().any(|row| row.len() != file.p) {
        return Err(Error::ModelFormat(format!(
            "{field}.prototypes rows must all have length {field}.p = {}",
            file.p
        )));
    }
    let cb = Codebook::new(file.prototypes)
        .map_err(|e| Error::ModelFormat(format!("{field}.prototypes: {e}")))?;
    Ok((cb, file.som_config))
}

impl DvqModel {
    /// Serializes to the version-1 JSON model document.
    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile {
            format_version: FORMAT_VERSION,
            spec: self.spec.clone(),
            norm: self.norm,
            reg_codebook: codebook_to_file(&self.reg_codebook, &self.reg_config),
            def_codebook: codebook_to_file(&self.def_codebook, &self.def_config),
            transition: TransitionFile {
                counts: self.transition.counts().to_vec(),
                rows: self.transition.rows.clone(),
                row_support: self.transition.row_support().to_vec(),
            },
            seed_of_fit: self.seed_of_fit,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    /// Parses and validates a model document; schema violations name the
    /// offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format_version != FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "format_version {} is not supported (expected {FORMAT_VERSION})",
                file.format_version
            )));
        }
        let spec = LagSpec::new(file.spec.d(), file.spec.offsets().to_vec())
            .map_err(|e| Error::ModelFormat(format!("spec: {e}")))?;
        let (reg_codebook, reg_config) = codebook_from_file(file.reg_codebook, "reg_codebook")?;
        let (def_codebook, def_config) = codebook_from_file(file.def_codebook, "def_codebook")?;
        if reg_codebook.dim() != spec.dim() {
            return Err(Error::ModelFormat(format!(
                "reg_codebook.p = {} does not match spec dimension {}",
                reg_codebook.dim(),
                spec.dim()
            )));
        }
        if def_codebook.dim() != spec.dim() {
            return Err(Error::ModelFormat(format!(
                "def_codebook.p = {} does not match spec dimension {}",
                def_codebook.dim(),
                spec.dim()
            )));
        }
        if let Some(norm) = &file.norm {
            if !(norm.sd.is_finite() && norm.sd > 0.0 && norm.mean.is_finite()) {
                return Err(Error::ModelFormat(
                    "norm: sd must be finite and positive".into(),
                ));
            }
        }

        let t = file.transition;
        let (n1, n2) = (reg_codebook.k(), def_codebook.k());
        if t.counts.len() != n1 || t.rows.len() != n1 || t.row_support.len() != n1 {
            return Err(Error::ModelFormat(format!(
                "transition must have {n1} rows in counts, rows and row_support"
            )));
        }
        for (i, (counts, probs)) in t.counts.iter().zip(&t.rows).enumerate() {
            if counts.len() != n2 || probs.len() != n2 {
                return Err(Error::ModelFormat(format!(
                    "transition.counts/rows row {i} must have {n2} columns"
                )));
            }
            let support: u64 = counts.iter().sum();
            if support != t.row_support[i] {
                return Err(Error::ModelFormat(format!(
                    "transition.row_support[{i}] = {} does not match counts (sum {support})",
                    t.row_support[i]
                )));
            }
            if support > 0 {
                let sum: f64 = probs.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::ModelFormat(format!(
                        "transition.rows[{i}] sums to {sum}, expected 1"
                    )));
                }
            } else if probs.iter().any(|p| *p != 0.0) {
                return Err(Error::ModelFormat(format!(
                    "transition.rows[{i}] has probabilities but row_support is 0"
                )));
            }
        }
        if (0..n1).all(|i| t.row_support[i] == 0) {
            return Err(Error::ModelFormat(
                "transition.row_support: all rows are empty".into(),
            ));
        }

        Ok(DvqModel {
            reg_codebook,
            def_codebook,
            transition: TransitionMatrix {
                rows: t.rows,
                counts: t.counts,
                row_support: t.row_support,
            },
            spec,
            norm: file.norm,
            seed_of_fit: file.seed_of_fit,
            reg_config,
            def_config,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn ts(values: &[f64]) -> TimeSeries {
        TimeSeries::new("test", values.to_vec()).unwrap()
    }

    fn alternating(n: usize) -> TimeSeries {
        ts(&(0..n).map(|i| (i % 2) as f64).collect::<Vec<_>>())
    }

    /// Hand-built model: one regressor cluster, one deformation prototype,
    /// transition row (1.0).
    fn single_deformation_model(reg_proto: Vec<f64>, def_proto: Vec<f64>) -> DvqModel {
        let p = reg_proto.len();
        let spec = LagSpec::contiguous(p).unwrap();
        DvqModel {
            reg_codebook: Codebook::new(vec![reg_proto]).unwrap(),
            def_codebook: Codebook::new(vec![def_proto]).unwrap(),
            transition: TransitionMatrix::from_pairs(1, 1, &[(0, 0)]).unwrap(),
            spec,
            norm: None,
            seed_of_fit: 0,
            reg_config: SomConfig::new(1),
            def_config: SomConfig::new(1),
        }
    }

    /// Brute-force 2x2 contingency table for the alternating series: exact
    /// regressor/deformation clustering by value equality.
    fn alternating_contingency(series: &TimeSeries) -> [[u64; 2]; 2] {
        let spec = LagSpec::contiguous(2).unwrap();
        let regs = build_regressors(series, &spec).unwrap();
        let defs = build_deformations(&regs, &spec).unwrap();
        let mut table = [[0u64; 2]; 2];
        for i in 0..defs.len() {
            let r = if regs.row(i) == [1.0, 0.0] { 0 } else { 1 };
            let d = if defs.row(i) == [-1.0, 1.0] { 0 } else { 1 };
            table[r][d] += 1;
        }
        table
    }

    #[test]
    fn fit_alternating_series_matches_contingency_oracle() {
        let series = alternating(40);
        let spec = LagSpec::contiguous(2).unwrap();
        let cfg_x = SomConfig::new(2).with_seed(1);
        let cfg_y = SomConfig::new(2).with_seed(2);
        let model = fit(&series, &spec, &cfg_x, &cfg_y).unwrap();

        let oracle = alternating_contingency(&series);
        // identify which model cluster corresponds to regressor [1, 0]
        let r10 = bmu(model.reg_codebook(), &[1.0, 0.0]).unwrap();
        let r01 = bmu(model.reg_codebook(), &[0.0, 1.0]).unwrap();
        let d_m11 = bmu(model.def_codebook(), &[-1.0, 1.0]).unwrap();
        let d_p11 = bmu(model.def_codebook(), &[1.0, -1.0]).unwrap();
        assert_ne!(r10, r01);
        assert_ne!(d_m11, d_p11);

        let counts = model.transition().counts();
        assert_eq!(counts[r10][d_m11], oracle[0][0]);
        assert_eq!(counts[r10][d_p11], oracle[0][1]);
        assert_eq!(counts[r01][d_m11], oracle[1][0]);
        assert_eq!(counts[r01][d_p11], oracle[1][1]);

        // each regressor cluster maps deterministically to one deformation
        let row10 = model.transition().row(r10);
        assert_eq!(row10[d_m11], 1.0);
        assert_eq!(row10[d_p11], 0.0);
        let row01 = model.transition().row(r01);
        assert_eq!(row01[d_p11], 1.0);
        assert_eq!(row01[d_m11], 0.0);
    }

    #[test]
    fn fit_constant_series_yields_zero_deformation_rows() {
        let series = ts(&[7.0; 30]);
        let spec = LagSpec::contiguous(2).unwrap();
        let model = fit(
            &series,
            &spec,
            &SomConfig::new(1).with_seed(1),
            &SomConfig::new(1).with_seed(2),
        )
        .unwrap();
        assert_eq!(model.transition().row(0), &[1.0]);
        assert_eq!(model.def_codebook().prototype(0), &[0.0, 0.0]);
    }

    #[test]
    fn fit_rows_sum_to_one() {
        // 6 x 8 transition matrix: every supported row sums to one
        let values: Vec<f64> = (0..200).map(|i| (i as f64 * 0.37).sin()).collect();
        let series = ts(&values);
        let spec = LagSpec::contiguous(3).unwrap();
        let model = fit(
            &series,
            &spec,
            &SomConfig::new(6).with_seed(3),
            &SomConfig::new(8).with_seed(4),
        )
        .unwrap();
        assert_eq!(model.transition().n1(), 6);
        assert_eq!(model.transition().n2(), 8);
        for i in 0..6 {
            if model.transition().is_supported(i) {
                let sum: f64 = model.transition().row(i).iter().sum();
                assert!((sum - 1.0).abs() <= 1e-9, "row {i} sums to {sum}");
            }
        }
    }

    #[test]
    fn counts_over_support_is_exact() {
        let pairs = vec![(0, 0), (0, 1), (0, 1), (1, 2)];
        let t = TransitionMatrix::from_pairs(2, 3, &pairs).unwrap();
        assert_eq!(t.row(0), &[1.0 / 3.0, 2.0 / 3.0, 0.0]);
        assert_eq!(t.row(1), &[0.0, 0.0, 1.0]);
        assert_eq!(t.row_support(), &[3, 1]);
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(
                    t.row(i)[j],
                    t.counts()[i][j] as f64 / t.row_support()[i] as f64
                );
            }
        }
    }

    #[test]
    fn inverse_cdf_cases() {
        assert_eq!(inverse_cdf(&[0.3, 0.7], 0.25), 0);
        assert_eq!(inverse_cdf(&[0.3, 0.7], 0.35), 1);
        assert_eq!(inverse_cdf(&[0.3, 0.7], 0.99), 1);
        assert_eq!(inverse_cdf(&[1.0, 0.0], 0.0), 0);
        assert_eq!(inverse_cdf(&[1.0, 0.0], 0.999_999), 0);
        // zero-probability gaps are skipped
        assert_eq!(inverse_cdf(&[0.3, 0.0, 0.7], 0.3), 2);
        // rounding guard: u beyond the final cumulative sum
        assert_eq!(inverse_cdf(&[0.4, 0.6 - 1e-12], 1.0 - 1e-13), 1);
    }

    #[test]
    fn draw_frequencies_match_row() {
        let mut pairs = Vec::new();
        pairs.extend(std::iter::repeat_n((0usize, 0usize), 12));
        pairs.extend(std::iter::repeat_n((0, 6), 23));
        pairs.extend(std::iter::repeat_n((0, 7), 65));
        let t = TransitionMatrix::from_pairs(1, 8, &pairs).unwrap();
        let mut rng = stream_rng(2024, 0);
        let n = 100_000;
        let mut freq = [0.0f64; 8];
        for _ in 0..n {
            let u: f64 = rng.gen();
            freq[inverse_cdf(t.row(0), u)] += 1.0;
        }
        for f in &mut freq {
            *f /= n as f64;
        }
        for (j, f) in freq.iter().enumerate() {
            assert!(
                (f - t.row(0)[j]).abs() <= 0.01,
                "frequency {f} vs probability {} at {j}",
                t.row(0)[j]
            );
        }
    }

    #[test]
    fn simulate_fixed_point() {
        let model = single_deformation_model(vec![5.0, 5.0], vec![0.0, 0.0]);
        let history = ts(&[5.0, 5.0]);
        let mut rng = stream_rng(1, 0);
        let path = simulate_path(&model, &history, 20, &mut rng).unwrap();
        assert_eq!(path, vec![5.0; 20]);
    }

    #[test]
    fn simulate_unit_drift() {
        // single deformation prototype [+1, +1]: predictions 3, 4, 5, ...
        let model = single_deformation_model(vec![0.0, 0.0], vec![1.0, 1.0]);
        let history = ts(&[1.0, 2.0]);
        let mut rng = stream_rng(1, 0);
        let path = simulate_path(&model, &history, 5, &mut rng).unwrap();
        assert_eq!(path, vec![3.0, 4.0, 5.0, 6.0, 7.0]);
    }

    #[test]
    fn simulator_plugs_predictions_into_regressor() {
        // with non-contiguous offsets the regressor is rebuilt from the
        // shifted buffer each step: the omitted lag slot stays omitted
        let spec = LagSpec::new(1, vec![0, 1, 2, 3, 5, 6]).unwrap();
        let p = spec.dim();
        let model = DvqModel {
            reg_codebook: Codebook::new(vec![vec![0.0; p]]).unwrap(),
            def_codebook: Codebook::new(vec![vec![1.0; p]]).unwrap(),
            transition: TransitionMatrix::from_pairs(1, 1, &[(0, 0)]).unwrap(),
            spec: spec.clone(),
            norm: None,
            seed_of_fit: 0,
            reg_config: SomConfig::new(1),
            def_config: SomConfig::new(1),
        };
        let history = ts(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        let mut sim = Simulator::new(&model, &history).unwrap();
        let mut rng = stream_rng(0, 0);

        let mut combined: Vec<f64> = history.values().to_vec();
        for _ in 0..4 {
            // oracle: build the regressor directly from history + predictions
            let t = combined.len();
            let expected: Vec<f64> = spec
                .offsets()
                .iter()
                .map(|o| combined[t - 1 - o])
                .collect();
            assert_eq!(sim.current_regressor(), expected);
            let (_, block) = sim.step(&mut rng).unwrap();
            assert_eq!(block.len(), 1);
            // scalar prediction = newest regressor component + deformation
            assert_eq!(block[0], expected[0] + 1.0);
            combined.push(block[0]);
        }
    }

    #[test]
    fn vector_blocks_are_chronological() {
        // d = 2, offsets {0, 1}: regressor [x(t), x(t-1), x(t-2), x(t-3)];
        // deformation adds (10, 20) to the leading block, so the new block is
        // [x(t-1) + 20, x(t) + 10] in chronological order.
        let spec = LagSpec::new(2, vec![0, 1]).unwrap();
        let model = DvqModel {
            reg_codebook: Codebook::new(vec![vec![0.0; 4]]).unwrap(),
            def_codebook: Codebook::new(vec![vec![10.0, 20.0, 0.0, 0.0]]).unwrap(),
            transition: TransitionMatrix::from_pairs(1, 1, &[(0, 0)]).unwrap(),
            spec,
            norm: None,
            seed_of_fit: 0,
            reg_config: SomConfig::new(1),
            def_config: SomConfig::new(1),
        };
        let history = ts(&[1.0, 2.0, 3.0, 4.0]);
        let mut rng = stream_rng(0, 0);
        let path = simulate_path(&model, &history, 2, &mut rng).unwrap();
        // step 1: regressor [4,3,2,1] -> block [3+20, 4+10] = [23, 14]
        // step 2: regressor [14,23,4,3] -> block [23+20, 14+10] = [43, 24]
        assert_eq!(path, vec![23.0, 14.0, 43.0, 24.0]);
    }

    #[test]
    fn monte_carlo_is_deterministic_and_order_independent() {
        let series = alternating(60);
        let spec = LagSpec::contiguous(2).unwrap();
        let model = fit(
            &series,
            &spec,
            &SomConfig::new(2).with_seed(1),
            &SomConfig::new(2).with_seed(2),
        )
        .unwrap();
        let a = monte_carlo(&model, &series, 50, 16, 99).unwrap();
        let b = monte_carlo(&model, &series, 50, 16, 99).unwrap();
        assert_eq!(a, b);

        // thread count must not change anything
        let pool1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let pool8 = rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .unwrap();
        let c = pool1.install(|| monte_carlo(&model, &series, 50, 16, 99).unwrap());
        let d = pool8.install(|| monte_carlo(&model, &series, 50, 16, 99).unwrap());
        assert_eq!(c, d);
        assert_eq!(a, c);
    }

    #[test]
    fn deterministic_model_gives_identical_paths() {
        let model = single_deformation_model(vec![0.0, 0.0], vec![1.0, 1.0]);
        let history = ts(&[0.0, 0.0]);
        let ens = monte_carlo(&model, &history, 10, 8, 7).unwrap();
        for path in ens.paths() {
            assert_eq!(path, ens.paths()[0].as_slice());
        }
        let summary = summarize(&ens, (0.025, 0.975)).unwrap();
        for s in 0..summary.steps() {
            assert_eq!(summary.variance[s], 0.0);
            assert_eq!(summary.lower[s], summary.upper[s]);
        }
    }

    #[test]
    fn summarize_mean_and_variance() {
        let ens = ForecastEnsemble {
            paths: vec![vec![1.0], vec![2.0], vec![3.0]],
            seeds: vec![0, 1, 2],
            origin: vec![0.0],
            horizon: 1,
            block: 1,
        };
        let summary = summarize(&ens, (0.025, 0.975)).unwrap();
        assert_eq!(summary.mean, vec![2.0]);
        assert_eq!(summary.variance, vec![1.0]);
    }

    #[test]
    fn quantiles_match_interpolation_oracle() {
        // {1..100}: 2.5% -> 3.475, 97.5% -> 97.525 under type-7 interpolation
        let paths: Vec<Vec<f64>> = (1..=100).map(|v| vec![v as f64]).collect();
        let ens = ForecastEnsemble {
            seeds: (0..100).collect(),
            origin: vec![0.0],
            horizon: 1,
            block: 1,
            paths,
        };
        let summary = summarize(&ens, (0.025, 0.975)).unwrap();
        assert!((summary.lower[0] - 3.475).abs() < 1e-12);
        assert!((summary.upper[0] - 97.525).abs() < 1e-12);

        // brute-force oracle on a shuffled copy
        let mut sample: Vec<f64> = (1..=100).map(|v| v as f64).collect();
        sample.reverse();
        sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let pos: f64 = 0.025 * 99.0;
        let oracle = sample[pos.floor() as usize]
            + (pos - pos.floor()) * (sample[pos.ceil() as usize] - sample[pos.floor() as usize]);
        assert_eq!(summary.lower[0], oracle);
    }

    #[test]
    fn summary_band_brackets_the_mean() {
        let series = ts(&(0..120)
            .map(|i| (i as f64 * 0.37).sin())
            .collect::<Vec<_>>());
        let spec = LagSpec::contiguous(3).unwrap();
        let model = fit(
            &series,
            &spec,
            &SomConfig::new(6).with_seed(1),
            &SomConfig::new(6).with_seed(2),
        )
        .unwrap();
        let ens = monte_carlo(&model, &series, 40, 100, 5).unwrap();
        let summary = summarize(&ens, (0.025, 0.975)).unwrap();
        for s in 0..summary.steps() {
            assert!(summary.lower[s] <= summary.mean[s]);
            assert!(summary.mean[s] <= summary.upper[s]);
            assert!(summary.variance[s] >= 0.0);
        }
    }

    #[test]
    fn summarize_rejects_degenerate_input() {
        let ens = ForecastEnsemble {
            paths: vec![vec![1.0]],
            seeds: vec![0],
            origin: vec![0.0],
            horizon: 1,
            block: 1,
        };
        assert!(summarize(&ens, (0.025, 0.975)).is_err());
        let ens2 = ForecastEnsemble {
            paths: vec![vec![1.0], vec![2.0]],
            seeds: vec![0, 1],
            origin: vec![0.0],
            horizon: 1,
            block: 1,
        };
        assert!(summarize(&ens2, (0.975, 0.025)).is_err());
        assert!(summarize(&ens2, (0.0, 0.975)).is_err());
    }

    #[test]
    fn empty_row_falls_back_to_nearest_supported_prototype() {
        let spec = LagSpec::contiguous(1).unwrap();
        let model = DvqModel {
            reg_codebook: Codebook::new(vec![vec![0.0], vec![10.0], vec![11.0]]).unwrap(),
            def_codebook: Codebook::new(vec![vec![1.0], vec![-1.0]]).unwrap(),
            // clusters 0 and 2 supported, cluster 1 empty
            transition: TransitionMatrix::from_pairs(3, 2, &[(0, 0), (2, 1)]).unwrap(),
            spec,
            norm: None,
            seed_of_fit: 0,
            reg_config: SomConfig::new(3),
            def_config: SomConfig::new(2),
        };
        // nearest supported prototype to 10.0 is 11.0 (cluster 2)
        assert_eq!(model.effective_cluster(1).unwrap(), 2);
        assert_eq!(model.effective_cluster(0).unwrap(), 0);
        let mut rng = stream_rng(5, 0);
        assert_eq!(model.sample_deformation(1, &mut rng).unwrap(), 1);
        assert!(model.sample_deformation(9, &mut rng).is_err());
    }

    #[test]
    fn history_too_short_is_reported() {
        let model = single_deformation_model(vec![0.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]);
        let history = ts(&[1.0, 2.0]);
        let mut rng = stream_rng(0, 0);
        match simulate_path(&model, &history, 3, &mut rng) {
            Err(Error::SeriesTooShort { needed, .. }) => assert_eq!(needed, 3),
            other => panic!("expected SeriesTooShort, got {other:?}"),
        }
    }

    #[test]
    fn normalized_fit_round_trips_raw_units() {
        let values: Vec<f64> = (0..120).map(|i| 100.0 + (i as f64 * 0.3).sin() * 5.0).collect();
        let series = ts(&values);
        let spec = LagSpec::contiguous(2).unwrap();
        let opts = FitOptions {
            normalize: true,
            seed_of_fit: 11,
        };
        let model = fit_opts(
            &series,
            &spec,
            &SomConfig::new(4).with_seed(1),
            &SomConfig::new(4).with_seed(2),
            &opts,
        )
        .unwrap();
        assert!(model.norm().is_some());
        let ens = monte_carlo(&model, &series, 30, 20, 3).unwrap();
        // raw-unit outputs stay near the raw-value range of the series
        for path in ens.paths() {
            for v in path {
                assert!(*v > 80.0 && *v < 120.0, "value {v} escaped raw range");
            }
        }
    }

    #[test]
    fn model_json_round_trip() {
        let series = alternating(40);
        let spec = LagSpec::contiguous(2).unwrap();
        let model = fit(
            &series,
            &spec,
            &SomConfig::new(2).with_seed(1),
            &SomConfig::new(2).with_seed(2),
        )
        .unwrap();
        let json = model.to_json().unwrap();
        let back = DvqModel::from_json(&json).unwrap();
        assert_eq!(model, back);
        // serialization is deterministic
        assert_eq!(json, back.to_json().unwrap());
    }

    #[test]
    fn model_json_rejects_corruption() {
        let series = alternating(40);
        let spec = LagSpec::contiguous(2).unwrap();
        let model = fit(
            &series,
            &spec,
            &SomConfig::new(2).with_seed(1),
            &SomConfig::new(2).with_seed(2),
        )
        .unwrap();
        let json = model.to_json().unwrap();

        // missing field
        let broken = json.replace("\"transition\"", "\"transitionX\"");
        let err = DvqModel::from_json(&broken).unwrap_err();
        assert!(err.to_string().contains("transition"), "{err}");

        // inconsistent k
        let mut file: serde_json::Value = serde_json::from_str(&json).unwrap();
        file["reg_codebook"]["k"] = serde_json::json!(5);
        let err = DvqModel::from_json(&file.to_string()).unwrap_err();
        assert!(err.to_string().contains("reg_codebook"), "{err}");

        // bad row sum
        let mut file: serde_json::Value = serde_json::from_str(&json).unwrap();
        file["transition"]["rows"][0][0] = serde_json::json!(0.9);
        file["transition"]["rows"][0][1] = serde_json::json!(0.9);
        let err = DvqModel::from_json(&file.to_string()).unwrap_err();
        assert!(err.to_string().contains("sums to"), "{err}");
    }

    #[test]
    fn diagnostics_report_dead_units_and_empty_rows() {
        let series = ts(&[7.0; 40]);
        let spec = LagSpec::contiguous(2).unwrap();
        // constant series: a single distinct regressor, so 3 of 4 units die
        let model = fit(
            &series,
            &spec,
            &SomConfig::new(4).with_seed(1),
            &SomConfig::new(2).with_seed(2),
        )
        .unwrap();
        let diag = diagnostics(&model, &series).unwrap();
        assert_eq!(diag.pairs, 40 - 2);
        assert!(diag.reg_dead_units >= 1);
        assert!(diag.empty_rows >= 1);
        assert_eq!(diag.reg_quantization_error, 0.0);
        assert_eq!(diag.def_quantization_error, 0.0);
    }
}
