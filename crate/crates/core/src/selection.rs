//! Validation-based selection of the prototype counts `(n1, n2)`.
//!
//! One model is fitted per grid cell on the learning set and scored by the
//! sum of squared errors of its ensemble-mean forecast against the validation
//! set. The winning cell is refitted on the merged learning + validation data
//! to produce the final model. Cells are independent jobs with their own
//! derived RNG streams, so the sweep parallelizes without affecting results.

use rayon::prelude::*;
use serde::Serialize;

use crate::dvq::{fit_opts, monte_carlo, DvqModel, FitOptions};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::series::{LagSpec, TimeSeries};
use crate::som::{Init, Kernel, SomConfig};

// Stream indices for per-cell seed derivation.
const STREAM_REG: u64 = 1;
const STREAM_DEF: u64 = 2;
const STREAM_SCORE: u64 = 3;
const STREAM_REFIT: u64 = 4;

/// SOM hyperparameters without a prototype count; the sweep instantiates one
/// [`SomConfig`] per `(k, seed)`. `radius_start = None` means the `k/4`
/// default.
#[derive(Debug, Clone, PartialEq)]
pub struct SomTemplate {
    pub epochs: usize,
    pub radius_start: Option<f64>,
    pub radius_end: f64,
    pub kernel: Kernel,
    pub init: Init,
}

impl Default for SomTemplate {
    fn default() -> Self {
        Self {
            epochs: 50,
            radius_start: None,
            radius_end: 0.0,
            kernel: Kernel::Gaussian,
            init: Init::Sample,
        }
    }
}

impl SomTemplate {
    pub fn instantiate(&self, k: usize, seed: u64) -> SomConfig {
        SomConfig {
            k,
            epochs: self.epochs,
            radius_start: self.radius_start.unwrap_or(k as f64 / 4.0),
            radius_end: self.radius_end,
            kernel: self.kernel,
            init: self.init,
            seed,
        }
    }
}

/// The `(n1, n2)` grid and the validation-scoring budget.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub n1_values: Vec<usize>,
    pub n2_values: Vec<usize>,
    /// Simulation horizon (in `d`-blocks) for validation scoring.
    pub horizon: usize,
    /// Monte-Carlo paths behind each validation score.
    pub paths: usize,
}

impl SweepGrid {
    fn validate(&self) -> Result<()> {
        if self.n1_values.is_empty() || self.n2_values.is_empty() {
            return Err(Error::InvalidConfig("sweep grid axes must be non-empty".into()));
        }
        if self.n1_values.iter().chain(&self.n2_values).any(|v| *v == 0) {
            return Err(Error::InvalidConfig("prototype counts must be >= 1".into()));
        }
        if self.horizon == 0 || self.paths == 0 {
            return Err(Error::InvalidConfig(
                "sweep horizon and paths must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub n1: usize,
    pub n2: usize,
    /// Validation SSE; infinite when the cell failed to fit.
    pub sse: f64,
    /// `"ok"` or the failure message.
    pub status: String,
    pub reg_dead_units: usize,
    pub def_dead_units: usize,
    pub empty_rows: usize,
}

impl SweepCell {
    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Full sweep surface plus the selected cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    /// Cells in row-major order: `n1` outer, `n2` inner.
    pub cells: Vec<SweepCell>,
    /// Selected `(n1, n2)`.
    pub best: (usize, usize),
    pub n1_values: Vec<usize>,
    pub n2_values: Vec<usize>,
}

impl SweepResult {
    pub fn cell(&self, i1: usize, i2: usize) -> &SweepCell {
        &self.cells[i1 * self.n2_values.len() + i2]
    }

    pub fn best_cell(&self) -> &SweepCell {
        self.cells
            .iter()
            .find(|c| (c.n1, c.n2) == self.best)
            .expect("best always points at an existing cell")
    }

    /// Minimum finite SSE over the surface.
    pub fn best_sse(&self) -> f64 {
        self.best_cell().sse
    }
}

/// Sum of squared errors over all scalar components.
pub fn sse(predicted: &[f64], actual: &[f64]) -> Result<f64> {
    if predicted.len() != actual.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: actual.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::EmptyInput("sse over empty sequences".into()));
    }
    Ok(predicted
        .iter()
        .zip(actual)
        .map(|(p, a)| (a - p) * (a - p))
        .sum())
}

/// Scores a fitted model against a validation segment: simulate `n_paths`
/// from the end of the learning series, take the ensemble mean path, and
/// return its SSE against the first `horizon` blocks of the validation truth.
pub fn validation_score(
    model: &DvqModel,
    learning: &TimeSeries,
    validation: &TimeSeries,
    horizon: usize,
    n_paths: usize,
    seed: u64,
) -> Result<f64> {
    let needed = horizon * model.spec().d();
    if validation.len() < needed {
        return Err(Error::SeriesTooShort {
            name: validation.name().to_string(),
            got: validation.len(),
            needed,
        });
    }
    let ensemble = monte_carlo(model, learning, horizon, n_paths, seed)?;
    let mean = ensemble.mean_path();
    sse(&mean, &validation.values()[..needed])
}

fn fit_cell(
    learning: &TimeSeries,
    spec: &LagSpec,
    n1: usize,
    n2: usize,
    template: &SomTemplate,
    normalize: bool,
    cell_seed: u64,
) -> Result<DvqModel> {
    let cfg_x = template.instantiate(n1, derive_seed(cell_seed, STREAM_REG));
    let cfg_y = template.instantiate(n2, derive_seed(cell_seed, STREAM_DEF));
    let opts = FitOptions {
        normalize,
        seed_of_fit: cell_seed,
    };
    fit_opts(learning, spec, &cfg_x, &cfg_y, &opts)
}

/// Fits and scores one model per `(n1, n2)` cell. Cells that fail to fit are
/// recorded with infinite SSE and the failure message instead of aborting the
/// sweep. Progress is reported through `progress` (cell index, cell count).
#[allow(clippy::too_many_arguments)]
pub fn sweep_with_progress(
    learning: &TimeSeries,
    validation: &TimeSeries,
    spec: &LagSpec,
    grid: &SweepGrid,
    template: &SomTemplate,
    normalize: bool,
    seed: u64,
    progress: impl Fn(usize, usize) + Sync,
) -> Result<SweepResult> {
    grid.validate()?;
    let cells_in: Vec<(usize, usize)> = grid
        .n1_values
        .iter()
        .flat_map(|&n1| grid.n2_values.iter().map(move |&n2| (n1, n2)))
        .collect();
    let total = cells_in.len();
    let counter = std::sync::atomic::AtomicUsize::new(0);

    let cells: Vec<SweepCell> = cells_in
        .par_iter()
        .map(|&(n1, n2)| {
            let cell_seed = derive_seed(derive_seed(seed, n1 as u64), n2 as u64);
            let outcome = fit_cell(learning, spec, n1, n2, template, normalize, cell_seed)
                .and_then(|model| {
                    let score = validation_score(
                        &model,
                        learning,
                        validation,
                        grid.horizon,
                        grid.paths,
                        derive_seed(cell_seed, STREAM_SCORE),
                    )?;
                    let diag = crate::dvq::diagnostics(&model, learning)?;
                    Ok((score, diag))
                });
            let cell = match outcome {
                Ok((score, diag)) => SweepCell {
                    n1,
                    n2,
                    sse: score,
                    status: "ok".to_string(),
                    reg_dead_units: diag.reg_dead_units,
                    def_dead_units: diag.def_dead_units,
                    empty_rows: diag.empty_rows,
                },
                Err(e) => SweepCell {
                    n1,
                    n2,
                    sse: f64::INFINITY,
                    status: format!("failed: {e}"),
                    reg_dead_units: 0,
                    def_dead_units: 0,
                    empty_rows: 0,
                },
            };
            let done = counter.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
            progress(done, total);
            cell
        })
        .collect();

    let best = cells
        .iter()
        .filter(|c| c.sse.is_finite())
        .min_by(|a, b| {
            // minimum SSE; ties broken by smaller n1+n2, then smaller n1
            (a.sse, a.n1 + a.n2, a.n1)
                .partial_cmp(&(b.sse, b.n1 + b.n2, b.n1))
                .expect("finite SSE values are comparable")
        })
        .map(|c| (c.n1, c.n2))
        .ok_or(Error::SweepFailed { cells: total })?;

    Ok(SweepResult {
        cells,
        best,
        n1_values: grid.n1_values.clone(),
        n2_values: grid.n2_values.clone(),
    })
}

/// [`sweep_with_progress`] without progress reporting.
pub fn sweep(
    learning: &TimeSeries,
    validation: &TimeSeries,
    spec: &LagSpec,
    grid: &SweepGrid,
    template: &SomTemplate,
    normalize: bool,
    seed: u64,
) -> Result<SweepResult> {
    sweep_with_progress(
        learning, validation, spec, grid, template, normalize, seed, |_, _| {},
    )
}

/// Single fit of the selected `(n1, n2)` on the reassembled learning +
/// validation data; this is the model used for test-set evaluation.
pub fn refit_best(
    learning: &TimeSeries,
    validation: &TimeSeries,
    spec: &LagSpec,
    best: (usize, usize),
    template: &SomTemplate,
    normalize: bool,
    seed: u64,
) -> Result<DvqModel> {
    let merged = learning.concat(validation);
    let refit_seed = derive_seed(seed, STREAM_REFIT);
    fit_cell(&merged, spec, best.0, best.1, template, normalize, refit_seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dvq::fit;

    fn ts(values: &[f64]) -> TimeSeries {
        TimeSeries::new("test", values.to_vec()).unwrap()
    }

    fn alternating(n: usize) -> TimeSeries {
        ts(&(0..n).map(|i| (i % 2) as f64).collect::<Vec<_>>())
    }

    fn zero_deformation_model(p: usize, level: f64) -> DvqModel {
        // constant series at `level` fitted with k = 1 in both spaces
        let series = ts(&vec![level; p * 4 + 4]);
        let spec = LagSpec::contiguous(p).unwrap();
        fit(
            &series,
            &spec,
            &SomConfig::new(1).with_seed(1),
            &SomConfig::new(1).with_seed(2),
        )
        .unwrap()
    }

    #[test]
    fn sse_basics() {
        assert_eq!(sse(&[1.0, 2.0], &[1.0, 3.0]).unwrap(), 1.0);
        assert_eq!(sse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(sse(&[0.0, 0.0, 0.0], &[1.0, 2.0, 3.0]).unwrap(), 14.0);
        assert!(sse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(sse(&[], &[]).is_err());
    }

    #[test]
    fn validation_score_zero_on_constant_truth() {
        let model = zero_deformation_model(2, 5.0);
        let learning = ts(&[5.0; 10]);
        let validation = ts(&[5.0; 10]);
        let score = validation_score(&model, &learning, &validation, 10, 4, 0).unwrap();
        assert_eq!(score, 0.0);
    }

    #[test]
    fn validation_score_ramp_closed_form() {
        // zero-deformation forecast from constant history c against ramp
        // truth c+1..c+h has SSE = sum s^2 = h(h+1)(2h+1)/6
        let c = 5.0;
        let h = 12usize;
        let model = zero_deformation_model(2, c);
        let learning = ts(&[c; 10]);
        let truth: Vec<f64> = (1..=h).map(|s| c + s as f64).collect();
        let validation = ts(&truth);
        let score = validation_score(&model, &learning, &validation, h, 4, 0).unwrap();
        let closed_form = (h * (h + 1) * (2 * h + 1)) as f64 / 6.0;
        assert!((score - closed_form).abs() < 1e-9);
    }

    #[test]
    fn validation_requires_enough_truth() {
        let model = zero_deformation_model(2, 1.0);
        let learning = ts(&[1.0; 10]);
        let validation = ts(&[1.0; 5]);
        assert!(validation_score(&model, &learning, &validation, 10, 4, 0).is_err());
    }

    #[test]
    fn single_cell_sweep() {
        let series = alternating(60);
        let (learning, validation, _test) =
            crate::series::split_chronological(&series, 0.6, 0.2, 0.2).unwrap();
        let spec = LagSpec::contiguous(2).unwrap();
        let grid = SweepGrid {
            n1_values: vec![1],
            n2_values: vec![1],
            horizon: 8,
            paths: 10,
        };
        let result = sweep(
            &learning,
            &validation,
            &spec,
            &grid,
            &SomTemplate::default(),
            false,
            7,
        )
        .unwrap();
        assert_eq!(result.cells.len(), 1);
        assert_eq!(result.best, (1, 1));
    }

    #[test]
    fn alternating_series_selects_exact_two_cluster_model() {
        let series = alternating(100);
        let (learning, validation, _test) =
            crate::series::split_chronological(&series, 0.6, 0.2, 0.2).unwrap();
        let spec = LagSpec::contiguous(2).unwrap();
        let grid = SweepGrid {
            n1_values: vec![2, 4],
            n2_values: vec![2, 4],
            horizon: 10,
            paths: 10,
        };
        let result = sweep(
            &learning,
            &validation,
            &spec,
            &grid,
            &SomTemplate::default(),
            false,
            3,
        )
        .unwrap();
        // the 2-cluster model reproduces the alternation exactly; the tie
        // rule picks the smallest grid cell among zero-SSE models
        assert_eq!(result.best, (2, 2));
        assert_eq!(result.best_sse(), 0.0);
        assert_eq!(result.cells.len(), 4);
        assert!(result.cells.iter().all(|c| c.is_ok()));
    }

    #[test]
    fn sweep_is_deterministic() {
        let series = alternating(80);
        let (learning, validation, _t) =
            crate::series::split_chronological(&series, 0.6, 0.2, 0.2).unwrap();
        let spec = LagSpec::contiguous(2).unwrap();
        let grid = SweepGrid {
            n1_values: vec![1, 2],
            n2_values: vec![1, 2],
            horizon: 6,
            paths: 8,
        };
        let tpl = SomTemplate::default();
        let a = sweep(&learning, &validation, &spec, &grid, &tpl, false, 42).unwrap();
        let b = sweep(&learning, &validation, &spec, &grid, &tpl, false, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn failed_cells_are_recorded_not_fatal() {
        // learning segment so short that large k still fits but a huge
        // horizon makes validation fail for every cell -> sweep error;
        // a feasible horizon keeps the surface complete
        let series = alternating(40);
        let (learning, validation, _t) =
            crate::series::split_chronological(&series, 0.5, 0.3, 0.2).unwrap();
        let spec = LagSpec::contiguous(2).unwrap();
        let bad_grid = SweepGrid {
            n1_values: vec![1],
            n2_values: vec![1],
            horizon: 100, // validation has only 12 values
            paths: 4,
        };
        let err = sweep(
            &learning,
            &validation,
            &spec,
            &bad_grid,
            &SomTemplate::default(),
            false,
            0,
        );
        assert!(matches!(err, Err(Error::SweepFailed { .. })));
    }

    #[test]
    fn refit_is_deterministic_and_uses_merged_data() {
        let series = alternating(100);
        let (learning, validation, _t) =
            crate::series::split_chronological(&series, 0.6, 0.2, 0.2).unwrap();
        let spec = LagSpec::contiguous(2).unwrap();
        let tpl = SomTemplate::default();
        let a = refit_best(&learning, &validation, &spec, (2, 2), &tpl, false, 5).unwrap();
        let b = refit_best(&learning, &validation, &spec, (2, 2), &tpl, false, 5).unwrap();
        assert_eq!(a, b);
        // transition counts reflect learning + validation pairs: the merged
        // series has n - p deformations
        let total: u64 = a.transition().row_support().iter().sum();
        assert_eq!(total as usize, learning.len() + validation.len() - spec.dim());
    }

    #[test]
    fn degenerate_model_never_beats_exact_model() {
        let series = alternating(100);
        let (learning, validation, _t) =
            crate::series::split_chronological(&series, 0.6, 0.2, 0.2).unwrap();
        let spec = LagSpec::contiguous(2).unwrap();
        let tpl = SomTemplate::default();
        let exact = refit_best(&learning, &validation, &spec, (2, 2), &tpl, false, 5).unwrap();
        let degenerate = refit_best(&learning, &validation, &spec, (1, 1), &tpl, false, 5).unwrap();
        // score both on the validation segment from the learning history
        let s_exact =
            validation_score(&exact, &learning, &validation, 10, 20, 1).unwrap();
        let s_degenerate =
            validation_score(&degenerate, &learning, &validation, 10, 20, 1).unwrap();
        assert!(s_degenerate >= s_exact);
        assert_eq!(s_exact, 0.0);
    }

    #[test]
    fn template_instantiation_uses_k_dependent_default_radius() {
        let tpl = SomTemplate::default();
        let cfg = tpl.instantiate(40, 9);
        assert_eq!(cfg.radius_start, 10.0);
        assert_eq!(cfg.k, 40);
        assert_eq!(cfg.seed, 9);
        let tpl = SomTemplate {
            radius_start: Some(3.0),
            ..SomTemplate::default()
        };
        assert_eq!(tpl.instantiate(40, 9).radius_start, 3.0);
    }

    #[test]
    fn mean_path_matches_manual_average() {
        // guard the scoring path: mean over a hand-built ensemble
        let spec = LagSpec::contiguous(1).unwrap();
        let model = DvqModel::from_json(
            &serde_json::json!({
                "format_version": 1,
                "spec": {"d": spec.d(), "offsets": spec.offsets()},
                "norm": null,
                "reg_codebook": {
                    "k": 1, "p": 1, "prototypes": [[0.0]],
                    "som_config": SomConfig::new(1)
                },
                "def_codebook": {
                    "k": 2, "p": 1, "prototypes": [[1.0], [-1.0]],
                    "som_config": SomConfig::new(2)
                },
                "transition": {
                    "counts": [[1, 1]],
                    "rows": [[0.5, 0.5]],
                    "row_support": [2]
                },
                "seed_of_fit": 0
            })
            .to_string(),
        )
        .unwrap();
        let history = ts(&[0.0]);
        let ens = monte_carlo(&model, &history, 4, 64, 123).unwrap();
        let mean = ens.mean_path();
        for (s, m) in mean.iter().enumerate() {
            let manual: f64 =
                ens.paths().iter().map(|p| p[s]).sum::<f64>() / ens.len() as f64;
            assert_eq!(*m, manual);
        }
    }
}
