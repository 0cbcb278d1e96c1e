//! `dvq`: fit, select, simulate and diagnose double-vector-quantization
//! forecasting models from the command line.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 data error, 3 internal
//! failure. Every command is reproducible: outputs are a pure function of
//! (configuration, input files, master seed), independent of `--jobs`.

mod args;
mod config;
mod output;
mod svg;

use clap::Parser;
use std::path::{Path, PathBuf};

use dvq_core::datasets::{self, Generator};
use dvq_core::dvq::{diagnostics, fit_opts, monte_carlo, summarize, FitOptions};
use dvq_core::rng::derive_seed;
use dvq_core::selection::{refit_best, sweep_with_progress, SomTemplate, SweepGrid};
use dvq_core::series::{split_chronological, split_counts, LagSpec, TimeSeries};
use dvq_core::som::Init;
use dvq_core::stability::{
    boundedness_check, check_negative_drift_assumption, stationary_occupancy, total_variation,
    DriftStatus, DEFAULT_DRIFT_SCALES,
};
use dvq_core::{DvqModel, Error as CoreError};

use args::{Cli, Command, GenKind, InitKind, InputArgs, LagArgs, SomArgs};
use config::{FileConfig, InputConfig, LagConfig, SomFileConfig};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

/// Error carrying its process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::InvalidConfig(_)
            | CoreError::InvalidLagSpec(_)
            | CoreError::InvalidSplit(_) => EXIT_USAGE,
            CoreError::SeriesTooShort { .. }
            | CoreError::NonFiniteValue { .. }
            | CoreError::EmptySeries
            | CoreError::EmptyInput(_)
            | CoreError::DimensionMismatch { .. }
            | CoreError::ZeroVariance
            | CoreError::LengthMismatch { .. }
            | CoreError::CsvParse { .. }
            | CoreError::NoTransitions
            | CoreError::SweepFailed { .. }
            | CoreError::ModelFormat(_)
            | CoreError::Io(_)
            | CoreError::Json(_) => EXIT_DATA,
            CoreError::UnsupportedRow { .. }
            | CoreError::ClusterOutOfRange { .. }
            | CoreError::NonFiniteSimulation { .. } => EXIT_INTERNAL,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: EXIT_DATA,
            message: e.to_string(),
        }
    }
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's rendered help/usage text, but with our exit-code contract
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

struct Common {
    seed: u64,
    out_dir: PathBuf,
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let file = FileConfig::load(cli.config.as_deref())?;
    let common = Common {
        seed: cli.seed.or(file.seed).unwrap_or(0),
        out_dir: cli
            .out_dir
            .clone()
            .or_else(|| file.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out")),
    };
    if let Some(jobs) = cli.jobs.or(file.jobs) {
        if jobs == 0 {
            return Err(CliError::usage("--jobs must be >= 1"));
        }
        // per-path/per-cell seed streams keep results identical at any size
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    match cli.command {
        Command::Generate(a) => cmd_generate(a, &file, &common),
        Command::Fit(a) => cmd_fit(a, &file, &common),
        Command::Sweep(a) => cmd_sweep(a, &file, &common),
        Command::Forecast(a) => cmd_forecast(a, &file, &common),
        Command::Stability(a) => cmd_stability(a, &file, &common),
    }
}

// --- shared resolution ----------------------------------------------------

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<T>()
                .map_err(|_| CliError::usage(format!("cannot parse `{part}` in {what}")))
        })
        .collect()
}

/// Grid grammar: `start:end:step` (inclusive), a comma list, or one value.
fn parse_grid(text: &str) -> Result<Vec<usize>, CliError> {
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::usage(format!(
                "grid `{text}` must be start:end:step"
            )));
        }
        let nums: Vec<usize> = parts
            .iter()
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::usage(format!("cannot parse `{p}` in grid `{text}`")))
            })
            .collect::<Result<_, _>>()?;
        let (start, end, step) = (nums[0], nums[1], nums[2]);
        if start == 0 || step == 0 || end < start {
            return Err(CliError::usage(format!(
                "grid `{text}` needs start >= 1, step >= 1, end >= start"
            )));
        }
        Ok((start..=end).step_by(step).collect())
    } else {
        let values = parse_list::<usize>(text, "grid")?;
        if values.is_empty() || values.contains(&0) {
            return Err(CliError::usage(format!("grid `{text}` must be positive")));
        }
        Ok(values)
    }
}

fn gen_kind_from_str(s: &str) -> Result<GenKind, CliError> {
    match s.replace('-', "_").as_str() {
        "mackey_glass" => Ok(GenKind::MackeyGlass),
        "logistic" => Ok(GenKind::Logistic),
        "sine_noise" => Ok(GenKind::SineNoise),
        "synthetic_load" => Ok(GenKind::SyntheticLoad),
        other => Err(CliError::usage(format!("unknown generator kind `{other}`"))),
    }
}

fn build_generator(
    kind: GenKind,
    length: usize,
    seed: u64,
    a: &InputArgs,
    c: &InputConfig,
) -> Generator {
    let pick = |flag: Option<f64>, file: Option<f64>, default: f64| flag.or(file).unwrap_or(default);
    match kind {
        GenKind::MackeyGlass => Generator::MackeyGlass {
            length,
            seed,
            tau: pick(a.tau, c.tau, 17.0),
            beta: pick(a.beta, c.beta, 0.2),
            gamma: pick(a.gamma, c.gamma, 0.1),
            exponent: pick(a.exponent, c.exponent, 10.0),
        },
        GenKind::Logistic => Generator::Logistic {
            length,
            seed,
            r: pick(a.r, c.r, 4.0),
            x0: a.x0.or(c.x0),
        },
        GenKind::SineNoise => Generator::SineNoise {
            length,
            seed,
            period: pick(a.period, c.period, 50.0),
            amplitude: pick(a.amplitude, c.amplitude, 1.0),
            noise: pick(a.noise, c.noise, 0.0),
        },
        GenKind::SyntheticLoad => Generator::SyntheticLoad {
            length,
            seed,
            base: pick(a.base, c.base, 100.0),
            daily_amplitude: pick(a.daily_amplitude, c.daily_amplitude, 20.0),
            weekly_amplitude: pick(a.weekly_amplitude, c.weekly_amplitude, 0.3),
            trend: pick(a.trend, c.trend, 0.0),
            noise: pick(a.noise, c.noise, 2.0),
        },
    }
}

fn resolve_generator(
    a: &InputArgs,
    c: &InputConfig,
    seed: u64,
) -> Result<Generator, CliError> {
    let kind = match (a.kind, c.kind.as_deref()) {
        (Some(kind), _) => kind,
        (None, Some(name)) => gen_kind_from_str(name)?,
        (None, None) => {
            return Err(CliError::usage(
                "no input: give --input FILE or --kind KIND --length N",
            ))
        }
    };
    let length = a
        .length
        .or(c.length)
        .ok_or_else(|| CliError::usage("generator needs --length"))?;
    Ok(build_generator(kind, length, seed, a, c))
}

/// Input series: `--input` file wins, then an inline generator. The
/// generator is seeded with the master seed, so `generate` + `fit --input`
/// and a direct `fit --kind ...` agree.
fn resolve_series(a: &InputArgs, c: &InputConfig, seed: u64) -> Result<TimeSeries, CliError> {
    if let Some(path) = a.input.as_ref().or(c.file.as_ref()) {
        return Ok(datasets::load_csv(path)?);
    }
    Ok(datasets::generate(&resolve_generator(a, c, seed)?)?)
}

fn resolve_lag(a: &LagArgs, c: &LagConfig) -> Result<LagSpec, CliError> {
    let offsets = match (&a.lag_offsets, &c.offsets) {
        (Some(text), _) => parse_list::<usize>(text, "--lag-offsets")?,
        (None, Some(list)) => list.clone(),
        (None, None) => {
            return Err(CliError::usage(
                "lag structure required: --lag-offsets (e.g. 0,1,2) or [lag] offsets in the config",
            ))
        }
    };
    let d = a.lag_d.or(c.d).unwrap_or(1);
    Ok(LagSpec::new(d, offsets)?)
}

struct SomSettings {
    template: SomTemplate,
    normalize: bool,
}

fn resolve_som(a: &SomArgs, c: &SomFileConfig) -> Result<SomSettings, CliError> {
    let defaults = SomTemplate::default();
    let init = match (a.init, c.init.as_deref()) {
        (Some(InitKind::Sample), _) => Init::Sample,
        (Some(InitKind::PcaLine), _) => Init::PcaLine,
        (None, Some("sample")) => Init::Sample,
        (None, Some("pca_line")) => Init::PcaLine,
        (None, Some(other)) => {
            return Err(CliError::usage(format!("unknown som init `{other}`")))
        }
        (None, None) => defaults.init,
    };
    Ok(SomSettings {
        template: SomTemplate {
            epochs: a.epochs.or(c.epochs).unwrap_or(defaults.epochs),
            radius_start: a.radius_start.or(c.radius_start),
            radius_end: a.radius_end.or(c.radius_end).unwrap_or(defaults.radius_end),
            kernel: defaults.kernel,
            init,
        },
        normalize: a.normalize || c.normalize.unwrap_or(false),
    })
}

fn write_model_and_report(
    model: &DvqModel,
    series: &TimeSeries,
    out_dir: &Path,
) -> Result<(PathBuf, PathBuf), CliError> {
    let diag = diagnostics(model, series)?;
    let model_path = out_dir.join("model.json");
    output::atomic_write(&model_path, &model.to_json()?)?;

    let report = serde_json::json!({
        "n1": model.reg_codebook().k(),
        "n2": model.def_codebook().k(),
        "regressor_dim": model.spec().dim(),
        "pairs": diag.pairs,
        "reg_quantization_error": diag.reg_quantization_error,
        "def_quantization_error": diag.def_quantization_error,
        "reg_dead_units": diag.reg_dead_units,
        "def_dead_units": diag.def_dead_units,
        "empty_rows": diag.empty_rows,
    });
    let report_path = out_dir.join("fit_report.json");
    output::atomic_write(&report_path, &serde_json::to_string_pretty(&report).unwrap())?;
    Ok((model_path, report_path))
}

// --- commands ---------------------------------------------------------------

fn cmd_generate(a: args::GenerateArgs, file: &FileConfig, common: &Common) -> Result<(), CliError> {
    if a.input.input.is_some() {
        return Err(CliError::usage("generate produces a series; --input is not applicable"));
    }
    let generator = resolve_generator(&a.input, &file.input, common.seed)?;
    let series = datasets::generate(&generator)?;
    let path = a
        .out
        .unwrap_or_else(|| common.out_dir.join("series.csv"));
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("csv.tmp");
    datasets::save_csv(&series, &tmp)?;
    std::fs::rename(&tmp, &path)?;
    println!(
        "wrote {} ({} values, seed {})",
        path.display(),
        series.len(),
        common.seed
    );
    Ok(())
}

fn cmd_fit(a: args::FitArgs, file: &FileConfig, common: &Common) -> Result<(), CliError> {
    let series = resolve_series(&a.input, &file.input, common.seed)?;
    let spec = resolve_lag(&a.lag, &file.lag)?;
    let som = resolve_som(&a.som, &file.som)?;
    let n1 = a
        .n1
        .or(file.som.n1)
        .ok_or_else(|| CliError::usage("--n1 is required for fit"))?;
    let n2 = a
        .n2
        .or(file.som.n2)
        .ok_or_else(|| CliError::usage("--n2 is required for fit"))?;

    let cfg_x = som.template.instantiate(n1, derive_seed(common.seed, 1));
    let cfg_y = som.template.instantiate(n2, derive_seed(common.seed, 2));
    let opts = FitOptions {
        normalize: som.normalize,
        seed_of_fit: common.seed,
    };
    let model = fit_opts(&series, &spec, &cfg_x, &cfg_y, &opts)?;
    let (model_path, report_path) = write_model_and_report(&model, &series, &common.out_dir)?;
    let diag = diagnostics(&model, &series)?;
    println!(
        "fitted ({n1}, {n2}) on {} values (p = {}): {} pairs, {} empty rows, dead units {}/{}",
        series.len(),
        spec.dim(),
        diag.pairs,
        diag.empty_rows,
        diag.reg_dead_units,
        diag.def_dead_units
    );
    println!("model:  {}", model_path.display());
    println!("report: {}", report_path.display());
    Ok(())
}

fn resolve_split(
    a: &args::SweepArgs,
    file: &FileConfig,
    series: &TimeSeries,
) -> Result<(TimeSeries, TimeSeries, TimeSeries), CliError> {
    if let Some(text) = &a.split_counts {
        let counts = parse_list::<usize>(text, "--split-counts")?;
        if counts.len() != 3 {
            return Err(CliError::usage("--split-counts needs learn,valid,test"));
        }
        return Ok(split_counts(series, counts[0], counts[1], counts[2])?);
    }
    if let Some(text) = &a.split {
        let f = parse_list::<f64>(text, "--split")?;
        if f.len() != 3 {
            return Err(CliError::usage("--split needs learn,valid,test fractions"));
        }
        return Ok(split_chronological(series, f[0], f[1], f[2])?);
    }
    if let Some(counts) = &file.split.counts {
        if counts.len() != 3 {
            return Err(CliError::usage("[split] counts needs three entries"));
        }
        return Ok(split_counts(series, counts[0], counts[1], counts[2])?);
    }
    if let Some(f) = &file.split.fractions {
        if f.len() != 3 {
            return Err(CliError::usage("[split] fractions needs three entries"));
        }
        return Ok(split_chronological(series, f[0], f[1], f[2])?);
    }
    Ok(split_chronological(series, 0.6, 0.2, 0.2)?)
}

fn cmd_sweep(a: args::SweepArgs, file: &FileConfig, common: &Common) -> Result<(), CliError> {
    let series = resolve_series(&a.input, &file.input, common.seed)?;
    let spec = resolve_lag(&a.lag, &file.lag)?;
    let som = resolve_som(&a.som, &file.som)?;
    let (learning, validation, _test) = resolve_split(&a, file, &series)?;

    let n1_text = a
        .n1_grid
        .clone()
        .or_else(|| file.sweep.n1_grid.clone())
        .ok_or_else(|| CliError::usage("--n1-grid is required for sweep"))?;
    let n2_text = a
        .n2_grid
        .clone()
        .or_else(|| file.sweep.n2_grid.clone())
        .ok_or_else(|| CliError::usage("--n2-grid is required for sweep"))?;
    let grid = SweepGrid {
        n1_values: parse_grid(&n1_text)?,
        n2_values: parse_grid(&n2_text)?,
        horizon: a.horizon.or(file.sweep.horizon).unwrap_or(100),
        paths: a.paths.or(file.sweep.paths).unwrap_or(100),
    };

    let result = sweep_with_progress(
        &learning,
        &validation,
        &spec,
        &grid,
        &som.template,
        som.normalize,
        common.seed,
        |done, total| eprintln!("sweep: cell {done}/{total}"),
    )?;
    let model = refit_best(
        &learning,
        &validation,
        &spec,
        result.best,
        &som.template,
        som.normalize,
        common.seed,
    )?;

    let csv_path = common.out_dir.join("sweep.csv");
    output::atomic_write(&csv_path, &output::sweep_csv(&result))?;
    let svg_path = common.out_dir.join("sweep.svg");
    output::atomic_write(
        &svg_path,
        &svg::heatmap_svg(&result, "validation SSE over (n1, n2)"),
    )?;
    let merged = learning.concat(&validation);
    let (model_path, report_path) = write_model_and_report(&model, &merged, &common.out_dir)?;

    let best = result.best_cell();
    println!(
        "best model: n1 = {}, n2 = {} (validation SSE {})",
        best.n1, best.n2, best.sse
    );
    println!("surface: {}", csv_path.display());
    println!("heatmap: {}", svg_path.display());
    println!("model:   {} (refit on learning + validation)", model_path.display());
    println!("report:  {}", report_path.display());
    Ok(())
}

fn cmd_forecast(a: args::ForecastArgs, file: &FileConfig, common: &Common) -> Result<(), CliError> {
    let model = DvqModel::load(&a.model)?;
    let history = resolve_series(&a.input, &file.input, common.seed)?;
    let horizon = a.horizon.or(file.forecast.horizon).unwrap_or(100);
    let paths = a.paths.or(file.forecast.paths).unwrap_or(1000);
    let levels = match (&a.levels, &file.forecast.levels) {
        (Some(text), _) => {
            let l = parse_list::<f64>(text, "--levels")?;
            if l.len() != 2 {
                return Err(CliError::usage("--levels needs lower,upper"));
            }
            (l[0], l[1])
        }
        (None, Some(l)) if l.len() == 2 => (l[0], l[1]),
        (None, Some(_)) => return Err(CliError::usage("[forecast] levels needs two entries")),
        (None, None) => (0.025, 0.975),
    };

    let ensemble = monte_carlo(&model, &history, horizon, paths, common.seed)?;
    let summary = summarize(&ensemble, levels)?;

    let truth = match a.truth.as_ref().or(file.forecast.truth.as_ref()) {
        Some(path) => {
            let series = datasets::load_csv(path)?;
            let needed = summary.steps();
            if series.len() < needed {
                return Err(CliError::usage(format!(
                    "truth file {} has {} values but the forecast spans {needed}",
                    path.display(),
                    series.len()
                )));
            }
            Some(series.values()[..needed].to_vec())
        }
        None => None,
    };

    let ensemble_path = common.out_dir.join("ensemble.csv");
    output::atomic_write(&ensemble_path, &output::ensemble_csv(&ensemble))?;
    let summary_path = common.out_dir.join("summary.csv");
    output::atomic_write(&summary_path, &output::summary_csv(&summary))?;
    let svg_path = common.out_dir.join("forecast.svg");
    let title = format!(
        "{} paths, horizon {}{}",
        paths,
        horizon,
        if model.spec().d() > 1 {
            format!(" x {} values", model.spec().d())
        } else {
            String::new()
        }
    );
    output::atomic_write(
        &svg_path,
        &svg::trend_svg(&summary, truth.as_deref(), &title),
    )?;

    let steps = summary.steps();
    println!(
        "simulated {} paths to horizon {} ({} scalar steps)",
        paths, horizon, steps
    );
    println!(
        "final step: mean {:.6}, band [{:.6}, {:.6}]",
        summary.mean[steps - 1],
        summary.lower[steps - 1],
        summary.upper[steps - 1]
    );
    println!("ensemble: {}", ensemble_path.display());
    println!("summary:  {}", summary_path.display());
    println!("chart:    {}", svg_path.display());
    Ok(())
}

fn cmd_stability(a: args::StabilityArgs, file: &FileConfig, common: &Common) -> Result<(), CliError> {
    let model = DvqModel::load(&a.model)?;
    let history = resolve_series(&a.input, &file.input, common.seed)?;
    let scales = match (&a.scales, &file.stability.scales) {
        (Some(text), _) => parse_list::<f64>(text, "--scales")?,
        (None, Some(list)) => list.clone(),
        (None, None) => DEFAULT_DRIFT_SCALES.to_vec(),
    };
    let steps = a.steps.or(file.stability.steps).unwrap_or(100_000);
    let paths = a.paths.or(file.stability.paths).unwrap_or(200);
    let horizon = a.horizon.or(file.stability.horizon).unwrap_or(500);
    let margin = a.margin.or(file.stability.margin).unwrap_or(0.5);

    let drift_report = check_negative_drift_assumption(&model, &scales)?;
    let ensemble = monte_carlo(&model, &history, horizon, paths, derive_seed(common.seed, 10))?;
    let training_range = (history.min(), history.max());
    let fraction_outside = boundedness_check(&ensemble, training_range, margin);
    let occupancy = stationary_occupancy(&model, &history, steps, margin, derive_seed(common.seed, 11))?;
    let repeat = stationary_occupancy(&model, &history, steps, margin, derive_seed(common.seed, 12))?;
    let tv = total_variation(&occupancy.frequencies, &repeat.frequencies);

    let json = serde_json::json!({
        "drift": drift_report,
        "boundedness": {
            "fraction_outside": fraction_outside,
            "margin": margin,
            "training_min": training_range.0,
            "training_max": training_range.1,
            "paths": paths,
            "horizon": horizon,
        },
        "occupancy": occupancy,
        "occupancy_repeat": repeat,
        "occupancy_tv_distance": tv,
    });
    let json_path = common.out_dir.join("stability.json");
    output::atomic_write(&json_path, &serde_json::to_string_pretty(&json).unwrap())?;

    // human-readable table
    println!("drift assumption check (probe scales {scales:?})");
    println!("  cluster  boundary  E(|Y|^2)      drift@max     status");
    for cluster in &drift_report.clusters {
        let (drift_at_max, status) = match cluster.status {
            DriftStatus::Interior => ("-".to_string(), "interior"),
            DriftStatus::Pass => (
                format!("{:.6}", cluster.probes.last().unwrap().drift),
                "PASS",
            ),
            DriftStatus::Warn => (
                format!("{:.6}", cluster.probes.last().unwrap().drift),
                "WARN",
            ),
        };
        println!(
            "  {:<8} {:<9} {:<13.6} {:<13} {}",
            cluster.cluster,
            if cluster.boundary { "yes" } else { "no" },
            cluster.expected_sq_norm,
            drift_at_max,
            status
        );
    }
    let warned = drift_report.warned();
    if warned.is_empty() {
        println!("  all boundary clusters PASS");
    } else {
        println!("  WARN clusters: {warned:?}");
    }
    println!(
        "boundedness: {:.4}% of {} simulated values outside training range +/- {:.0}% ({} paths, horizon {})",
        fraction_outside * 100.0,
        paths * horizon * model.spec().d(),
        margin * 100.0,
        paths,
        horizon
    );
    println!(
        "occupancy: {} steps, outside fraction {:.6}, TV distance between two runs {:.6}",
        steps, occupancy.outside_fraction, tv
    );
    println!("report: {}", json_path.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::parse_grid;

    #[test]
    fn grid_range_grammar() {
        // the full-scale protocol grid: 5..=200 by 5 is 40 values per axis
        let grid = parse_grid("5:200:5").unwrap();
        assert_eq!(grid.len(), 40);
        assert_eq!(grid[0], 5);
        assert_eq!(grid[39], 200);
        assert_eq!(parse_grid("10:60:10").unwrap(), vec![10, 20, 30, 40, 50, 60]);
        // inclusive end only when the step lands on it
        assert_eq!(parse_grid("1:10:4").unwrap(), vec![1, 5, 9]);
    }

    #[test]
    fn grid_list_and_single() {
        assert_eq!(parse_grid("2,4").unwrap(), vec![2, 4]);
        assert_eq!(parse_grid("7").unwrap(), vec![7]);
    }

    #[test]
    fn grid_rejects_invalid() {
        assert!(parse_grid("0:10:2").is_err());
        assert!(parse_grid("5:2:1").is_err());
        assert!(parse_grid("5:10:0").is_err());
        assert!(parse_grid("a,b").is_err());
        assert!(parse_grid("1:2").is_err());
    }
}
