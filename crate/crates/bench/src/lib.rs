//! Shared fixtures for the pipeline benchmarks.

use dvq_core::datasets::{generate, Generator};
use dvq_core::series::{build_regressors, LagSpec, TimeSeries};
use dvq_core::som::SomConfig;
use dvq_core::rng::derive_seed;
use dvq_core::DvqModel;

/// Chaotic benchmark series used by all benchmarks.
pub fn benchmark_series(n: usize) -> TimeSeries {
    generate(&Generator::mackey_glass(n, 1)).expect("generator parameters are valid")
}

/// The six-lag spec used in the scalar experiments.
pub fn benchmark_spec() -> LagSpec {
    LagSpec::new(1, vec![0, 1, 2, 3, 5, 6]).expect("valid spec")
}

/// Regressor rows for SOM-level benchmarks.
pub fn benchmark_regressors(n: usize) -> Vec<Vec<f64>> {
    let series = benchmark_series(n);
    build_regressors(&series, &benchmark_spec())
        .expect("series is long enough")
        .rows()
        .to_vec()
}

/// A mid-sized fitted model for simulation benchmarks.
pub fn benchmark_model(n: usize, k: usize) -> (DvqModel, TimeSeries) {
    let series = benchmark_series(n);
    let spec = benchmark_spec();
    let model = dvq_core::dvq::fit(
        &series,
        &spec,
        &SomConfig::new(k).with_seed(derive_seed(1, 1)),
        &SomConfig::new(k).with_seed(derive_seed(1, 2)),
    )
    .expect("fit succeeds on the benchmark series");
    (model, series)
}
