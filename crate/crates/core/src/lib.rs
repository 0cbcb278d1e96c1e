//! Double vector quantization for long-term time-series trend forecasting.
//!
//! The method characterizes a series by quantizing two spaces with
//! one-dimensional Kohonen strings: the space of lag regressors and the space
//! of their step-to-step deformations. An empirical transition matrix links
//! regressor clusters to deformation clusters. Forecasts are stochastic
//! simulations: at each step the current regressor is matched to its nearest
//! regressor prototype, a deformation prototype is drawn from that row of the
//! transition matrix, and the sum yields the next regressor. Repeating the
//! simulation Monte-Carlo style gives an ensemble from which long-horizon
//! trend statistics (mean path, variance, confidence bands) are estimated.
//!
//! Modules:
//! - [`series`]: series container, lag specs, regressor/deformation
//!   construction, chronological splits, normalization.
//! - [`som`]: 1-D string SOM (batch training, BMU lookup, diagnostics).
//! - [`dvq`]: the double-quantization model, simulation engine and ensemble
//!   statistics.
//! - [`selection`]: validation-based (n1, n2) sweep and refit.
//! - [`stability`]: drift diagnostics, boundedness and occupancy checks.
//! - [`datasets`]: synthetic benchmark generators and CSV I/O.
//!
//! Reproducibility: all randomness flows through ChaCha8 generators seeded
//! via the SplitMix64 derivation in [`rng`]; results are bit-identical for a
//! fixed master seed regardless of thread count.
//!
//! # Example
//!
//! ```
//! use dvq_core::datasets::{generate, Generator};
//! use dvq_core::dvq::{fit, monte_carlo, summarize};
//! use dvq_core::series::LagSpec;
//! use dvq_core::som::SomConfig;
//!
//! // a chaotic benchmark series and a three-lag regressor
//! let series = generate(&Generator::mackey_glass(1200, 1))?;
//! let spec = LagSpec::new(1, vec![0, 1, 2])?;
//!
//! // quantize regressors and deformations, estimate the transition matrix
//! let model = fit(
//!     &series,
//!     &spec,
//!     &SomConfig::new(12).with_seed(1),
//!     &SomConfig::new(12).with_seed(2),
//! )?;
//!
//! // simulate 100 paths 50 steps ahead and summarize the trend
//! let ensemble = monte_carlo(&model, &series, 50, 100, 7)?;
//! let summary = summarize(&ensemble, (0.025, 0.975))?;
//! assert_eq!(summary.steps(), 50);
//! assert!(summary.iter_bands().all(|(lo, hi)| lo <= hi));
//! # Ok::<(), dvq_core::Error>(())
//! ```

pub mod datasets;
pub mod dvq;
pub mod error;
pub mod rng;
pub mod selection;
pub mod series;
pub mod som;
pub mod stability;

pub use dvq::{DvqModel, FitOptions, ForecastEnsemble, TransitionMatrix, TrendSummary};
pub use error::{Error, Result};
pub use selection::{SweepGrid, SweepResult};
pub use series::{DeformationSet, LagSpec, NormParams, RegressorSet, TimeSeries};
pub use som::{Codebook, SomConfig};
