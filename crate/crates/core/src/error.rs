//! Error type shared by all modules.

use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors returned by this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A series has fewer values than an operation requires.
    #[error("series `{name}` has {got} values but at least {needed} are required")]
    SeriesTooShort {
        /// Series label.
        name: String,
        /// Actual length.
        got: usize,
        /// Minimum length for the requested operation.
        needed: usize,
    },

    /// A series value is NaN or infinite.
    #[error("series `{name}` contains a non-finite value at index {index}")]
    NonFiniteValue { name: String, index: usize },

    /// A series was constructed with no values at all.
    #[error("a time series must contain at least one value")]
    EmptySeries,

    /// A lag specification violates its invariants.
    #[error("invalid lag spec: {0}")]
    InvalidLagSpec(String),

    /// Vector dimension does not match the expected dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// An operation received an empty collection.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// A configuration value is out of its documented range.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Z-score normalization of a constant series.
    #[error("cannot z-score normalize a series with zero variance")]
    ZeroVariance,

    /// Two sequences that must align have different lengths.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// A CSV line could not be parsed as a number.
    #[error("{path}: line {line}: cannot parse `{content}` as a number")]
    CsvParse {
        path: PathBuf,
        line: usize,
        content: String,
    },

    /// Fitting produced no (regressor, deformation) pairs.
    #[error("no (regressor, deformation) pairs: the transition matrix would be empty")]
    NoTransitions,

    /// A transition row has no support and no supported fallback exists.
    #[error("regressor cluster {cluster} has no supported transition row")]
    UnsupportedRow { cluster: usize },

    /// A cluster index exceeds the codebook size.
    #[error("cluster index {index} out of range (codebook has {n} prototypes)")]
    ClusterOutOfRange { index: usize, n: usize },

    /// A simulation step produced NaN or infinity.
    #[error("non-finite value produced at simulation step {step}")]
    NonFiniteSimulation { step: usize },

    /// Split fractions or counts are infeasible.
    #[error("invalid split: {0}")]
    InvalidSplit(String),

    /// Every cell of a hyperparameter sweep failed to fit.
    #[error("all {cells} sweep cells failed to fit")]
    SweepFailed { cells: usize },

    /// A model file is structurally valid JSON but violates the schema.
    #[error("model file: {0}")]
    ModelFormat(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// A model file is not valid JSON.
    #[error("model file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
}
