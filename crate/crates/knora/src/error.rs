//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by dataset ingestion, splitting, and selection primitives.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("non-binary labels: found {found} distinct classes, expected 2")]
    NonBinaryLabels { found: usize },

    #[error("categorical input attribute '{0}' is not supported")]
    CategoricalInput(String),

    #[error("non-numeric feature value '{value}' at row {row}, column {column}")]
    NonNumericFeature {
        row: usize,
        column: String,
        value: String,
    },

    #[error("non-finite feature value at row {row}, column {column}")]
    NonFiniteFeature { row: usize, column: String },

    #[error("empty data section")]
    EmptyData,

    #[error("missing label column '{0}'")]
    MissingLabelColumn(String),

    #[error("row {row} has {got} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },

    #[error("insufficient minority samples: class '{label}' has {count} samples, need at least {required}")]
    InsufficientClassSamples {
        label: String,
        count: usize,
        required: usize,
    },

    #[error("k = {k} exceeds validation set size {v}")]
    RegionTooLarge { k: usize, v: usize },

    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("AUC requires both classes in the truth vector")]
    SingleClassTruth,

    #[error("metric matrix contains a non-finite entry at ({row}, {col})")]
    NonFiniteMetric { row: usize, col: usize },

    #[error("alpha must lie in (0, 0.5), got {0}")]
    InvalidAlpha(f64),

    #[error("{0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
