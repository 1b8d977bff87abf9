use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("impurity entry ({row}, {col}) lies outside bandwidth {bandwidth}")]
    ImpurityOutsideBand { row: i64, col: i64, bandwidth: usize },

    #[error("diagonal offset {offset} exceeds bandwidth {bandwidth}")]
    OffsetOutsideBand { offset: i64, bandwidth: usize },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("row {row} out of range for a matrix with {rows} rows")]
    RowOutOfRange { row: usize, rows: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("rotation sequence shape violated: {0}")]
    SequenceShape(String),

    #[error("near-singular triangular factor: |r[{index}][{index}]| = {magnitude:e}")]
    NearSingular { index: usize, magnitude: f64 },

    #[error("numerical failure at lambda = {lambda} (position {position}): {reason}")]
    Numerical { lambda: String, position: i64, reason: String },

    #[error("invalid configuration at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { path: path.into(), message: message.into() }
    }
}
