use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}:{row}: {message}")]
    Parse {
        path: PathBuf,
        /// 1-based line (CSV) or a 0 placeholder for whole-file problems.
        row: usize,
        message: String,
    },

    #[error("table is not rectangular: segment {segment} has {found} quality levels, expected {expected}")]
    NonRectangular {
        segment: usize,
        expected: usize,
        found: usize,
    },

    #[error("segment {segment}, level {level}: {message}")]
    BadVariant {
        segment: usize,
        level: usize,
        message: String,
    },

    #[error("invalid table: {0}")]
    BadTable(String),

    #[error("invalid budget: {0}")]
    BadBudget(String),

    #[error("invalid penalty configuration: {0}")]
    BadConfig(String),

    #[error("variable index {index} out of bounds for a model with {num_vars} variables")]
    VarOutOfBounds { index: usize, num_vars: usize },

    #[error("quadratic terms need two distinct variables, got index {0} twice")]
    DiagonalQuadratic(usize),

    #[error("bit vector has length {found}, model has {expected} variables")]
    LengthMismatch { expected: usize, found: usize },

    #[error("spin vector entries must be +1 or -1 (index {0})")]
    BadSpin(usize),

    #[error("model has {num_vars} variables, exhaustive enumeration is capped at {limit}")]
    TooManyVars { num_vars: usize, limit: usize },

    #[error("model registry does not match the table (variable {index})")]
    RegistryMismatch { index: usize },

    #[error(
        "no assignment fits the data budget: minimum possible usage is \
         {min_usage_mb} MB, budget is {d_max_mb} MB"
    )]
    Infeasible { min_usage_mb: f64, d_max_mb: f64 },

    #[error("cannot derive an annealing schedule from a model with no nonzero terms")]
    FlatModel,

    #[error("energy landscape needs exactly 2 segments, table has {0}")]
    LandscapeShape(usize),

    #[error("exact oracles disagree: {0}")]
    OracleMismatch(String),

    #[error("quantized problem too large: {0}")]
    TooLarge(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
