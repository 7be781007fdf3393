use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid exponent {value}: {reason}")]
    InvalidExponent { value: f64, reason: &'static str },

    #[error("coefficients violate Hermitian symmetry (max defect {defect:e})")]
    SymmetryViolation { defect: f64 },

    #[error("invalid generator profile `{name}`: {reason}")]
    InvalidGenerator { name: String, reason: String },

    #[error("index {index} out of range {min}..={max}")]
    IndexOutOfRange { index: i64, min: i64, max: i64 },

    #[error("field is not mean-free (mean {mean:e})")]
    NotMeanFree { mean: f64 },

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("ratio undefined: {0}")]
    UndefinedRatio(&'static str),

    #[error("time step {dt} violates the CFL bound {bound}")]
    StepSize { dt: f64, bound: f64 },

    #[error("solution diverged at step {step} (t = {t})")]
    Divergence { step: u64, t: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty measure: {0}")]
    EmptyMeasure(&'static str),

    #[error("total masses differ: {source_mass} vs {target_mass}")]
    MassMismatch { source_mass: f64, target_mass: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed snapshot: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
