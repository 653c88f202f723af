use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the simulation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("index {index} out of range for dimension {dim}")]
    Index { index: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("resource guard exceeded: {what} needs dimension {required} (limit {limit})")]
    Resource {
        what: &'static str,
        required: usize,
        limit: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("state norm collapsed to {norm:e} after period {period}")]
    DegenerateEvolution { period: usize, norm: f64 },

    #[error("eigenbasis is nearly defective (condition estimate {condition:e} > {threshold:e})")]
    NearDefective { condition: f64, threshold: f64 },

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("no meaningful pi pairing: dominant weight {dominant:.4} below floor {floor:.4}")]
    WeakPairing { dominant: f64, floor: f64 },

    #[error("no transition detected: variance max/median ratio {ratio:.3} < 2")]
    NoTransitionDetected { ratio: f64 },

    #[error("insufficient data: {usable} usable points, need at least {required}")]
    InsufficientData { usable: usize, required: usize },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
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
