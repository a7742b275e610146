//! Error taxonomy shared by the whole crate.

use thiserror::Error;

/// Everything that can go wrong below the CLI layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("unsupported dimension {0}: grids are 2- or 3-dimensional")]
    UnsupportedDimension(usize),

    #[error("rank error: {0}")]
    Rank(String),

    #[error("exponent error: {0}")]
    Exponent(String),

    #[error("weight error: {0}")]
    Weight(String),

    #[error("singular weight: mu = 0 with negative exponent s = {s}")]
    SingularWeight { s: f64 },

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("support error: {0}")]
    Support(String),

    #[error("operator-norm table incomplete: missing H({0})")]
    TableIncomplete(f64),

    #[error("contract error: {0}")]
    Contract(String),

    #[error("solver diverged after {iterations} iterations (last residual {last:e})")]
    Divergence {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },

    #[error("continuation failed at stage {stage} ({detail}): {source}")]
    Cascade {
        stage: String,
        detail: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed field file {path}: {reason}")]
    FieldFormat { path: String, reason: String },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
