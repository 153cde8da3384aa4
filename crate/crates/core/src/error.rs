use thiserror::Error;

use crate::cutting_plane::Program;

/// Errors produced anywhere in the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain violation: {0}")]
    Domain(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid boundary: {0}")]
    InvalidBoundary(String),

    #[error("t = {t} outside tabulated range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("invalid linear program: {0}")]
    InvalidLp(String),

    #[error("{program} LP at iteration {iteration} was {status} (cuts: {gamma:?})")]
    Solver {
        program: Program,
        iteration: usize,
        status: String,
        gamma: Vec<f64>,
    },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("invalid problem specification: {0}")]
    InvalidSpec(String),

    #[error("results come from different problem specifications")]
    MismatchedSpecs,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
