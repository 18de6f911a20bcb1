use std::path::PathBuf;

use thiserror::Error;

use crate::spectral::Grid;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: expected {expected} values, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("grid mismatch: {0} vs {1}")]
    GridMismatch(Grid, Grid),

    #[error("exponent p = {p} is out of range (need p >= {min})")]
    InvalidExponent { p: f64, min: f64 },

    #[error("input velocity field is not divergence-free")]
    NotSolenoidal,

    #[error("invalid `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("interpolant incompatible with grid: {0}")]
    IncompatibleInterpolant(String),

    #[error("sample set is empty")]
    EmptySamples,

    #[error("time step must be positive, got {0}")]
    InvalidTimeStep(f64),

    #[error("nudging is enabled (mu = {0}) but no observation was supplied")]
    MissingObservation(f64),

    #[error("numerical divergence at t = {t}: {what}")]
    Divergence { t: f64, what: String },

    #[error("no decaying window in series")]
    NoDecayingWindow,

    #[error("need at least {needed} points for the fit, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Config(String),
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
