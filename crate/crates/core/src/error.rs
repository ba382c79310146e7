use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("operation requires a {expected}D grid, got {actual}D")]
    Dimension { expected: usize, actual: usize },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("Galerkin truncation m={m} is not available on this grid: {reason}")]
    InvalidCutoff { m: usize, reason: String },

    #[error("solution blew up at step {step} (t = {time}): non-finite coefficient")]
    BlowUp { step: usize, time: f64 },

    #[error("atom {atom}: {source}")]
    Atom {
        atom: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{param} = {value}: {source}")]
    Rung {
        param: &'static str,
        value: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("time {t} outside sampled range [{start}, {end}]")]
    TimeOutOfRange { t: f64, start: f64, end: f64 },

    #[error("invalid exponent r = {0}: must satisfy r >= 2")]
    InvalidExponent(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error("unsupported snapshot version: found {found:?}, expected {expected:?}")]
    Version { found: [u8; 4], expected: [u8; 4] },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
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

    pub(crate) fn tag_atom(self, atom: usize) -> Self {
        Error::Atom {
            atom,
            source: Box::new(self),
        }
    }

    pub(crate) fn tag_rung(self, param: &'static str, value: f64) -> Self {
        Error::Rung {
            param,
            value,
            source: Box::new(self),
        }
    }
}
