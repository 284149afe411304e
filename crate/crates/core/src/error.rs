use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid run or grid parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed configuration text, with the 1-based line it occurred on.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("field of length {found} does not match grid with {expected} nodes")]
    GridMismatch { expected: usize, found: usize },

    /// The potential is not positive, decays too slowly, or is too large.
    #[error("potential rejected: {0}")]
    Validation(String),

    #[error("non-finite state detected at t = {t}")]
    Blowup { t: f64 },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("antiderivative accumulator was not enabled for this run")]
    AntiderivativeDisabled,

    #[error("{0}")]
    Provenance(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
