use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input value lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The half-Laplacian was requested at x = 0 where the operand jumps.
    #[error("singular endpoint: u(0) = {value} differs from the left extension {left_value}")]
    SingularEndpoint { value: f64, left_value: f64 },

    /// Time stepping produced a non-finite value.
    #[error("relaxation diverged at step {step}: non-finite state")]
    Divergence { step: usize },

    /// The energy kept increasing; the time step is too large.
    #[error("relaxation unstable at step {step}: energy increased over {samples} consecutive steps; retry with dt below {suggested_dt:e}")]
    Stability {
        step: usize,
        samples: usize,
        suggested_dt: f64,
    },

    /// A decay fit window is unusable.
    #[error("fit window error: {0}")]
    Window(String),

    /// A text input could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
