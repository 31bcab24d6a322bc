use std::path::PathBuf;

use thiserror::Error;

/// Every failure the simulator can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input `{name}`: {reason}")]
    Input { name: String, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown key `{0}`")]
    UnknownKey(String),

    #[error("invariant violated for `{key}`: {reason}")]
    Invariant { key: String, reason: String },

    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),

    #[error("unknown policy `{0}`")]
    UnknownPolicy(String),

    #[error("simulation aborted at t={time}: `{variable}` {reason}")]
    Simulation {
        time: f64,
        variable: String,
        reason: String,
    },

    #[error("lag lookup at t={time} needs a value that has not been recorded yet")]
    Sequencing { time: f64 },

    #[error("series length mismatch: simulated has {simulated}, historical has {historical}")]
    LengthMismatch { simulated: usize, historical: usize },

    #[error("at least {required} points are needed, got {got}")]
    TooShort { required: usize, got: usize },

    #[error("RMSPE undefined: historical value at index {index} is zero")]
    ZeroHistorical { index: usize },

    #[error("Theil decomposition undefined: mean squared error is zero")]
    TheilUndefined,

    #[error("scenario `{scenario}` failed: {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn input(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Input {
            name: name.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn invariant(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invariant {
            key: key.into(),
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
