use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the beamforming pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Problem instance is malformed (dimensions, Hermitian/PSD violations, bad targets).
    #[error("invalid instance: {0}")]
    Instance(String),

    /// An input value violates its domain (negative power, `a < b`, bad index).
    #[error("invalid input: {0}")]
    Input(String),

    /// Configuration rejected before any computation started.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("empty database")]
    EmptyDatabase,

    /// Malformed sample-database row.
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// The QoS constraints cannot be met; carries the solver diagnostic.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Input(_) | Error::Instance(_) => 2,
            Error::Infeasible(_) => 3,
            Error::Numerical(_) => 4,
            Error::EmptyDatabase | Error::Parse { .. } | Error::Io(_) | Error::Csv(_) => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
