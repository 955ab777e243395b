//! Crate-wide error type and process exit codes.

use thiserror::Error;

use crate::domain::{ConfigError, StateError};
use crate::init::InitError;
use crate::newton::SolverError;
use crate::thermo::ThermoError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("thermodynamic error: {0}")]
    Thermo(#[from] ThermoError),
    #[error("initialisation error: {0}")]
    Init(#[from] InitError),
    #[error("solver error: {0}")]
    Solver(#[from] SolverError),
    #[error("inadmissible state: {0}")]
    State(#[from] StateError),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed file {path}: {message}")]
    Format { path: String, message: String },
    #[error("checkpoint grid {found:?} does not match configured grid {expected:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn format(path: impl AsRef<std::path::Path>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.as_ref().display().to_string(),
            message: message.into(),
        }
    }

    /// Process exit code: 2 for configuration, 3 for solver or physics
    /// failures, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::DimensionMismatch { .. } => 2,
            Error::Init(InitError::Burger(_)) => 2,
            Error::Thermo(_) | Error::Init(_) | Error::Solver(_) | Error::State(_) => 3,
            Error::Io { .. } | Error::Format { .. } => 4,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
