use std::path::PathBuf;

use d2d_core::{NumericError, ParamError, SimulationError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
    #[error("invalid sweep: {0}")]
    Sweep(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed table: {0}")]
    Format(String),
}

impl From<d2d_core::Error> for CliError {
    fn from(e: d2d_core::Error) -> Self {
        match e {
            d2d_core::Error::Param(e) => Self::Param(e),
            d2d_core::Error::Numeric(e) => Self::Numeric(e),
            d2d_core::Error::Simulation(e) => Self::Simulation(e),
        }
    }
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status. 2 is left to the argument parser.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Param(_) | Self::Sweep(_) => 10,
            Self::Numeric(_) => 11,
            Self::Io { .. } | Self::Format(_) => 12,
            Self::Simulation(_) => 13,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
