use thiserror::Error;

/// Failures from special functions and quadrature.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical procedure did not converge after {subdivisions} steps (estimate {estimate:e}, error estimate {error:e})")]
    Convergence {
        subdivisions: usize,
        estimate: f64,
        error: f64,
    },
}

/// An invalid or unparseable model parameter. Always names the offending key.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("parameter `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("unknown parameter key `{key}`")]
    UnknownKey { key: String },
    #[error("parameter `{key}`: unit `{unit}` is not accepted (expected one of: {expected})")]
    BadUnit {
        key: String,
        unit: String,
        expected: String,
    },
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
}

impl ParamError {
    pub fn invalid(key: &str, reason: impl Into<String>) -> Self {
        Self::Invalid {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("saturation did not activate {idle} idle base stations within {rounds} rounds")]
    SaturationExhausted { idle: usize, rounds: usize },
    #[error("invalid simulation config: {0}")]
    Config(String),
}

/// Crate-wide error.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Simulation(#[from] SimulationError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
