//! Command-line front end: single-point analysis, Monte Carlo validation
//! and parameter sweeps, emitted as CSV or JSON tables.

pub mod commands;
pub mod error;
pub mod metrics;
pub mod sweep;
pub mod table;

pub use commands::{cmd_analyze, cmd_sweep, cmd_validate, load_params};
pub use error::{CliError, Result};
pub use metrics::{Metric, RateUnit};
pub use sweep::{Grid, Spacing, SweepParameter, SweepSpec};
pub use table::{write_output, Cell, OutputFormat, ResultTable};
