//! One-parameter sweeps over the analytical model.
//!
//! Grid values are given in the parameter's input unit: `T_d` plain,
//! `rho_o` in dBm, `theta` in dB, `lambda` per km². `linear` and `log`
//! spacing are even in the linear SI value; `dB` spacing is even in the
//! input unit and is only accepted for `rho_o` and `theta`.

use std::str::FromStr;

use d2d_core::units::{db_to_linear, dbm_to_watts, linear_to_db, per_km2_to_per_m2, watts_to_dbm};
use d2d_core::{Bias, NetworkParams};

use crate::error::{CliError, Result};
use crate::metrics::Metric;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    Bias,
    CutoffThreshold,
    SinrThreshold,
    BsIntensity,
}

impl SweepParameter {
    /// Column holding the linear SI value.
    pub fn column(self) -> &'static str {
        match self {
            Self::Bias => "bias",
            Self::CutoffThreshold => "cutoff_threshold",
            Self::SinrThreshold => "sinr_threshold",
            Self::BsIntensity => "bs_intensity",
        }
    }

    /// Extra column holding the value in dB/dBm, for power-like parameters.
    pub fn db_column(self) -> Option<&'static str> {
        match self {
            Self::CutoffThreshold => Some("cutoff_threshold_dbm"),
            Self::SinrThreshold => Some("sinr_threshold_db"),
            _ => None,
        }
    }

    pub fn input_unit(self) -> &'static str {
        match self {
            Self::Bias => "none",
            Self::CutoffThreshold => "dBm",
            Self::SinrThreshold => "dB",
            Self::BsIntensity => "per_km2",
        }
    }

    fn to_si(self, v: f64) -> f64 {
        match self {
            Self::Bias => v,
            Self::CutoffThreshold => dbm_to_watts(v),
            Self::SinrThreshold => db_to_linear(v),
            Self::BsIntensity => per_km2_to_per_m2(v),
        }
    }

    pub fn to_db(self, si: f64) -> Option<f64> {
        match self {
            Self::CutoffThreshold => Some(watts_to_dbm(si)),
            Self::SinrThreshold => Some(linear_to_db(si)),
            _ => None,
        }
    }

    pub fn apply(self, params: &NetworkParams, si: f64) -> NetworkParams {
        let mut p = *params;
        match self {
            Self::Bias if si.is_infinite() => p.bias = Bias::Infinite,
            Self::Bias => p.bias = Bias::Finite(si),
            Self::CutoffThreshold => p.cutoff_threshold = si,
            Self::SinrThreshold => p.sinr_threshold = si,
            Self::BsIntensity => p.bs_intensity = si,
        }
        p
    }
}

impl FromStr for SweepParameter {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match d2d_core::paramfile::canonical_key(s) {
            Some("bias") => Ok(Self::Bias),
            Some("cutoff_threshold") => Ok(Self::CutoffThreshold),
            Some("sinr_threshold") => Ok(Self::SinrThreshold),
            Some("bs_intensity") => Ok(Self::BsIntensity),
            _ => Err(CliError::Sweep(format!(
                "cannot sweep `{s}` (expected one of T_d, rho_o, theta, lambda)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
    Db,
}

impl FromStr for Spacing {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" | "lin" => Ok(Self::Linear),
            "log" => Ok(Self::Log),
            "db" => Ok(Self::Db),
            other => Err(CliError::Sweep(format!(
                "unknown spacing `{other}` (expected linear, log or dB)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    /// Values in the input unit.
    Values(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        count: usize,
        spacing: Spacing,
    },
}

impl Grid {
    /// Parses `a,b,c` as explicit values.
    pub fn parse_values(text: &str) -> Result<Self> {
        text.split(',')
            .map(|v| {
                let v = v.trim();
                match v.to_ascii_lowercase().as_str() {
                    "inf" | "infinity" => Ok(f64::INFINITY),
                    _ => v
                        .parse::<f64>()
                        .map_err(|_| CliError::Sweep(format!("grid value `{v}` is not a number"))),
                }
            })
            .collect::<Result<Vec<_>>>()
            .map(Grid::Values)
    }

    /// Parses `start:stop:count`.
    pub fn parse_range(text: &str, spacing: Spacing) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        let bad = || {
            CliError::Sweep(format!(
                "range `{text}` is not of the form START:STOP:COUNT"
            ))
        };
        let [start, stop, count] = parts.as_slice() else {
            return Err(bad());
        };
        Ok(Grid::Range {
            start: start.parse().map_err(|_| bad())?,
            stop: stop.parse().map_err(|_| bad())?,
            count: count.parse().map_err(|_| bad())?,
            spacing,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub grid: Grid,
    pub metrics: Vec<Metric>,
}

impl SweepSpec {
    /// Grid points as linear SI values. Checks that the grid is nonempty
    /// and strictly monotone.
    pub fn points(&self) -> Result<Vec<f64>> {
        let p = self.parameter;
        if self.metrics.is_empty() {
            return Err(CliError::Sweep("no metrics selected".into()));
        }
        let points: Vec<f64> = match &self.grid {
            Grid::Values(v) => v.iter().map(|&x| p.to_si(x)).collect(),
            &Grid::Range {
                start,
                stop,
                count,
                spacing,
            } => {
                if !(start.is_finite() && stop.is_finite()) {
                    return Err(CliError::Sweep("range endpoints must be finite".into()));
                }
                let step = |k: usize| {
                    if count == 1 {
                        0.0
                    } else {
                        k as f64 / (count - 1) as f64
                    }
                };
                match spacing {
                    Spacing::Db => {
                        if p.db_column().is_none() {
                            return Err(CliError::Sweep(format!(
                                "dB spacing applies only to rho_o and theta, not `{}`",
                                p.column()
                            )));
                        }
                        (0..count)
                            .map(|k| p.to_si(start + (stop - start) * step(k)))
                            .collect()
                    }
                    Spacing::Linear => {
                        let (a, b) = (p.to_si(start), p.to_si(stop));
                        (0..count).map(|k| a + (b - a) * step(k)).collect()
                    }
                    Spacing::Log => {
                        let (a, b) = (p.to_si(start), p.to_si(stop));
                        if !(a > 0.0 && b > 0.0) {
                            return Err(CliError::Sweep(
                                "log spacing needs positive endpoints".into(),
                            ));
                        }
                        (0..count)
                            .map(|k| (a.ln() + (b.ln() - a.ln()) * step(k)).exp())
                            .collect()
                    }
                }
            }
        };
        if points.is_empty() {
            return Err(CliError::Sweep("grid is empty".into()));
        }
        if points.iter().any(|x| x.is_nan()) {
            return Err(CliError::Sweep("grid contains NaN".into()));
        }
        let increasing = points.windows(2).all(|w| w[0] < w[1]);
        let decreasing = points.windows(2).all(|w| w[0] > w[1]);
        if !(increasing || decreasing) {
            return Err(CliError::Sweep("grid must be strictly monotone".into()));
        }
        Ok(points)
    }
}
