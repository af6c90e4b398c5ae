//! Analytical metrics reported by `analyze` and `sweep`.

use std::cell::OnceCell;
use std::str::FromStr;

use d2d_core::outage::{link_capacity, potential_d2d_rate_from, total_capacity_from};
use d2d_core::power::{mean_power_potential_d2d, moment_power_cellular_generic, moment_power_d2d};
use d2d_core::units::{nats_to_bits, watts_to_dbm};
use d2d_core::{
    derive, mode_selection_probability, outage_cellular, outage_d2d, LinkMode, NetworkParams,
};

use crate::error::Result;
use crate::table::Cell;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    ModeSelectionProb,
    TruncationCellular,
    TruncationD2d,
    OutageCellular,
    OutageD2d,
    CapacityCellular,
    CapacityD2d,
    PotentialD2dRate,
    TotalCapacity,
    MeanPowerD2d,
    MeanPowerCellular,
    MeanPowerPotentialD2d,
}

impl Metric {
    pub const ALL: [Metric; 12] = [
        Metric::ModeSelectionProb,
        Metric::TruncationCellular,
        Metric::TruncationD2d,
        Metric::OutageCellular,
        Metric::OutageD2d,
        Metric::CapacityCellular,
        Metric::CapacityD2d,
        Metric::PotentialD2dRate,
        Metric::TotalCapacity,
        Metric::MeanPowerD2d,
        Metric::MeanPowerCellular,
        Metric::MeanPowerPotentialD2d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::ModeSelectionProb => "mode_selection_prob",
            Metric::TruncationCellular => "truncation_cellular",
            Metric::TruncationD2d => "truncation_d2d",
            Metric::OutageCellular => "outage_cellular",
            Metric::OutageD2d => "outage_d2d",
            Metric::CapacityCellular => "capacity_cellular",
            Metric::CapacityD2d => "capacity_d2d",
            Metric::PotentialD2dRate => "potential_d2d_rate",
            Metric::TotalCapacity => "total_capacity",
            Metric::MeanPowerD2d => "mean_power_d2d",
            Metric::MeanPowerCellular => "mean_power_cellular",
            Metric::MeanPowerPotentialD2d => "mean_power_potential_d2d",
        }
    }

    fn is_power(self) -> bool {
        matches!(
            self,
            Metric::MeanPowerD2d | Metric::MeanPowerCellular | Metric::MeanPowerPotentialD2d
        )
    }

    /// Output columns: the SI value, plus a dBm column for powers.
    pub fn columns(self) -> Vec<String> {
        let mut cols = vec![self.name().to_string()];
        if self.is_power() {
            cols.push(format!("{}_dbm", self.name()));
        }
        cols
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = Metric::ALL.iter().map(|m| m.name()).collect();
                format!("unknown metric `{s}` (known: {})", known.join(", "))
            })
    }
}

/// Parses a comma-separated metric list. `all` selects every metric.
pub fn parse_metric_list(text: &str) -> Result<Vec<Metric>, String> {
    if text.trim() == "all" {
        return Ok(Metric::ALL.to_vec());
    }
    text.split(',').map(|s| s.trim().parse()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateUnit {
    #[default]
    Nats,
    Bits,
}

impl RateUnit {
    pub fn label(self) -> &'static str {
        match self {
            RateUnit::Nats => "nats/s/Hz",
            RateUnit::Bits => "bits/s/Hz",
        }
    }

    fn convert(self, nats: f64) -> f64 {
        match self {
            RateUnit::Nats => nats,
            RateUnit::Bits => nats_to_bits(nats),
        }
    }
}

pub fn metric_columns(metrics: &[Metric]) -> Vec<String> {
    metrics.iter().flat_map(|m| m.columns()).collect()
}

/// Evaluates `metrics` at one operating point, one or two cells per metric.
///
/// D2D link quantities are reported as missing when no D2D links exist.
pub fn evaluate(params: &NetworkParams, metrics: &[Metric], unit: RateUnit) -> Result<Vec<Cell>> {
    let derived = derive(params)?;
    let selection = mode_selection_probability(params)?;
    let no_d2d = selection.d2d_link_intensity == 0.0;
    let capacity_cellular = OnceCell::new();
    let capacity_d2d = OnceCell::new();
    let cellular = || -> Result<f64> {
        if let Some(v) = capacity_cellular.get() {
            return Ok(*v);
        }
        let v = link_capacity(LinkMode::Cellular, params)?;
        Ok(*capacity_cellular.get_or_init(|| v))
    };
    let d2d = || -> Result<f64> {
        if no_d2d {
            return Ok(0.0);
        }
        if let Some(v) = capacity_d2d.get() {
            return Ok(*v);
        }
        let v = link_capacity(LinkMode::D2d, params)?;
        Ok(*capacity_d2d.get_or_init(|| v))
    };

    let mut cells = Vec::new();
    for &metric in metrics {
        let value = match metric {
            Metric::ModeSelectionProb => Some(selection.prob_d2d),
            Metric::TruncationCellular => Some(derived.cellular_truncation_probability),
            Metric::TruncationD2d => Some(derived.d2d_truncation_probability()),
            Metric::OutageCellular => Some(outage_cellular(params)?.outage_probability),
            Metric::OutageD2d if no_d2d => None,
            Metric::OutageD2d => Some(outage_d2d(params)?.outage_probability),
            Metric::CapacityCellular => Some(unit.convert(cellular()?)),
            Metric::CapacityD2d if no_d2d => None,
            Metric::CapacityD2d => Some(unit.convert(d2d()?)),
            Metric::PotentialD2dRate => {
                let pd = selection.prob_d2d;
                let rc = if pd == 1.0 { 0.0 } else { cellular()? };
                let rd = if pd == 0.0 { 0.0 } else { d2d()? };
                Some(unit.convert(potential_d2d_rate_from(params, rd, rc)?))
            }
            Metric::TotalCapacity => {
                Some(unit.convert(total_capacity_from(params, d2d()?, cellular()?)?))
            }
            Metric::MeanPowerD2d if no_d2d => None,
            Metric::MeanPowerD2d => Some(moment_power_d2d(1.0, params)?),
            Metric::MeanPowerCellular => Some(moment_power_cellular_generic(1.0, params)?),
            Metric::MeanPowerPotentialD2d => Some(mean_power_potential_d2d(params)?),
        };
        cells.push(value.map_or(Cell::Missing, Cell::number));
        if metric.is_power() {
            cells.push(value.map_or(Cell::Missing, |w| Cell::number(watts_to_dbm(w))));
        }
    }
    Ok(cells)
}
