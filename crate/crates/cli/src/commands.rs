//! The `analyze`, `validate` and `sweep` commands.
//!
//! Every table carries the full parameter set (`param.*` entries, SI units)
//! and, for simulations, the campaign settings, so that
//! [`params_from_metadata`] and [`config_from_metadata`] can re-run it.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use d2d_core::paramfile::{apply_assignment, parse_override, parse_param_file, to_param_file};
use d2d_core::sim::{
    classify_and_schedule, measure_detailed, realize_network, write_dump, Estimate,
};
use d2d_core::units::{linear_to_db, per_m2_to_per_km2, M2_PER_KM2};
use d2d_core::{
    mode_selection_probability, outage_cellular, outage_d2d, NetworkParams, SimulationConfig,
};
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::metrics::{evaluate, metric_columns, Metric, RateUnit};
use crate::sweep::SweepSpec;
use crate::table::{Cell, ResultTable};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Reads the parameter file (defaults when `None`) and applies `KEY=VALUE`
/// overrides in order, then validates.
pub fn load_params(path: Option<&Path>, overrides: &[String]) -> Result<NetworkParams> {
    let mut params = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            parse_param_file(&text)?
        }
        None => NetworkParams::default(),
    };
    for o in overrides {
        let (k, v) = parse_override(o)?;
        apply_assignment(&mut params, &k, &v)?;
    }
    params.validate()?;
    Ok(params)
}

fn base_metadata(table: &mut ResultTable, command: &str, params: &NetworkParams) {
    table.set_meta("command", command);
    table.set_meta("tool_version", TOOL_VERSION);
    for line in to_param_file(params).lines() {
        if let Some((k, v)) = line.split_once(" = ") {
            table.set_meta(format!("param.{k}"), v);
        }
    }
}

/// Rebuilds the parameter set recorded in a table's metadata.
pub fn params_from_metadata(metadata: &BTreeMap<String, String>) -> Result<NetworkParams> {
    let text: String = metadata
        .iter()
        .filter_map(|(k, v)| k.strip_prefix("param.").map(|k| format!("{k} = {v}\n")))
        .collect();
    Ok(parse_param_file(&text)?)
}

/// Rebuilds the campaign settings recorded by [`cmd_validate`].
pub fn config_from_metadata(metadata: &BTreeMap<String, String>) -> Result<SimulationConfig> {
    let get = |k: &str| {
        metadata
            .get(k)
            .ok_or_else(|| CliError::Format(format!("metadata lacks `{k}`")))
    };
    let num = |k: &str| -> Result<f64> {
        get(k)?
            .parse()
            .map_err(|_| CliError::Format(format!("metadata `{k}` is not a number")))
    };
    let thresholds = get("sim.sinr_thresholds")?
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| CliError::Format("bad threshold list".into()))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SimulationConfig {
        window_side: num("sim.window_side_m")?,
        guard_fraction: num("sim.guard_fraction")?,
        num_realizations: num("sim.realizations")? as usize,
        rng_seed: get("sim.seed")?
            .parse()
            .map_err(|_| CliError::Format("bad seed".into()))?,
        saturation_enabled: get("sim.saturation")? == "true",
        sinr_thresholds: thresholds,
        ..SimulationConfig::default()
    })
}

fn rate_metadata(table: &mut ResultTable, unit: RateUnit) {
    table.set_meta("rate_unit", unit.label());
    table.set_meta("total_capacity_unit", format!("{} per m2", unit.label()));
}

/// All analytical metrics at one operating point, as a single row.
pub fn cmd_analyze(params: &NetworkParams, unit: RateUnit) -> Result<ResultTable> {
    params.validate()?;
    let mut table = ResultTable::new(metric_columns(&Metric::ALL));
    base_metadata(&mut table, "analyze", params);
    rate_metadata(&mut table, unit);
    table.push_row(evaluate(params, &Metric::ALL, unit)?)?;
    Ok(table)
}

/// One row per grid point, evaluated in parallel. A point that fails keeps
/// its row with missing metrics and the error in `status`.
pub fn cmd_sweep(params: &NetworkParams, spec: &SweepSpec, unit: RateUnit) -> Result<ResultTable> {
    params.validate()?;
    let points = spec.points()?;
    let p = spec.parameter;
    let mut columns = vec![p.column().to_string()];
    columns.extend(p.db_column().map(String::from));
    let metric_cols = metric_columns(&spec.metrics);
    let width = metric_cols.len();
    columns.extend(metric_cols);
    columns.push("status".into());

    let rows: Vec<Vec<Cell>> = points
        .par_iter()
        .map(|&x| {
            let mut row = vec![Cell::number(x)];
            row.extend(p.to_db(x).map(Cell::number));
            let point = p.apply(params, x);
            let outcome = point
                .validate()
                .map_err(CliError::from)
                .and_then(|_| evaluate(&point, &spec.metrics, unit));
            match outcome {
                Ok(cells) => {
                    row.extend(cells);
                    row.push(Cell::Text("ok".into()));
                }
                Err(e) => {
                    log::warn!("{} = {x}: {e}", p.column());
                    row.extend(std::iter::repeat_n(Cell::Missing, width));
                    row.push(Cell::Text(format!("error: {e}")));
                }
            }
            row
        })
        .collect();

    let mut table = ResultTable::new(columns);
    base_metadata(&mut table, "sweep", params);
    rate_metadata(&mut table, unit);
    table.set_meta("sweep.parameter", p.column());
    table.set_meta("sweep.input_unit", p.input_unit());
    table.set_meta("sweep.grid", format!("{:?}", spec.grid));
    for row in rows {
        table.push_row(row)?;
    }
    Ok(table)
}

fn estimate_cells(analytic: Option<f64>, est: &Estimate) -> [Cell; 6] {
    let z = 1.96;
    let gap = analytic.map(|a| (a - est.mean).abs());
    [
        analytic.map_or(Cell::Missing, Cell::number),
        Cell::number(est.mean),
        Cell::number(est.std_error),
        Cell::number(est.mean - z * est.std_error),
        Cell::number(est.mean + z * est.std_error),
        gap.map_or(Cell::Missing, Cell::number),
    ]
}

fn max_finite(values: impl Iterator<Item = f64>) -> f64 {
    values.filter(|v| v.is_finite()).fold(f64::NAN, f64::max)
}

/// Analytical versus Monte Carlo outage at each SINR threshold of `config`.
pub fn cmd_validate(params: &NetworkParams, config: &SimulationConfig) -> Result<ResultTable> {
    params.validate()?;
    config.validate()?;
    let campaign = d2d_core::run_campaign(params, config)?;
    let has_d2d = mode_selection_probability(params)?.d2d_link_intensity > 0.0;

    let mut columns = vec![
        "sinr_threshold".to_string(),
        "sinr_threshold_db".to_string(),
    ];
    for mode in ["cellular", "d2d"] {
        for field in [
            "analytic",
            "empirical",
            "std_error",
            "ci_low",
            "ci_high",
            "gap",
        ] {
            columns.push(format!("{field}_{mode}"));
        }
    }
    let mut table = ResultTable::new(columns);
    let mut gaps = (Vec::new(), Vec::new());
    for (k, &theta) in config.sinr_thresholds.iter().enumerate() {
        let point = NetworkParams {
            sinr_threshold: theta,
            ..*params
        };
        let a_c = outage_cellular(&point)?.outage_probability;
        let a_d = if has_d2d {
            Some(outage_d2d(&point)?.outage_probability)
        } else {
            None
        };
        let (e_c, e_d) = (&campaign.cellular_outage[k], &campaign.d2d_outage[k]);
        gaps.0.push((a_c - e_c.mean).abs());
        if let Some(a) = a_d {
            gaps.1.push((a - e_d.mean).abs());
        }
        let mut row = vec![Cell::number(theta), Cell::number(linear_to_db(theta))];
        row.extend(estimate_cells(Some(a_c), e_c));
        row.extend(estimate_cells(a_d, e_d));
        table.push_row(row)?;
    }

    base_metadata(&mut table, "validate", params);
    table.set_meta("sim.seed", config.rng_seed);
    table.set_meta("sim.realizations", config.num_realizations);
    table.set_meta("sim.window_side_m", config.window_side);
    table.set_meta("sim.window_km2", config.area() / M2_PER_KM2);
    table.set_meta("sim.guard_fraction", config.guard_fraction);
    table.set_meta("sim.saturation", config.saturation_enabled);
    table.set_meta(
        "sim.sinr_thresholds",
        config
            .sinr_thresholds
            .iter()
            .map(f64::to_string)
            .collect::<Vec<_>>()
            .join(" "),
    );
    table.set_meta("summary.max_gap_cellular", max_finite(gaps.0.into_iter()));
    table.set_meta("summary.max_gap_d2d", max_finite(gaps.1.into_iter()));
    table.set_meta("summary.bs_per_realization", campaign.bs_count.mean);
    table.set_meta(
        "summary.bs_intensity_per_km2",
        per_m2_to_per_km2(campaign.bs_count.mean / config.area()),
    );
    table.set_meta(
        "summary.inserted_ue_per_realization",
        campaign.inserted_per_realization.mean,
    );
    table.set_meta("summary.mode_d2d_fraction", campaign.mode_d2d_fraction.mean);
    table.set_meta(
        "summary.mode_d2d_fraction_se",
        campaign.mode_d2d_fraction.std_error,
    );
    table.set_meta(
        "summary.prob_d2d_analytic",
        mode_selection_probability(params)?.prob_d2d,
    );
    table.set_meta("summary.d2d_truncation", campaign.d2d_truncation.mean);
    table.set_meta(
        "summary.cellular_truncation",
        campaign.cellular_truncation.mean,
    );
    Ok(table)
}

/// Writes realization 0 of `config` as a tab-separated UE table.
pub fn dump_realization(
    params: &NetworkParams,
    config: &SimulationConfig,
    path: &Path,
) -> Result<()> {
    let r = realize_network(params, config, 0)?;
    let r = classify_and_schedule(r, params, config.saturation_enabled)?;
    let (_, sinr) = measure_detailed(&r, params, config);
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_dump(&r, &sinr, &mut out).map_err(|e| CliError::io(path, e))?;
    out.flush().map_err(|e| CliError::io(path, e))
}
