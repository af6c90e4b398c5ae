//! Flat `key = value unit` parameter files.
//!
//! ```text
//! # reference operating point
//! bs_intensity            = 5 per_km2
//! cutoff_threshold        = -70 dBm
//! bias                    = inf
//! sinr_threshold          = 0 dB
//! ```
//!
//! Keys are the [`NetworkParams`] field names. Keys not present keep their
//! default value. Unknown keys and unknown units are errors. The result is
//! validated before it is returned.

use crate::error::ParamError;
use crate::model::{Bias, NetworkParams};
use crate::units::{db_to_linear, dbm_to_watts, per_km2_to_per_m2};

pub const KEYS: [&str; 12] = [
    "bs_intensity",
    "ue_intensity",
    "potential_d2d_intensity",
    "max_tx_power",
    "receiver_sensitivity",
    "cutoff_threshold",
    "pathloss_cellular",
    "pathloss_d2d",
    "bias",
    "sinr_threshold",
    "noise_power",
    "num_channels",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Intensity,
    Power,
    Ratio,
    Exponent,
    Bias,
    Count,
}

fn kind_of(key: &str) -> Option<Kind> {
    Some(match key {
        "bs_intensity" | "ue_intensity" | "potential_d2d_intensity" => Kind::Intensity,
        "max_tx_power" | "receiver_sensitivity" | "cutoff_threshold" | "noise_power" => Kind::Power,
        "sinr_threshold" => Kind::Ratio,
        "pathloss_cellular" | "pathloss_d2d" => Kind::Exponent,
        "bias" => Kind::Bias,
        "num_channels" => Kind::Count,
        _ => return None,
    })
}

/// Maps the symbolic names used on the command line (`T_d`, `rho_o`, `θ`,
/// `lambda`, ...) to field names. Field names map to themselves.
pub fn canonical_key(name: &str) -> Option<&'static str> {
    let key = match name {
        "T_d" | "Td" | "t_d" => "bias",
        "rho_o" | "ρ_o" | "rho" => "cutoff_threshold",
        "rho_min" | "ρ_min" => "receiver_sensitivity",
        "theta" | "θ" => "sinr_threshold",
        "lambda" | "λ" => "bs_intensity",
        "sigma2" | "σ²" => "noise_power",
        "P_u" => "max_tx_power",
        "eta_c" | "η_c" => "pathloss_cellular",
        "eta_d" | "η_d" => "pathloss_d2d",
        "S" | "|S|" => "num_channels",
        other => return KEYS.iter().copied().find(|k| *k == other),
    };
    Some(key)
}

fn split_quantity(value: &str) -> (&str, &str) {
    let value = value.trim();
    let end = value
        .char_indices()
        .find(|(_, c)| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
        .map(|(i, _)| i)
        .unwrap_or(value.len());
    (value[..end].trim(), value[end..].trim())
}

fn bad_unit(key: &str, unit: &str, expected: &str) -> ParamError {
    ParamError::BadUnit {
        key: key.to_string(),
        unit: unit.to_string(),
        expected: expected.to_string(),
    }
}

fn parse_number(key: &str, text: &str) -> Result<f64, ParamError> {
    text.parse::<f64>()
        .map_err(|_| ParamError::invalid(key, format!("`{text}` is not a number")))
}

/// Parses `value` (number plus unit) for `key` and stores it in SI form.
/// Does not validate the whole parameter set.
pub fn apply_assignment(
    params: &mut NetworkParams,
    key: &str,
    value: &str,
) -> Result<(), ParamError> {
    let field = canonical_key(key).ok_or_else(|| ParamError::UnknownKey {
        key: key.to_string(),
    })?;
    let kind = kind_of(field).expect("canonical keys have a kind");
    let value = value.trim();
    if kind == Kind::Bias {
        let lowered = value.to_ascii_lowercase();
        params.bias = if matches!(lowered.as_str(), "inf" | "infinite" | "infinity" | "∞") {
            Bias::Infinite
        } else {
            let (num, unit) = split_quantity(value);
            if !unit.is_empty() {
                return Err(bad_unit(field, unit, "none, or `inf`"));
            }
            Bias::Finite(parse_number(field, num)?)
        };
        return Ok(());
    }
    let (num, unit) = split_quantity(value);
    let x = parse_number(field, num)?;
    let si = match kind {
        Kind::Intensity => match unit {
            "per_km2" => per_km2_to_per_m2(x),
            "per_m2" => x,
            _ => return Err(bad_unit(field, unit, "per_km2, per_m2")),
        },
        Kind::Power => match unit {
            "W" => x,
            "mW" => x * 1e-3,
            "dBm" => dbm_to_watts(x),
            _ => return Err(bad_unit(field, unit, "W, mW, dBm")),
        },
        Kind::Ratio => match unit {
            "" | "linear" => x,
            "dB" => db_to_linear(x),
            _ => return Err(bad_unit(field, unit, "dB, linear, or none")),
        },
        Kind::Exponent => {
            if !unit.is_empty() {
                return Err(bad_unit(field, unit, "none"));
            }
            x
        }
        Kind::Count => {
            if !unit.is_empty() {
                return Err(bad_unit(field, unit, "none"));
            }
            if x < 1.0 || x.fract() != 0.0 || x > u32::MAX as f64 {
                return Err(ParamError::invalid(
                    field,
                    format!("must be a positive integer, got {num}"),
                ));
            }
            params.num_channels = x as u32;
            return Ok(());
        }
        Kind::Bias => unreachable!(),
    };
    match field {
        "bs_intensity" => params.bs_intensity = si,
        "ue_intensity" => params.ue_intensity = si,
        "potential_d2d_intensity" => params.potential_d2d_intensity = si,
        "max_tx_power" => params.max_tx_power = si,
        "receiver_sensitivity" => params.receiver_sensitivity = si,
        "cutoff_threshold" => params.cutoff_threshold = si,
        "noise_power" => params.noise_power = si,
        "sinr_threshold" => params.sinr_threshold = si,
        "pathloss_cellular" => params.pathloss_cellular = si,
        "pathloss_d2d" => params.pathloss_d2d = si,
        _ => unreachable!("all remaining keys handled"),
    }
    Ok(())
}

/// Parses a `KEY=VALUE` command-line override.
pub fn parse_override(assignment: &str) -> Result<(String, String), ParamError> {
    let (k, v) = assignment
        .split_once('=')
        .ok_or_else(|| ParamError::Syntax {
            line: 0,
            reason: format!("override `{assignment}` is not of the form KEY=VALUE"),
        })?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

pub fn parse_param_file(text: &str) -> Result<NetworkParams, ParamError> {
    let mut params = NetworkParams::default();
    let mut seen = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ParamError::Syntax {
            line: idx + 1,
            reason: format!("expected `key = value unit`, got `{line}`"),
        })?;
        let key = key.trim();
        if kind_of(key).is_none() {
            return Err(ParamError::UnknownKey {
                key: key.to_string(),
            });
        }
        if seen.contains(&key) {
            return Err(ParamError::Syntax {
                line: idx + 1,
                reason: format!("duplicate key `{key}`"),
            });
        }
        seen.push(key);
        apply_assignment(&mut params, key, value)?;
    }
    params.validate()?;
    Ok(params)
}

/// Serializes to the file format in SI units. Values are written with the
/// shortest round-trip representation, so parsing the output reproduces
/// `params` exactly.
pub fn to_param_file(params: &NetworkParams) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| {
        out.push_str(&format!("{k} = {v}\n"));
    };
    line("bs_intensity", format!("{} per_m2", params.bs_intensity));
    line("ue_intensity", format!("{} per_m2", params.ue_intensity));
    line(
        "potential_d2d_intensity",
        format!("{} per_m2", params.potential_d2d_intensity),
    );
    line("max_tx_power", format!("{} W", params.max_tx_power));
    line(
        "receiver_sensitivity",
        format!("{} W", params.receiver_sensitivity),
    );
    line("cutoff_threshold", format!("{} W", params.cutoff_threshold));
    line("pathloss_cellular", format!("{}", params.pathloss_cellular));
    line("pathloss_d2d", format!("{}", params.pathloss_d2d));
    line("bias", params.bias.to_string());
    line("sinr_threshold", format!("{}", params.sinr_threshold));
    line("noise_power", format!("{} W", params.noise_power));
    line("num_channels", format!("{}", params.num_channels));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE: &str = "\
# reference point
bs_intensity = 5 per_km2
ue_intensity = 50 per_km2
potential_d2d_intensity = 25 per_km2
max_tx_power = 1 W
receiver_sensitivity = -90 dBm
cutoff_threshold = -70dBm
pathloss_cellular = 4
pathloss_d2d = 4
bias = 1
sinr_threshold = 0 dB
noise_power = -90 dBm   # thermal
num_channels = 1
";

    #[test]
    fn reference_file_matches_defaults() {
        let p = parse_param_file(REFERENCE).unwrap();
        let d = NetworkParams::default();
        assert_eq!(p.num_channels, d.num_channels);
        assert_eq!(p.bias, d.bias);
        for (a, b) in [
            (p.bs_intensity, d.bs_intensity),
            (p.cutoff_threshold, d.cutoff_threshold),
            (p.noise_power, d.noise_power),
            (p.sinr_threshold, d.sinr_threshold),
        ] {
            assert!(((a - b) / b).abs() < 1e-14);
        }
    }

    #[test]
    fn infinite_bias() {
        let p = parse_param_file("bias = inf\n").unwrap();
        assert_eq!(p.bias, Bias::Infinite);
    }

    #[test]
    fn errors_name_the_key() {
        match parse_param_file("cutoff_threshold = -70 dBW\n") {
            Err(ParamError::BadUnit { key, unit, .. }) => {
                assert_eq!(key, "cutoff_threshold");
                assert_eq!(unit, "dBW");
            }
            other => panic!("{other:?}"),
        }
        match parse_param_file("frobnicate = 3\n") {
            Err(ParamError::UnknownKey { key }) => assert_eq!(key, "frobnicate"),
            other => panic!("{other:?}"),
        }
        match parse_param_file("bs_intensity = 5\n") {
            Err(ParamError::BadUnit { key, .. }) => assert_eq!(key, "bs_intensity"),
            other => panic!("{other:?}"),
        }
        match parse_param_file("pathloss_d2d = 1.5\n") {
            Err(ParamError::Invalid { key, .. }) => assert_eq!(key, "pathloss_d2d"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_param_file("bias 1\n"),
            Err(ParamError::Syntax { line: 1, .. })
        ));
        assert!(parse_param_file("bias = 1\nbias = 2\n").is_err());
        assert!(parse_param_file("num_channels = 1.5\n").is_err());
    }

    #[test]
    fn aliases_and_overrides() {
        let mut p = NetworkParams::default();
        let (k, v) = parse_override("rho_o=-80 dBm").unwrap();
        apply_assignment(&mut p, &k, &v).unwrap();
        assert!((p.cutoff_threshold - 1e-11).abs() < 1e-24);
        apply_assignment(&mut p, "T_d", "inf").unwrap();
        assert_eq!(p.bias, Bias::Infinite);
        apply_assignment(&mut p, "λ", "2per_km2").unwrap();
        assert!((p.bs_intensity - 2e-6).abs() < 1e-20);
        assert!(parse_override("novalue").is_err());
    }

    #[test]
    fn serialization_round_trips_exactly() {
        let mut p = parse_param_file(REFERENCE).unwrap();
        p.bias = Bias::Finite(0.37);
        p.cutoff_threshold = 3.3e-11;
        let back = parse_param_file(&to_param_file(&p)).unwrap();
        assert_eq!(back, p);
        p.bias = Bias::Infinite;
        assert_eq!(parse_param_file(&to_param_file(&p)).unwrap(), p);
    }
}
