use rayon::prelude::*;

use super::measure::{measure, SampleMetrics, Tally};
use super::realize::{classify_and_schedule, realize_network};
use super::SimulationConfig;
use crate::error::Error;
use crate::model::NetworkParams;

/// Campaign-level estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    /// Total denominator (number of observations pooled).
    pub observations: f64,
}

impl Estimate {
    /// Ratio estimator Σa/Σb over realizations with the linearized
    /// (delta-method) standard error.
    pub fn from_tallies<'a, I: IntoIterator<Item = &'a Tally>>(tallies: I) -> Self {
        let items: Vec<Tally> = tallies.into_iter().copied().collect();
        let k = items.len() as f64;
        let (sa, sb) = items
            .iter()
            .fold((0.0, 0.0), |(a, b), t| (a + t.num, b + t.den));
        if sb == 0.0 {
            return Self {
                mean: f64::NAN,
                std_error: f64::NAN,
                observations: 0.0,
            };
        }
        let r = sa / sb;
        let std_error = if items.len() < 2 {
            f64::INFINITY
        } else {
            let ss: f64 = items.iter().map(|t| (t.num - r * t.den).powi(2)).sum();
            (k / (k - 1.0) * ss).sqrt() / sb
        };
        Self {
            mean: r,
            std_error,
            observations: sb,
        }
    }

    /// Plain sample mean of per-realization values.
    pub fn from_values(values: &[f64]) -> Self {
        let k = values.len() as f64;
        if values.is_empty() {
            return Self {
                mean: f64::NAN,
                std_error: f64::NAN,
                observations: 0.0,
            };
        }
        let mean = values.iter().sum::<f64>() / k;
        let std_error = if values.len() < 2 {
            f64::INFINITY
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0) / k).sqrt()
        };
        Self {
            mean,
            std_error,
            observations: k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerEstimates {
    pub d2d_mode: Estimate,
    pub case2_cellular: Estimate,
    pub case4_cellular: Estimate,
    pub scheduled_cellular: Estimate,
    pub scheduled_cellular_sqrt: Estimate,
    pub cellular_mode_sqrt: Estimate,
    pub potential_d2d: Estimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LtProbeEstimates {
    pub thresholds: Vec<f64>,
    pub cellular_on_bs: Vec<Estimate>,
    pub d2d_on_bs: Vec<Estimate>,
    pub cellular_on_d2d: Vec<Estimate>,
    pub d2d_on_d2d: Vec<Estimate>,
}

/// Aggregated campaign output.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignResult {
    pub realizations: usize,
    pub sinr_thresholds: Vec<f64>,
    pub cellular_outage: Vec<Estimate>,
    pub d2d_outage: Vec<Estimate>,
    pub cellular_log_rate: Estimate,
    pub d2d_log_rate: Estimate,
    pub cellular_truncation: Estimate,
    pub d2d_truncation: Estimate,
    pub potential_fraction: Estimate,
    pub mode_d2d_fraction: Estimate,
    pub case4_d2d_fraction: Estimate,
    pub power: PowerEstimates,
    pub lt_probe: LtProbeEstimates,
    pub bs_count: Estimate,
    pub inserted_per_realization: Estimate,
}

fn column<F: Fn(&SampleMetrics) -> &Vec<Tally>>(
    samples: &[SampleMetrics],
    n: usize,
    f: F,
) -> Vec<Estimate> {
    (0..n)
        .map(|i| Estimate::from_tallies(samples.iter().map(|s| &f(s)[i])))
        .collect()
}

fn scalar<F: Fn(&SampleMetrics) -> &Tally>(samples: &[SampleMetrics], f: F) -> Estimate {
    Estimate::from_tallies(samples.iter().map(f))
}

/// Reduces per-realization samples in order.
pub fn aggregate(samples: &[SampleMetrics], config: &SimulationConfig) -> CampaignResult {
    let nt = config.sinr_thresholds.len();
    let np = config.lt_probe_thresholds.len();
    let counts: Vec<f64> = samples.iter().map(|s| s.bs_count as f64).collect();
    let inserted: Vec<f64> = samples.iter().map(|s| s.inserted_count as f64).collect();
    CampaignResult {
        realizations: samples.len(),
        sinr_thresholds: config.sinr_thresholds.clone(),
        cellular_outage: column(samples, nt, |s| &s.cellular_outage),
        d2d_outage: column(samples, nt, |s| &s.d2d_outage),
        cellular_log_rate: scalar(samples, |s| &s.cellular_log_rate),
        d2d_log_rate: scalar(samples, |s| &s.d2d_log_rate),
        cellular_truncation: scalar(samples, |s| &s.cellular_truncation),
        d2d_truncation: scalar(samples, |s| &s.d2d_truncation),
        potential_fraction: scalar(samples, |s| &s.potential_fraction),
        mode_d2d_fraction: scalar(samples, |s| &s.mode_d2d_fraction),
        case4_d2d_fraction: scalar(samples, |s| &s.case4_d2d_fraction),
        power: PowerEstimates {
            d2d_mode: scalar(samples, |s| &s.power.d2d_mode),
            case2_cellular: scalar(samples, |s| &s.power.case2_cellular),
            case4_cellular: scalar(samples, |s| &s.power.case4_cellular),
            scheduled_cellular: scalar(samples, |s| &s.power.scheduled_cellular),
            scheduled_cellular_sqrt: scalar(samples, |s| &s.power.scheduled_cellular_sqrt),
            cellular_mode_sqrt: scalar(samples, |s| &s.power.cellular_mode_sqrt),
            potential_d2d: scalar(samples, |s| &s.power.potential_d2d),
        },
        lt_probe: LtProbeEstimates {
            thresholds: config.lt_probe_thresholds.clone(),
            cellular_on_bs: column(samples, np, |s| &s.lt_probe.cellular_on_bs),
            d2d_on_bs: column(samples, np, |s| &s.lt_probe.d2d_on_bs),
            cellular_on_d2d: column(samples, np, |s| &s.lt_probe.cellular_on_d2d),
            d2d_on_d2d: column(samples, np, |s| &s.lt_probe.d2d_on_d2d),
        },
        bs_count: Estimate::from_values(&counts),
        inserted_per_realization: Estimate::from_values(&inserted),
    }
}

/// Runs `config.num_realizations` independent realizations in parallel and
/// aggregates them. Stream `i` drives realization `i`, so the output
/// depends only on the seed and the realization count.
pub fn run_campaign(
    params: &NetworkParams,
    config: &SimulationConfig,
) -> Result<CampaignResult, Error> {
    params.validate()?;
    config.validate()?;
    config.check_scale(params.bs_intensity);
    let samples = (0..config.num_realizations as u64)
        .into_par_iter()
        .map(|i| {
            let r = realize_network(params, config, i)?;
            let r = classify_and_schedule(r, params, config.saturation_enabled)?;
            Ok(measure(&r, params, config))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(aggregate(&samples, config))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_estimator_reduces_to_binomial_se() {
        // equal denominators: SE equals the sample SE of the per-realization ratios
        let tallies: Vec<Tally> = [0.2, 0.4, 0.3, 0.5]
            .iter()
            .map(|&r| Tally {
                num: 10.0 * r,
                den: 10.0,
            })
            .collect();
        let est = Estimate::from_tallies(&tallies);
        let plain = Estimate::from_values(&[0.2, 0.4, 0.3, 0.5]);
        assert!((est.mean - plain.mean).abs() < 1e-15);
        assert!((est.std_error - plain.std_error).abs() < 1e-15);
        assert!(Estimate::from_tallies(&[]).mean.is_nan());
    }

    #[test]
    fn campaign_is_deterministic() {
        let p = NetworkParams::default();
        let c = SimulationConfig {
            window_side: 3000.0,
            num_realizations: 8,
            ..SimulationConfig::default()
        };
        assert_eq!(run_campaign(&p, &c).unwrap(), run_campaign(&p, &c).unwrap());
        let other = SimulationConfig {
            rng_seed: 2,
            ..c.clone()
        };
        assert_ne!(
            run_campaign(&p, &c).unwrap(),
            run_campaign(&p, &other).unwrap()
        );
    }
}
