use rand::Rng;
use rand_distr::Exp1;

use super::realize::{Realization, UeMode};
use super::{stream_rng, SimulationConfig, PHASE_MEASURE};
use crate::model::{NetworkParams, UeCase};

/// Numerator/denominator pair of a ratio metric. Campaign aggregation uses
/// the ratio estimator Σnum / Σden.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Tally {
    pub num: f64,
    pub den: f64,
}

impl Tally {
    pub fn add(&mut self, value: f64) {
        self.num += value;
        self.den += 1.0;
    }

    pub fn count(&mut self, hit: bool) {
        self.add(if hit { 1.0 } else { 0.0 });
    }

    pub fn ratio(&self) -> f64 {
        self.num / self.den
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PowerTallies {
    pub d2d_mode: Tally,
    pub case2_cellular: Tally,
    pub case4_cellular: Tally,
    pub scheduled_cellular: Tally,
    /// √P over scheduled cellular UEs.
    pub scheduled_cellular_sqrt: Tally,
    /// √P over all cellular-mode UEs present before saturation.
    pub cellular_mode_sqrt: Tally,
    /// Power in the selected mode of covered potential D2D UEs.
    pub potential_d2d: Tally,
}

/// Conditional Laplace transforms 𝔼[e^{−sI} | geometry] averaged over
/// receivers, one entry per probe threshold.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LtProbeTallies {
    pub cellular_on_bs: Vec<Tally>,
    pub d2d_on_bs: Vec<Tally>,
    pub cellular_on_d2d: Vec<Tally>,
    pub d2d_on_d2d: Vec<Tally>,
}

/// Raw per-realization measurements from the inner window.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SampleMetrics {
    pub bs_count: usize,
    pub ue_count: usize,
    pub inserted_count: usize,
    /// Per SINR threshold.
    pub cellular_outage: Vec<Tally>,
    pub d2d_outage: Vec<Tally>,
    pub cellular_log_rate: Tally,
    pub d2d_log_rate: Tally,
    /// UEs farther than the cellular inversion range from their nearest BS.
    pub cellular_truncation: Tally,
    /// Potential D2D UEs whose D2D link exceeds P_u.
    pub d2d_truncation: Tally,
    pub potential_fraction: Tally,
    /// D2D mode among admitted potential D2D UEs (cases #3 and #4).
    pub mode_d2d_fraction: Tally,
    /// D2D mode among covered potential D2D UEs (case #4).
    pub case4_d2d_fraction: Tally,
    pub power: PowerTallies,
    pub lt_probe: LtProbeTallies,
}

fn path_gain(d2: f64, eta: f64) -> f64 {
    if eta == 4.0 {
        1.0 / (d2 * d2)
    } else {
        d2.powf(-0.5 * eta)
    }
}

fn dist2(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)
}

struct Transmitter {
    ue: usize,
    position: [f64; 2],
    power: f64,
    is_d2d: bool,
}

struct Receiver {
    ue: usize,
    position: [f64; 2],
    eta: f64,
    inner: bool,
    is_d2d: bool,
}

pub fn measure(
    realization: &Realization,
    params: &NetworkParams,
    config: &SimulationConfig,
) -> SampleMetrics {
    measure_detailed(realization, params, config).0
}

/// Also returns the SINR of every scheduled probe-channel link, indexed like
/// `realization.ue_records`.
pub fn measure_detailed(
    realization: &Realization,
    params: &NetworkParams,
    config: &SimulationConfig,
) -> (SampleMetrics, Vec<Option<f64>>) {
    let (lo, hi) = config.inner_bounds();
    let inside = |p: [f64; 2]| p[0] >= lo && p[0] <= hi && p[1] >= lo && p[1] <= hi;
    let rho = params.cutoff_threshold;
    let (eta_c, eta_d) = (params.pathloss_cellular, params.pathloss_d2d);
    let cap_distance = params.cellular_range();
    let mut m = SampleMetrics {
        bs_count: realization.bs_points.len(),
        cellular_outage: vec![Tally::default(); config.sinr_thresholds.len()],
        d2d_outage: vec![Tally::default(); config.sinr_thresholds.len()],
        lt_probe: LtProbeTallies {
            cellular_on_bs: vec![Tally::default(); config.lt_probe_thresholds.len()],
            d2d_on_bs: vec![Tally::default(); config.lt_probe_thresholds.len()],
            cellular_on_d2d: vec![Tally::default(); config.lt_probe_thresholds.len()],
            d2d_on_d2d: vec![Tally::default(); config.lt_probe_thresholds.len()],
        },
        ..SampleMetrics::default()
    };

    let mut transmitters = Vec::new();
    let mut receivers = Vec::new();
    for (i, ue) in realization.ue_records.iter().enumerate() {
        if ue.inserted {
            m.inserted_count += 1;
        }
        if ue.scheduled && ue.channel == 0 {
            transmitters.push(Transmitter {
                ue: i,
                position: ue.position,
                power: ue.tx_power,
                is_d2d: ue.mode == UeMode::D2d,
            });
            match ue.mode {
                UeMode::Cellular => {
                    let b = ue.nearest_bs.expect("scheduled cellular UE has a BS");
                    let position = realization.bs_points[b];
                    receivers.push(Receiver {
                        ue: i,
                        position,
                        eta: eta_c,
                        inner: inside(position),
                        is_d2d: false,
                    });
                }
                UeMode::D2d => receivers.push(Receiver {
                    ue: i,
                    position: ue.d2d_receiver.expect("D2D UE has a receiver"),
                    eta: eta_d,
                    inner: inside(ue.position),
                    is_d2d: true,
                }),
                UeMode::Silent => unreachable!("silent UEs are never scheduled"),
            }
        }
        if ue.scheduled && ue.mode == UeMode::Cellular {
            m.power.scheduled_cellular.add(ue.tx_power);
            m.power.scheduled_cellular_sqrt.add(ue.tx_power.sqrt());
        }
        if ue.inserted || !inside(ue.position) {
            continue;
        }
        m.ue_count += 1;
        m.cellular_truncation
            .count(ue.cellular_distance > cap_distance);
        m.potential_fraction.count(ue.is_potential_d2d);
        if ue.is_potential_d2d {
            m.d2d_truncation.count(ue.d2d_truncated);
        }
        let case = ue.case.expect("scheduled realization");
        if matches!(case, UeCase::UncoveredPotential | UeCase::CoveredPotential) {
            m.mode_d2d_fraction.count(ue.mode == UeMode::D2d);
        }
        if case == UeCase::CoveredPotential {
            m.case4_d2d_fraction.count(ue.mode == UeMode::D2d);
            m.power.potential_d2d.add(ue.tx_power);
        }
        match (ue.mode, case) {
            (UeMode::D2d, _) => m.power.d2d_mode.add(ue.tx_power),
            (UeMode::Cellular, UeCase::CoveredNonPotential) => {
                m.power.case2_cellular.add(ue.tx_power)
            }
            (UeMode::Cellular, UeCase::CoveredPotential) => m.power.case4_cellular.add(ue.tx_power),
            _ => {}
        }
        if ue.mode == UeMode::Cellular {
            m.power.cellular_mode_sqrt.add(ue.tx_power.sqrt());
        }
    }

    let probe_s: Vec<f64> = config.lt_probe_thresholds.iter().map(|t| t / rho).collect();
    let mut rng = stream_rng(
        realization.rng_seed,
        realization.stream_index,
        PHASE_MEASURE,
    );
    let mut sinr_out = vec![None; realization.ue_records.len()];
    let mut log_c = vec![0.0; probe_s.len()];
    let mut log_d = vec![0.0; probe_s.len()];
    for rx in &receivers {
        let signal = rho * rng.sample::<f64, _>(Exp1);
        let mut interference = 0.0;
        log_c.iter_mut().for_each(|v| *v = 0.0);
        log_d.iter_mut().for_each(|v| *v = 0.0);
        for tx in &transmitters {
            if tx.ue == rx.ue {
                continue;
            }
            let h: f64 = rng.sample(Exp1);
            let mean_rx = tx.power * path_gain(dist2(tx.position, rx.position), rx.eta);
            interference += mean_rx * h;
            if rx.inner {
                let logs = if tx.is_d2d { &mut log_d } else { &mut log_c };
                for (acc, s) in logs.iter_mut().zip(&probe_s) {
                    *acc -= (s * mean_rx).ln_1p();
                }
            }
        }
        let sinr = signal / (params.noise_power + interference);
        sinr_out[rx.ue] = Some(sinr);
        if !rx.inner {
            continue;
        }
        let (outage, rate) = if rx.is_d2d {
            (&mut m.d2d_outage, &mut m.d2d_log_rate)
        } else {
            (&mut m.cellular_outage, &mut m.cellular_log_rate)
        };
        for (tally, theta) in outage.iter_mut().zip(&config.sinr_thresholds) {
            tally.count(sinr <= *theta);
        }
        rate.add(sinr.ln_1p());
        let (c, d) = if rx.is_d2d {
            (&mut m.lt_probe.cellular_on_d2d, &mut m.lt_probe.d2d_on_d2d)
        } else {
            (&mut m.lt_probe.cellular_on_bs, &mut m.lt_probe.d2d_on_bs)
        };
        for k in 0..probe_s.len() {
            c[k].add(log_c[k].exp());
            d[k].add(log_d[k].exp());
        }
    }
    (m, sinr_out)
}
