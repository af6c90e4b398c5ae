use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::grid::GridIndex;
use super::{stream_rng, SimulationConfig, PHASE_REALIZE, PHASE_SCHEDULE};
use crate::error::{Error, SimulationError};
use crate::model::{derive, NetworkParams, UeCase};

/// Upper bound on saturation rounds before giving up.
pub const SATURATION_ROUNDS: usize = 1000;
/// Candidate points drawn per idle BS in each saturation round.
pub const SATURATION_BATCH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UeMode {
    /// Not transmitting: truncated, or an uncovered potential D2D UE that
    /// failed the selection rule.
    Silent,
    Cellular,
    D2d,
}

impl UeMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            UeMode::Silent => "none",
            UeMode::Cellular => "cellular",
            UeMode::D2d => "d2d",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UeRecord {
    pub position: [f64; 2],
    /// Has a D2D receiver within R_max (before power truncation).
    pub is_potential_d2d: bool,
    pub d2d_receiver: Option<[f64; 2]>,
    pub nearest_bs: Option<usize>,
    /// Distance to the nearest BS, meters (infinite without BSs).
    pub cellular_distance: f64,
    /// Set by scheduling; `None` until then.
    pub case: Option<UeCase>,
    /// Potential D2D UE whose D2D link needs more than P_u.
    pub d2d_truncated: bool,
    pub mode: UeMode,
    /// Channel-inversion power in the selected mode, watts (0 when silent).
    pub tx_power: f64,
    pub scheduled: bool,
    /// Index of the channel used by a D2D transmitter; the probe channel is 0.
    pub channel: u32,
    /// Added by the saturation procedure.
    pub inserted: bool,
}

impl UeRecord {
    pub fn d2d_distance(&self) -> Option<f64> {
        self.d2d_receiver
            .map(|r| ((r[0] - self.position[0]).powi(2) + (r[1] - self.position[1]).powi(2)).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub rng_seed: u64,
    pub stream_index: u64,
    pub window_side: f64,
    pub bs_points: Vec<[f64; 2]>,
    pub ue_records: Vec<UeRecord>,
    /// Scheduled cellular UE of each BS on the probe channel.
    pub serving_ue: Vec<Option<usize>>,
    pub saturation_rounds: usize,
}

fn uniform_in_window<R: Rng>(rng: &mut R, side: f64) -> [f64; 2] {
    [rng.random::<f64>() * side, rng.random::<f64>() * side]
}

fn uniform_in_disk<R: Rng>(rng: &mut R, center: [f64; 2], radius: f64) -> [f64; 2] {
    let r = radius * rng.random::<f64>().sqrt();
    let phi = 2.0 * PI * rng.random::<f64>();
    [center[0] + r * phi.cos(), center[1] + r * phi.sin()]
}

fn poisson_count<R: Rng>(rng: &mut R, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive finite mean");
    let n: f64 = dist.sample(rng);
    n as usize
}

/// Draws BSs, UEs, potential-D2D flags and D2D receivers.
pub fn realize_network(
    params: &NetworkParams,
    config: &SimulationConfig,
    stream_index: u64,
) -> Result<Realization, Error> {
    params.validate()?;
    config.validate()?;
    let derived = derive(params)?;
    let mut rng = stream_rng(config.rng_seed, stream_index, PHASE_REALIZE);
    let side = config.window_side;
    let area = config.area();
    let n_bs = poisson_count(&mut rng, params.bs_intensity * area);
    let bs_points: Vec<[f64; 2]> = (0..n_bs)
        .map(|_| uniform_in_window(&mut rng, side))
        .collect();
    let index = GridIndex::new(&bs_points, side);
    let n_ue = poisson_count(&mut rng, params.ue_intensity * area);
    let potential_prob = params.potential_d2d_intensity / params.ue_intensity;
    let mut ue_records = Vec::with_capacity(n_ue);
    for _ in 0..n_ue {
        let position = uniform_in_window(&mut rng, side);
        let is_potential_d2d = rng.random::<f64>() < potential_prob;
        let d2d_receiver =
            is_potential_d2d.then(|| uniform_in_disk(&mut rng, position, derived.max_d2d_range));
        let (nearest_bs, cellular_distance) = match index.nearest(position) {
            Some((i, d2)) => (Some(i), d2.sqrt()),
            None => (None, f64::INFINITY),
        };
        ue_records.push(UeRecord {
            position,
            is_potential_d2d,
            d2d_receiver,
            nearest_bs,
            cellular_distance,
            case: None,
            d2d_truncated: false,
            mode: UeMode::Silent,
            tx_power: 0.0,
            scheduled: false,
            channel: 0,
            inserted: false,
        });
    }
    Ok(Realization {
        rng_seed: config.rng_seed,
        stream_index,
        window_side: side,
        serving_ue: vec![None; bs_points.len()],
        bs_points,
        ue_records,
        saturation_rounds: 0,
    })
}

/// Applies power truncation, the case taxonomy, mode selection and
/// scheduling, then saturates idle BSs if enabled.
///
/// Mode selection compares channel-inversion powers with the bias for every
/// potential D2D UE that survived D2D truncation. Covered UEs that fail the
/// rule go cellular; uncovered ones stay silent.
pub fn classify_and_schedule(
    mut realization: Realization,
    params: &NetworkParams,
    saturate: bool,
) -> Result<Realization, Error> {
    params.validate()?;
    let rho = params.cutoff_threshold;
    let pu = params.max_tx_power;
    let (eta_c, eta_d) = (params.pathloss_cellular, params.pathloss_d2d);
    let channels = params.num_channels;
    let mut rng = stream_rng(
        realization.rng_seed,
        realization.stream_index,
        PHASE_SCHEDULE,
    );
    let n_bs = realization.bs_points.len();
    let mut candidates: Vec<Vec<usize>> = vec![Vec::new(); n_bs];

    for (i, ue) in realization.ue_records.iter_mut().enumerate() {
        let cellular_power = rho * ue.cellular_distance.powf(eta_c);
        let covered = ue.nearest_bs.is_some() && cellular_power <= pu;
        let d2d_power = ue.d2d_distance().map(|d| rho * d.powf(eta_d));
        ue.d2d_truncated = matches!(d2d_power, Some(p) if p > pu);
        let admitted = matches!(d2d_power, Some(p) if p <= pu);
        let case = UeCase::classify(covered, admitted);
        ue.case = Some(case);
        ue.scheduled = false;
        ue.channel = 0;
        let selects_d2d = admitted
            && params
                .bias
                .selects_d2d(d2d_power.unwrap_or(0.0), cellular_power);
        if selects_d2d {
            ue.mode = UeMode::D2d;
            ue.tx_power = d2d_power.unwrap_or(0.0);
            ue.scheduled = true;
            ue.channel = if channels > 1 {
                rng.random_range(0..channels)
            } else {
                0
            };
        } else if covered {
            ue.mode = UeMode::Cellular;
            ue.tx_power = cellular_power;
            candidates[ue.nearest_bs.expect("covered implies a BS")].push(i);
        } else {
            ue.mode = UeMode::Silent;
            ue.tx_power = 0.0;
        }
    }

    let mut serving = vec![None; n_bs];
    for (b, list) in candidates.iter().enumerate() {
        if !list.is_empty() {
            let pick = list[rng.random_range(0..list.len())];
            realization.ue_records[pick].scheduled = true;
            serving[b] = Some(pick);
        }
    }
    realization.serving_ue = serving;
    if saturate {
        saturate_idle_cells(&mut realization, params, &mut rng)?;
    }
    Ok(realization)
}

/// Activates every idle BS with an inserted cellular UE, uniform over the
/// part of its cell (inside the window) that channel inversion can serve.
fn saturate_idle_cells<R: Rng>(
    realization: &mut Realization,
    params: &NetworkParams,
    rng: &mut R,
) -> Result<(), Error> {
    let mut idle: Vec<usize> = (0..realization.bs_points.len())
        .filter(|&b| realization.serving_ue[b].is_none())
        .collect();
    if idle.is_empty() {
        return Ok(());
    }
    let side = realization.window_side;
    let index = GridIndex::new(&realization.bs_points, side);
    let radius = params.cellular_range();
    let mut rounds = 0;
    while !idle.is_empty() {
        if rounds == SATURATION_ROUNDS {
            return Err(SimulationError::SaturationExhausted {
                idle: idle.len(),
                rounds,
            }
            .into());
        }
        rounds += 1;
        let mut still_idle = Vec::new();
        for &b in &idle {
            let center = realization.bs_points[b];
            let mut accepted = None;
            for _ in 0..SATURATION_BATCH {
                let q = uniform_in_disk(rng, center, radius);
                if !(0.0..=side).contains(&q[0]) || !(0.0..=side).contains(&q[1]) {
                    continue;
                }
                if let Some((nb, d2)) = index.nearest(q) {
                    if nb == b {
                        accepted = Some((q, d2.sqrt()));
                        break;
                    }
                }
            }
            match accepted {
                Some((q, d)) => {
                    let idx = realization.ue_records.len();
                    realization.ue_records.push(UeRecord {
                        position: q,
                        is_potential_d2d: false,
                        d2d_receiver: None,
                        nearest_bs: Some(b),
                        cellular_distance: d,
                        case: Some(UeCase::CoveredNonPotential),
                        d2d_truncated: false,
                        mode: UeMode::Cellular,
                        tx_power: (params.cutoff_threshold * d.powf(params.pathloss_cellular))
                            .min(params.max_tx_power),
                        scheduled: true,
                        channel: 0,
                        inserted: true,
                    });
                    realization.serving_ue[b] = Some(idx);
                }
                None => still_idle.push(b),
            }
        }
        idle = still_idle;
    }
    realization.saturation_rounds = rounds;
    Ok(())
}

/// One record per UE: `x y case mode tx_power_w sinr_linear scheduled`,
/// tab-separated with a header row. `sinr` is indexed like
/// `realization.ue_records`; missing values are written as `NA`.
pub fn write_dump<W: Write>(
    realization: &Realization,
    sinr: &[Option<f64>],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "x\ty\tcase\tmode\ttx_power_w\tsinr_linear\tscheduled")?;
    for (i, ue) in realization.ue_records.iter().enumerate() {
        let case = ue
            .case
            .map_or_else(|| "NA".to_string(), |c| c.label().to_string());
        let s = sinr
            .get(i)
            .copied()
            .flatten()
            .map_or_else(|| "NA".to_string(), |v| format!("{v:e}"));
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:e}\t{}\t{}",
            ue.position[0],
            ue.position[1],
            case,
            ue.mode.as_str(),
            ue.tx_power,
            s,
            u8::from(ue.scheduled)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Bias;

    fn small_config() -> SimulationConfig {
        SimulationConfig {
            window_side: 4000.0,
            num_realizations: 1,
            ..SimulationConfig::default()
        }
    }

    fn scheduled(params: &NetworkParams, stream: u64) -> Realization {
        let r = realize_network(params, &small_config(), stream).unwrap();
        classify_and_schedule(r, params, true).unwrap()
    }

    #[test]
    fn same_stream_is_bitwise_identical() {
        let p = NetworkParams::default();
        let c = small_config();
        assert_eq!(
            realize_network(&p, &c, 3).unwrap(),
            realize_network(&p, &c, 3).unwrap()
        );
        assert_ne!(
            realize_network(&p, &c, 3).unwrap(),
            realize_network(&p, &c, 4).unwrap()
        );
        assert_eq!(scheduled(&p, 9), scheduled(&p, 9));
    }

    #[test]
    fn schedule_invariants() {
        let p = NetworkParams::default();
        for stream in 0..5 {
            let r = scheduled(&p, stream);
            let mut per_bs = vec![0usize; r.bs_points.len()];
            for ue in &r.ue_records {
                if ue.mode == UeMode::Cellular && ue.scheduled {
                    let b = ue.nearest_bs.unwrap();
                    per_bs[b] += 1;
                    // received power at the serving BS is exactly ρ_o
                    let rx = ue.tx_power * ue.cellular_distance.powf(-p.pathloss_cellular);
                    assert!(((rx - p.cutoff_threshold) / p.cutoff_threshold).abs() < 1e-9);
                    assert!(ue.tx_power <= p.max_tx_power);
                }
                if ue.mode == UeMode::D2d {
                    assert!(ue.scheduled);
                    assert!(ue.tx_power <= p.max_tx_power);
                    let rx = ue.tx_power * ue.d2d_distance().unwrap().powf(-p.pathloss_d2d);
                    assert!(((rx - p.cutoff_threshold) / p.cutoff_threshold).abs() < 1e-9);
                    // interference at the nearest BS is bounded by T_d ρ_o
                    let at_bs = ue.tx_power * ue.cellular_distance.powf(-p.pathloss_cellular);
                    assert!(at_bs <= p.bias.as_f64() * p.cutoff_threshold * (1.0 + 1e-12));
                }
                let case = ue.case.unwrap();
                if !ue.inserted {
                    let covered = p.cutoff_threshold
                        * ue.cellular_distance.powf(p.pathloss_cellular)
                        <= p.max_tx_power;
                    assert_eq!(
                        matches!(case, UeCase::CoveredNonPotential | UeCase::CoveredPotential),
                        covered
                    );
                }
                if case == UeCase::Uncovered {
                    assert_eq!(ue.mode, UeMode::Silent);
                }
            }
            assert!(per_bs.iter().all(|&n| n == 1), "stream {stream}");
        }
    }

    #[test]
    fn bias_extremes() {
        let p0 = NetworkParams {
            bias: Bias::Finite(0.0),
            ..NetworkParams::default()
        };
        let r = scheduled(&p0, 1);
        assert!(r.ue_records.iter().all(|u| u.mode != UeMode::D2d));
        let pinf = NetworkParams {
            bias: Bias::Infinite,
            ..NetworkParams::default()
        };
        let r = scheduled(&pinf, 1);
        for ue in &r.ue_records {
            if ue.is_potential_d2d && !ue.d2d_truncated {
                assert_eq!(ue.mode, UeMode::D2d);
            }
        }
    }

    #[test]
    fn saturation_can_be_disabled() {
        let p = NetworkParams {
            ue_intensity: 5e-6,
            potential_d2d_intensity: 0.0,
            ..NetworkParams::default()
        };
        let r = realize_network(&p, &small_config(), 2).unwrap();
        let r = classify_and_schedule(r, &p, false).unwrap();
        assert!(r.serving_ue.iter().any(|s| s.is_none()));
        assert!(r.ue_records.iter().all(|u| !u.inserted));
    }

    #[test]
    fn dump_has_one_line_per_ue() {
        let p = NetworkParams::default();
        let r = scheduled(&p, 0);
        let mut buf = Vec::new();
        write_dump(&r, &[], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), r.ue_records.len() + 1);
        assert!(text.starts_with("x\ty\tcase\tmode\ttx_power_w\tsinr_linear\tscheduled\n"));
    }
}
