//! Monte Carlo realization of the network.
//!
//! One realization draws BS and UE point processes in a square window,
//! classifies and schedules UEs, and measures SINR at every scheduled
//! receiver in the inner (guarded) window. Realizations are independent and
//! seeded per stream, so a campaign is reproducible regardless of how many
//! threads run it.

mod campaign;
mod grid;
mod measure;
mod realize;

pub use campaign::{
    aggregate, run_campaign, CampaignResult, Estimate, LtProbeEstimates, PowerEstimates,
};
pub use grid::GridIndex;
pub use measure::{measure, measure_detailed, LtProbeTallies, PowerTallies, SampleMetrics, Tally};
pub use realize::{
    classify_and_schedule, realize_network, write_dump, Realization, UeMode, UeRecord,
    SATURATION_BATCH, SATURATION_ROUNDS,
};

use crate::error::SimulationError;
use crate::units::{db_to_linear, M2_PER_KM2};

/// RNG phases within one stream.
pub(crate) const PHASE_REALIZE: u64 = 0;
pub(crate) const PHASE_SCHEDULE: u64 = 1;
pub(crate) const PHASE_MEASURE: u64 = 2;
const PHASES: u64 = 4;

pub(crate) fn stream_rng(seed: u64, stream_index: u64, phase: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_index * PHASES + phase);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    /// Side of the square window, meters.
    pub window_side: f64,
    /// Fraction of the side excluded on each border when measuring.
    pub guard_fraction: f64,
    pub num_realizations: usize,
    pub rng_seed: u64,
    pub saturation_enabled: bool,
    /// SINR thresholds (linear) at which outage is tallied.
    pub sinr_thresholds: Vec<f64>,
    /// SINR thresholds (linear) at which the empirical interference
    /// transform is probed, at s = θ/ρ_o.
    pub lt_probe_thresholds: Vec<f64>,
}

/// −10, −8, …, 20 dB.
pub fn default_threshold_grid_db() -> Vec<f64> {
    (0..=15).map(|k| -10.0 + 2.0 * k as f64).collect()
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            window_side: 10_000.0,
            guard_fraction: 0.2,
            num_realizations: 10_000,
            rng_seed: 1,
            saturation_enabled: true,
            sinr_thresholds: default_threshold_grid_db()
                .into_iter()
                .map(db_to_linear)
                .collect(),
            lt_probe_thresholds: vec![1.0],
        }
    }
}

impl SimulationConfig {
    pub fn with_window_km2(mut self, area_km2: f64) -> Self {
        self.window_side = (area_km2 * M2_PER_KM2).sqrt();
        self
    }

    pub fn area(&self) -> f64 {
        self.window_side * self.window_side
    }

    /// Inner measurement window `[lo, hi]²`.
    pub fn inner_bounds(&self) -> (f64, f64) {
        let g = self.guard_fraction * self.window_side;
        (g, self.window_side - g)
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        let bad = |m: String| Err(SimulationError::Config(m));
        if !(self.window_side > 0.0) || !self.window_side.is_finite() {
            return bad(format!(
                "window_side must be finite and > 0, got {}",
                self.window_side
            ));
        }
        if !(0.0..0.5).contains(&self.guard_fraction) {
            return bad(format!(
                "guard_fraction must lie in [0, 0.5), got {}",
                self.guard_fraction
            ));
        }
        if self.num_realizations == 0 {
            return bad("num_realizations must be at least 1".into());
        }
        if self
            .sinr_thresholds
            .iter()
            .any(|t| !(*t > 0.0) || !t.is_finite())
        {
            return bad("SINR thresholds must be finite and > 0".into());
        }
        if self
            .lt_probe_thresholds
            .iter()
            .any(|t| !(*t > 0.0) || !t.is_finite())
        {
            return bad("probe thresholds must be finite and > 0".into());
        }
        Ok(())
    }

    /// Logs a warning when the window holds fewer than 50 BSs on average.
    pub fn check_scale(&self, bs_intensity: f64) {
        let expected = self.area() * bs_intensity;
        if expected < 50.0 {
            log::warn!("simulation window holds only {expected:.1} base stations on average; edge effects will dominate");
        }
    }
}
