//! Network parameters, derived geometric quantities, the UE case taxonomy,
//! and the D2D mode-selection probability.
//!
//! Everything is strict SI internally: watts, meters, points per m².

use std::f64::consts::PI;

use crate::error::{Error, ParamError};
use crate::specfun::lower_incomplete_gamma;
use crate::units::{dbm_to_watts, per_km2_to_per_m2};

/// D2D bias factor `T_d`. Infinity is a distinct variant so the formulas can
/// take analytic limits instead of multiplying through `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bias {
    Finite(f64),
    Infinite,
}

impl Bias {
    pub fn is_zero(&self) -> bool {
        matches!(self, Bias::Finite(t) if *t == 0.0)
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            Bias::Finite(t) => Some(*t),
            Bias::Infinite => None,
        }
    }

    /// `T_d` as an `f64`, with `Infinite` mapped to `f64::INFINITY`.
    /// Only for presentation and comparisons, never inside formulas.
    pub fn as_f64(&self) -> f64 {
        match self {
            Bias::Finite(t) => *t,
            Bias::Infinite => f64::INFINITY,
        }
    }

    /// Mode-selection rule `T_d · d2d_gain ≥ cellular_gain`, written on the
    /// channel-inversion powers: D2D iff `x_d ≤ T_d · x_c`.
    pub fn selects_d2d(&self, d2d_power: f64, cellular_power: f64) -> bool {
        match self {
            Bias::Infinite => true,
            Bias::Finite(t) => *t > 0.0 && d2d_power <= t * cellular_power,
        }
    }
}

impl std::fmt::Display for Bias {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Bias::Finite(t) => write!(f, "{t}"),
            Bias::Infinite => f.write_str("inf"),
        }
    }
}

/// Primitive model inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkParams {
    /// BS intensity λ, per m².
    pub bs_intensity: f64,
    /// UE intensity 𝒰, per m².
    pub ue_intensity: f64,
    /// Potential-D2D intensity 𝒟 ≤ 𝒰, per m².
    pub potential_d2d_intensity: f64,
    /// P_u, watts.
    pub max_tx_power: f64,
    /// ρ_min, watts.
    pub receiver_sensitivity: f64,
    /// ρ_o, watts.
    pub cutoff_threshold: f64,
    pub pathloss_cellular: f64,
    pub pathloss_d2d: f64,
    pub bias: Bias,
    /// θ, linear.
    pub sinr_threshold: f64,
    /// σ², watts.
    pub noise_power: f64,
    pub num_channels: u32,
}

impl Default for NetworkParams {
    /// The reference operating point: 5 BS/km², 50 UE/km² of which half are
    /// potential D2D, 1 W, ρ_min = −90 dBm, ρ_o = −70 dBm, η = 4, T_d = 1,
    /// θ = 0 dB, σ² = −90 dBm, one channel.
    fn default() -> Self {
        Self {
            bs_intensity: per_km2_to_per_m2(5.0),
            ue_intensity: per_km2_to_per_m2(50.0),
            potential_d2d_intensity: per_km2_to_per_m2(25.0),
            max_tx_power: 1.0,
            receiver_sensitivity: dbm_to_watts(-90.0),
            cutoff_threshold: dbm_to_watts(-70.0),
            pathloss_cellular: 4.0,
            pathloss_d2d: 4.0,
            bias: Bias::Finite(1.0),
            sinr_threshold: 1.0,
            noise_power: dbm_to_watts(-90.0),
            num_channels: 1,
        }
    }
}

impl NetworkParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        fn positive(key: &str, v: f64) -> Result<(), ParamError> {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ParamError::invalid(
                    key,
                    format!("must be finite and > 0, got {v}"),
                ))
            }
        }
        positive("bs_intensity", self.bs_intensity)?;
        positive("ue_intensity", self.ue_intensity)?;
        if !(self.potential_d2d_intensity >= 0.0)
            || self.potential_d2d_intensity > self.ue_intensity
        {
            return Err(ParamError::invalid(
                "potential_d2d_intensity",
                format!(
                    "must lie in [0, ue_intensity = {}], got {}",
                    self.ue_intensity, self.potential_d2d_intensity
                ),
            ));
        }
        positive("max_tx_power", self.max_tx_power)?;
        positive("receiver_sensitivity", self.receiver_sensitivity)?;
        positive("cutoff_threshold", self.cutoff_threshold)?;
        if self.receiver_sensitivity > self.cutoff_threshold {
            return Err(ParamError::invalid(
                "receiver_sensitivity",
                "must not exceed cutoff_threshold",
            ));
        }
        if self.cutoff_threshold > self.max_tx_power {
            return Err(ParamError::invalid(
                "cutoff_threshold",
                "must not exceed max_tx_power",
            ));
        }
        for (key, eta) in [
            ("pathloss_cellular", self.pathloss_cellular),
            ("pathloss_d2d", self.pathloss_d2d),
        ] {
            if !(eta > 2.0) || !eta.is_finite() {
                return Err(ParamError::invalid(
                    key,
                    format!("path-loss exponent must be > 2, got {eta}"),
                ));
            }
        }
        if let Bias::Finite(t) = self.bias {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(ParamError::invalid(
                    "bias",
                    format!("must be >= 0 or `inf`, got {t}"),
                ));
            }
        }
        positive("sinr_threshold", self.sinr_threshold)?;
        if !(self.noise_power >= 0.0) || !self.noise_power.is_finite() {
            return Err(ParamError::invalid(
                "noise_power",
                "must be finite and >= 0",
            ));
        }
        if self.num_channels == 0 {
            return Err(ParamError::invalid("num_channels", "must be at least 1"));
        }
        Ok(())
    }

    pub fn pi_lambda(&self) -> f64 {
        PI * self.bs_intensity
    }

    /// πλ(P_u/ρ_o)^{2/η_c}: the normalized squared distance at which cellular
    /// channel inversion hits the power cap.
    pub fn cellular_cap_argument(&self) -> f64 {
        self.pi_lambda()
            * (self.max_tx_power / self.cutoff_threshold).powf(2.0 / self.pathloss_cellular)
    }

    /// Largest cellular link distance that channel inversion can serve.
    pub fn cellular_range(&self) -> f64 {
        (self.max_tx_power / self.cutoff_threshold).powf(1.0 / self.pathloss_cellular)
    }
}

/// UE classes: covered/uncovered crossed with potential-D2D (after truncation) or not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UeCase {
    /// Uncovered, not potential D2D: truncation outage.
    Uncovered = 1,
    /// Covered, not potential D2D: cellular only.
    CoveredNonPotential = 2,
    /// Uncovered potential D2D.
    UncoveredPotential = 3,
    /// Covered potential D2D: the only class with a real mode choice.
    CoveredPotential = 4,
}

impl UeCase {
    pub fn classify(covered: bool, potential_d2d: bool) -> Self {
        match (covered, potential_d2d) {
            (false, false) => UeCase::Uncovered,
            (true, false) => UeCase::CoveredNonPotential,
            (false, true) => UeCase::UncoveredPotential,
            (true, true) => UeCase::CoveredPotential,
        }
    }

    pub fn label(&self) -> u8 {
        *self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedQuantities {
    /// R_max = (P_u/ρ_min)^{1/η_d}, meters.
    pub max_d2d_range: f64,
    /// R = (P_u/ρ_o)^{1/η_d}, meters.
    pub d2d_range: f64,
    /// p = (R/R_max)², the fraction of potential D2D UEs that survive truncation.
    pub d2d_admission_probability: f64,
    /// 𝒪_p = exp(−πλ(P_u/ρ_o)^{2/η_c}).
    pub cellular_truncation_probability: f64,
    /// Intensities of cases #1..#4, per m².
    pub case_intensities: [f64; 4],
}

impl DerivedQuantities {
    pub fn d2d_truncation_probability(&self) -> f64 {
        1.0 - self.d2d_admission_probability
    }

    pub fn case_intensity(&self, case: UeCase) -> f64 {
        self.case_intensities[case.label() as usize - 1]
    }
}

pub fn derive(params: &NetworkParams) -> Result<DerivedQuantities, Error> {
    params.validate()?;
    let eta_d = params.pathloss_d2d;
    let max_d2d_range = (params.max_tx_power / params.receiver_sensitivity).powf(1.0 / eta_d);
    let d2d_range = (params.max_tx_power / params.cutoff_threshold).powf(1.0 / eta_d);
    let p = (params.receiver_sensitivity / params.cutoff_threshold).powf(2.0 / eta_d);
    let outage = (-params.cellular_cap_argument()).exp();
    let admitted = p * params.potential_d2d_intensity;
    let others = params.ue_intensity - admitted;
    let case_intensities = [
        others * outage,
        others * (1.0 - outage),
        admitted * outage,
        admitted * (1.0 - outage),
    ];
    Ok(DerivedQuantities {
        max_d2d_range,
        d2d_range,
        d2d_admission_probability: p,
        cellular_truncation_probability: outage,
        case_intensities,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSelectionResult {
    /// 𝒫_d.
    pub prob_d2d: f64,
    /// p·𝒟·𝒫_d, per m².
    pub d2d_link_intensity: f64,
}

/// Probability that an admitted potential D2D UE picks D2D mode.
///
/// Uses the equal-exponent closed form when η_c = η_d and the
/// incomplete-gamma form otherwise.
pub fn mode_selection_probability(params: &NetworkParams) -> Result<ModeSelectionResult, Error> {
    let derived = derive(params)?;
    let prob_d2d = if params.pathloss_cellular == params.pathloss_d2d {
        mode_selection_equal_exponent(params, derived.d2d_range)
    } else {
        mode_selection_general(params, derived.d2d_range)?
    };
    Ok(ModeSelectionResult {
        prob_d2d,
        d2d_link_intensity: derived.d2d_admission_probability
            * params.potential_d2d_intensity
            * prob_d2d,
    })
}

/// Incomplete-gamma form, valid for any pair of exponents.
pub fn mode_selection_general(params: &NetworkParams, d2d_range: f64) -> Result<f64, Error> {
    let t = match params.bias {
        Bias::Infinite => return Ok(1.0),
        Bias::Finite(0.0) => return Ok(0.0),
        Bias::Finite(t) => t,
    };
    let (eta_c, eta_d) = (params.pathloss_cellular, params.pathloss_d2d);
    let pl = params.pi_lambda();
    let shape = eta_c / eta_d;
    let arg = pl * (d2d_range.powf(eta_d) / t).powf(2.0 / eta_c);
    let g = lower_incomplete_gamma(shape, arg)?;
    let value = eta_c * t.powf(2.0 / eta_d) / (eta_d * d2d_range * d2d_range) * pl.powf(-shape) * g;
    Ok(value.clamp(0.0, 1.0))
}

/// Closed form for η_c = η_d = η.
pub fn mode_selection_equal_exponent(params: &NetworkParams, d2d_range: f64) -> f64 {
    let t = match params.bias {
        Bias::Infinite => return 1.0,
        Bias::Finite(0.0) => return 0.0,
        Bias::Finite(t) => t,
    };
    let eta = params.pathloss_d2d;
    let scaled = params.pi_lambda() * d2d_range * d2d_range;
    let tb = t.powf(2.0 / eta);
    let z = scaled / tb;
    // 1 − e^{−z} over z, written to stay accurate for tiny z
    let value = if z < 1e-8 {
        1.0 - 0.5 * z
    } else {
        -(-z).exp_m1() / z
    };
    value.clamp(0.0, 1.0)
}
