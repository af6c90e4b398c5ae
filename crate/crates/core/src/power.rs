//! Transmit-power distributions under truncated channel inversion.
//!
//! Four populations are modelled:
//!
//! * `P_d`: a UE operating in D2D mode (any admitted potential D2D UE that
//!   passes the biased selection rule);
//! * `P_2`: a covered non-potential UE (case #2);
//! * `P̃_4`: a covered potential D2D UE that selected cellular mode (case #4);
//! * `P_c`: a generic cellular UE, the two-component mixture of `P_2` and
//!   `P̃_4`. Only its moments are exposed.
//!
//! All pdfs share an `x^{2/η − 1}` factor, which is singular at the origin
//! when η > 2; normalization and moment quadratures rely on the endpoint
//! refinement of [`crate::specfun::integrate_finite`].
//!
//! The case-#4 moment is computed by quadrature of its pdf. A closed form
//! derived from the same pdf is kept for cross-checking.

use crate::error::{Error, NumericError};
use crate::model::{derive, mode_selection_probability, Bias, NetworkParams};
use crate::specfun::{gamma_function, integrate_finite, lower_incomplete_gamma, QuadratureSpec};

/// Above this argument γ(a, x) is indistinguishable from Γ(a) for the shape
/// parameters used here; skip the evaluation to keep intermediates finite.
const GAMMA_SATURATION: f64 = 700.0;

fn gamma_lower(a: f64, x: f64) -> Result<f64, NumericError> {
    if x > GAMMA_SATURATION {
        gamma_function(a)
    } else {
        lower_incomplete_gamma(a, x)
    }
}

fn domain(msg: impl Into<String>) -> Error {
    Error::Numeric(NumericError::Domain(msg.into()))
}

/// Quadrature settings used for pdf-based moments.
pub fn moment_quadrature() -> QuadratureSpec {
    QuadratureSpec {
        relative_tolerance: 1e-10,
        absolute_tolerance: 1e-300,
        max_subdivisions: 400,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerKind {
    D2dMode,
    Case2Cellular,
    Case4Cellular,
    GenericCellular,
}

/// pdf + moment evaluator for one of the four populations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerDistribution {
    pub kind: PowerKind,
    pub params: NetworkParams,
    /// Upper end of the support, watts.
    pub support_upper: f64,
}

impl PowerDistribution {
    pub fn new(kind: PowerKind, params: &NetworkParams) -> Result<Self, Error> {
        params.validate()?;
        let support_upper = match kind {
            PowerKind::Case4Cellular => case4_support_upper(params),
            _ => params.max_tx_power,
        };
        Ok(Self {
            kind,
            params: *params,
            support_upper,
        })
    }

    pub fn pdf(&self, x: f64) -> Result<f64, Error> {
        match self.kind {
            PowerKind::D2dMode => pdf_power_d2d(x, &self.params),
            PowerKind::Case2Cellular => pdf_power_case2(x, &self.params),
            PowerKind::Case4Cellular => pdf_power_case4_cellular(x, &self.params),
            PowerKind::GenericCellular => Err(domain(
                "the generic cellular power is a mixture; only its moments are exposed",
            )),
        }
    }

    pub fn moment(&self, alpha: f64) -> Result<f64, Error> {
        match self.kind {
            PowerKind::D2dMode => moment_power_d2d(alpha, &self.params),
            PowerKind::Case2Cellular => moment_power_case2(alpha, &self.params),
            PowerKind::Case4Cellular => moment_power_case4_cellular(alpha, &self.params),
            PowerKind::GenericCellular => moment_power_cellular_generic(alpha, &self.params),
        }
    }

    /// ∫ x^α f(x) dx over the support, by adaptive quadrature.
    pub fn moment_by_quadrature(&self, alpha: f64, spec: &QuadratureSpec) -> Result<f64, Error> {
        if self.kind == PowerKind::GenericCellular {
            let w = generic_case4_weight(&self.params)?;
            let case2 = PowerDistribution::new(PowerKind::Case2Cellular, &self.params)?;
            let m2 = case2.moment_by_quadrature(alpha, spec)?;
            if w == 0.0 {
                return Ok(m2);
            }
            let case4 = PowerDistribution::new(PowerKind::Case4Cellular, &self.params)?;
            return Ok((1.0 - w) * m2 + w * case4.moment_by_quadrature(alpha, spec)?);
        }
        let upper = self.support_upper;
        let value = integrate_finite(
            |x| {
                if x <= 0.0 {
                    return 0.0;
                }
                x.powf(alpha) * self.pdf(x).unwrap_or(f64::NAN)
            },
            0.0,
            upper,
            spec,
        )?;
        Ok(value)
    }

    /// Total probability mass; 1 up to quadrature error.
    pub fn normalization(&self, spec: &QuadratureSpec) -> Result<f64, Error> {
        self.moment_by_quadrature(0.0, spec)
    }
}

fn case4_support_upper(params: &NetworkParams) -> f64 {
    match params.bias {
        Bias::Infinite => 0.0,
        Bias::Finite(t) => params.max_tx_power / t.max(1.0),
    }
}

/// 1 − 𝒪_p, the covered fraction.
fn covered_probability(params: &NetworkParams) -> f64 {
    -(-params.cellular_cap_argument()).exp_m1()
}

fn check_alpha(alpha: f64) -> Result<(), Error> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        Err(domain(format!("moment order must be > 0, got {alpha}")))
    } else {
        Ok(())
    }
}

fn check_power(x: f64) -> Result<(), Error> {
    if !(x > 0.0) {
        Err(domain(format!("transmit power must be > 0, got {x}")))
    } else {
        Ok(())
    }
}

/// pdf of the D2D-mode transmit power, zero above P_u.
pub fn pdf_power_d2d(x: f64, params: &NetworkParams) -> Result<f64, Error> {
    params.validate()?;
    check_power(x)?;
    let pu = params.max_tx_power;
    if x > pu {
        return Ok(0.0);
    }
    let eta_c = params.pathloss_cellular;
    let eta_d = params.pathloss_d2d;
    let b = 2.0 / eta_d;
    let t = match params.bias {
        Bias::Infinite => return Ok(b * x.powf(b - 1.0) / pu.powf(b)),
        Bias::Finite(0.0) => return Err(domain("no UE operates in D2D mode when the bias is 0")),
        Bias::Finite(t) => t,
    };
    let pl = params.pi_lambda();
    let scale = t * params.cutoff_threshold;
    let cap = pl * (pu / scale).powf(2.0 / eta_c);
    let shape = eta_c / eta_d;
    let g = gamma_lower(shape, cap)?;
    let numer =
        2.0 * x.powf(b - 1.0) * pl.powf(shape) * (-pl * (x / scale).powf(2.0 / eta_c)).exp();
    Ok(numer / (eta_c * scale.powf(b) * g))
}

/// E[P_d^α].
pub fn moment_power_d2d(alpha: f64, params: &NetworkParams) -> Result<f64, Error> {
    params.validate()?;
    check_alpha(alpha)?;
    if alpha == 0.0 {
        return Ok(1.0);
    }
    let eta_c = params.pathloss_cellular;
    let eta_d = params.pathloss_d2d;
    let pu = params.max_tx_power;
    let t = match params.bias {
        Bias::Infinite => {
            let b = 2.0 / eta_d;
            return Ok(pu.powf(alpha) * b / (alpha + b));
        }
        // powers of the selected population shrink to zero as T_d → 0
        Bias::Finite(0.0) => return Ok(0.0),
        Bias::Finite(t) => t,
    };
    let pl = params.pi_lambda();
    let scale = t * params.cutoff_threshold;
    let cap = pl * (pu / scale).powf(2.0 / eta_c);
    let shape = eta_c / eta_d;
    let k = alpha * eta_c / 2.0;
    let num = gamma_lower(k + shape, cap)?;
    let den = gamma_lower(shape, cap)?;
    Ok(scale.powf(alpha) * num / (pl.powf(k) * den))
}

/// pdf of the case-#2 (covered non-potential) transmit power, zero above P_u.
pub fn pdf_power_case2(x: f64, params: &NetworkParams) -> Result<f64, Error> {
    params.validate()?;
    check_power(x)?;
    if x > params.max_tx_power {
        return Ok(0.0);
    }
    let eta_c = params.pathloss_cellular;
    let rho = params.cutoff_threshold;
    let pl = params.pi_lambda();
    let a = 2.0 / eta_c;
    let numer = 2.0 * pl * x.powf(a - 1.0) * (-pl * (x / rho).powf(a)).exp();
    Ok(numer / (eta_c * rho.powf(a) * covered_probability(params)))
}

/// E[P_2^α].
pub fn moment_power_case2(alpha: f64, params: &NetworkParams) -> Result<f64, Error> {
    params.validate()?;
    check_alpha(alpha)?;
    if alpha == 0.0 {
        return Ok(1.0);
    }
    let k = alpha * params.pathloss_cellular / 2.0;
    let g = gamma_lower(k + 1.0, params.cellular_cap_argument())?;
    Ok(params.cutoff_threshold.powf(alpha) * g
        / (params.pi_lambda().powf(k) * covered_probability(params)))
}

/// ℙ{case-#4 UE selects cellular mode}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Case4SplitProbability {
    pub prob_cellular_given_case4: f64,
}

impl Case4SplitProbability {
    pub fn prob_d2d_given_case4(&self) -> f64 {
        1.0 - self.prob_cellular_given_case4
    }
}

pub fn case4_split_probability(params: &NetworkParams) -> Result<Case4SplitProbability, Error> {
    params.validate()?;
    let p = match params.bias {
        Bias::Infinite => 0.0,
        Bias::Finite(0.0) => 1.0,
        Bias::Finite(t) if t <= 1.0 => case4_split_low_bias(params, t)?,
        Bias::Finite(t) => case4_split_high_bias(params, t)?,
    };
    Ok(Case4SplitProbability {
        prob_cellular_given_case4: p.clamp(0.0, 1.0),
    })
}

/// Shared incomplete-gamma term of both branches, with the γ argument
/// evaluated at the cap P_u/(m·ρ_o).
fn case4_split_gamma_term(params: &NetworkParams, t: f64, m: f64) -> Result<f64, Error> {
    let eta_c = params.pathloss_cellular;
    let eta_d = params.pathloss_d2d;
    let pl = params.pi_lambda();
    let pu = params.max_tx_power;
    let rho = params.cutoff_threshold;
    let shape = eta_c / eta_d;
    let g = gamma_lower(shape, pl * (pu / (m * rho)).powf(2.0 / eta_c))?;
    Ok(eta_c * (t * rho).powf(2.0 / eta_d) * g
        / (eta_d * pu.powf(2.0 / eta_d) * pl.powf(shape) * covered_probability(params)))
}

/// Branch for 0 < T_d ≤ 1.
pub fn case4_split_low_bias(params: &NetworkParams, t: f64) -> Result<f64, Error> {
    let tb = t.powf(2.0 / params.pathloss_d2d);
    Ok(1.0 - tb + tb / covered_probability(params) - case4_split_gamma_term(params, t, 1.0)?)
}

/// Branch for T_d > 1.
pub fn case4_split_high_bias(params: &NetworkParams, t: f64) -> Result<f64, Error> {
    Ok(1.0 / covered_probability(params) - case4_split_gamma_term(params, t, t)?)
}

/// pdf of the case-#4 cellular-mode transmit power on (0, P_u/max(T_d, 1)].
pub fn pdf_power_case4_cellular(x: f64, params: &NetworkParams) -> Result<f64, Error> {
    params.validate()?;
    check_power(x)?;
    let t = match params.bias {
        Bias::Infinite => {
            return Err(domain(
                "no case-#4 UE operates in cellular mode when the bias is infinite",
            ))
        }
        Bias::Finite(t) => t,
    };
    let upper = case4_support_upper(params);
    if x > upper {
        return Err(domain(format!(
            "case-#4 cellular power {x} lies outside the support (0, {upper}]"
        )));
    }
    let split = case4_split_probability(params)?.prob_cellular_given_case4;
    let eta_c = params.pathloss_cellular;
    let eta_d = params.pathloss_d2d;
    let rho = params.cutoff_threshold;
    let pu = params.max_tx_power;
    let pl = params.pi_lambda();
    let a = 2.0 / eta_c;
    let b = 2.0 / eta_d;
    let pub_ = pu.powf(b);
    let gap = (pub_ - (t * x).powf(b)).max(0.0);
    let numer = 2.0 * pl * x.powf(a - 1.0) * gap * (-pl * (x / rho).powf(a)).exp();
    Ok(numer / (split * eta_c * rho.powf(a) * pub_ * covered_probability(params)))
}

/// E[P̃_4^α], by quadrature of the case-#4 pdf.
pub fn moment_power_case4_cellular(alpha: f64, params: &NetworkParams) -> Result<f64, Error> {
    params.validate()?;
    check_alpha(alpha)?;
    if alpha == 0.0 {
        return Ok(1.0);
    }
    if params.bias == Bias::Infinite {
        return Ok(0.0);
    }
    PowerDistribution::new(PowerKind::Case4Cellular, params)?
        .moment_by_quadrature(alpha, &moment_quadrature())
}

/// E[P̃_4^α] in closed form, obtained by integrating the case-#4 pdf term
/// by term. Used to cross-check the quadrature path.
pub fn moment_power_case4_cellular_closed_form(
    alpha: f64,
    params: &NetworkParams,
) -> Result<f64, Error> {
    params.validate()?;
    check_alpha(alpha)?;
    if alpha == 0.0 {
        return Ok(1.0);
    }
    let t = match params.bias {
        Bias::Infinite => return Ok(0.0),
        Bias::Finite(t) => t,
    };
    let split = case4_split_probability(params)?.prob_cellular_given_case4;
    let eta_c = params.pathloss_cellular;
    let eta_d = params.pathloss_d2d;
    let rho = params.cutoff_threshold;
    let pu = params.max_tx_power;
    let pl = params.pi_lambda();
    let k = alpha * eta_c / 2.0;
    let shape = eta_c / eta_d;
    let cap = pl * (pu / (t.max(1.0) * rho)).powf(2.0 / eta_c);
    let covered = covered_probability(params);
    let first = rho.powf(alpha) * gamma_lower(k + 1.0, cap)? / (pl.powf(k) * covered);
    let second =
        t.powf(2.0 / eta_d) * rho.powf(alpha + 2.0 / eta_d) * gamma_lower(shape + k + 1.0, cap)?
            / (pl.powf(shape + k) * pu.powf(2.0 / eta_d) * covered);
    Ok((first - second) / split)
}

/// Mixture weight p·𝒫_d·𝒟/𝒰 carried by P̃_4 in the generic cellular power.
pub fn generic_case4_weight(params: &NetworkParams) -> Result<f64, Error> {
    let derived = derive(params)?;
    let ms = mode_selection_probability(params)?;
    Ok(
        derived.d2d_admission_probability * ms.prob_d2d * params.potential_d2d_intensity
            / params.ue_intensity,
    )
}

/// E[P_c^α] = (1 − w)E[P_2^α] + w·E[P̃_4^α] with w = p𝒫_d𝒟/𝒰.
pub fn moment_power_cellular_generic(alpha: f64, params: &NetworkParams) -> Result<f64, Error> {
    check_alpha(alpha)?;
    let w = generic_case4_weight(params)?;
    let m2 = moment_power_case2(alpha, params)?;
    if w == 0.0 {
        return Ok(m2);
    }
    Ok((1.0 - w) * m2 + w * moment_power_case4_cellular(alpha, params)?)
}

/// Same mixture with the closed-form case-#4 moment.
pub fn moment_power_cellular_generic_closed_form(
    alpha: f64,
    params: &NetworkParams,
) -> Result<f64, Error> {
    check_alpha(alpha)?;
    let w = generic_case4_weight(params)?;
    let m2 = moment_power_case2(alpha, params)?;
    if w == 0.0 {
        return Ok(m2);
    }
    Ok((1.0 - w) * m2 + w * moment_power_case4_cellular_closed_form(alpha, params)?)
}

/// Mean transmit power of a covered potential D2D UE (case #4), the only UE
/// that actually chooses between modes. It transmits `ρ_o r_d^{η_d}` in D2D
/// mode and `ρ_o r_c^{η_c}` in cellular mode.
pub fn mean_power_potential_d2d(params: &NetworkParams) -> Result<f64, Error> {
    params.validate()?;
    let split = case4_split_probability(params)?;
    let cellular_part = if split.prob_cellular_given_case4 > 0.0 {
        split.prob_cellular_given_case4 * moment_power_case4_cellular(1.0, params)?
    } else {
        0.0
    };
    let eta_c = params.pathloss_cellular;
    let b = 2.0 / params.pathloss_d2d;
    let pu = params.max_tx_power;
    let rho = params.cutoff_threshold;
    let pl = params.pi_lambda();
    let covered = covered_probability(params);
    let outage = 1.0 - covered;
    // E[X_d ; X_d ≤ T_d X̃_c] with X_d ∝ x^{b−1} on (0, P_u] and X̃_c the
    // covered cellular power.
    let d2d_part = match params.bias {
        Bias::Infinite => pu * b / (1.0 + b),
        Bias::Finite(0.0) => 0.0,
        Bias::Finite(t) => {
            let upper = pu.min(t * pu);
            integrate_finite(
                |x| {
                    if x <= 0.0 {
                        return 0.0;
                    }
                    let survival = ((-pl * (x / (t * rho)).powf(2.0 / eta_c)).exp() - outage)
                        .max(0.0)
                        / covered;
                    x * b * x.powf(b - 1.0) / pu.powf(b) * survival
                },
                0.0,
                upper,
                &moment_quadrature(),
            )?
        }
    };
    Ok(d2d_part + cellular_part)
}
