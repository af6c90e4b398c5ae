//! Interference Laplace transforms, SINR outage, ergodic link rates and the
//! network-level rate metrics built on them.
//!
//! Every transform is of the form `exp(−E(s))`. The exponents are carried
//! explicitly so outage can be formed as `−expm1(−ΣE)` without cancellation.

use std::f64::consts::PI;

use crate::error::{Error, NumericError};
use crate::model::{derive, mode_selection_probability, Bias, NetworkParams};
use crate::power::{moment_power_cellular_generic, moment_power_d2d};
use crate::specfun::{gamma_function, integrate_finite, integrate_semi_infinite, QuadratureSpec};

/// Receiver type of a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkMode {
    Cellular,
    D2d,
}

impl LinkMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            LinkMode::Cellular => "cellular",
            LinkMode::D2d => "d2d",
        }
    }
}

impl std::fmt::Display for LinkMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterferenceSource {
    D2dOnD2d,
    CellularOnD2d,
    D2dOnBs,
    CellularOnBs,
}

/// How to evaluate the BS-side path-loss integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LtMethod {
    /// Arctan form when η_c = 4, quadrature otherwise.
    Auto,
    Quadrature,
    /// Arctan form; only valid for η_c = 4.
    ClosedForm,
}

fn domain(msg: impl Into<String>) -> Error {
    Error::Numeric(NumericError::Domain(msg.into()))
}

/// Tolerances for the BS-side path-loss integral. Tighter than the default
/// so the two evaluation paths can be compared at 1e-8.
fn pathloss_quadrature() -> QuadratureSpec {
    QuadratureSpec {
        relative_tolerance: 1e-12,
        absolute_tolerance: 1e-300,
        max_subdivisions: 400,
    }
}

/// ∫_L^∞ x/(x^η + 1) dx by quadrature.
pub fn pathloss_tail_integral(lower: f64, eta: f64) -> Result<f64, Error> {
    if lower.is_infinite() {
        return Ok(0.0);
    }
    // Beyond x ~ 1e6 the integrand is x^{1−η} to double precision.
    if lower > 1e6 {
        return Ok(lower.powf(2.0 - eta) / (eta - 2.0));
    }
    Ok(integrate_semi_infinite(
        |x| x / (x.powf(eta) + 1.0),
        lower,
        &pathloss_quadrature(),
    )?)
}

/// ∫_L^∞ x/(x⁴ + 1) dx written in terms of y = L^{−2}: arctan(y)/2.
fn pathloss_tail_eta4(inv_sq_lower: f64) -> f64 {
    0.5 * inv_sq_lower.atan()
}

/// Γ(1 + δ)Γ(1 − δ) with δ = 2/η.
fn pathloss_gamma_product(eta: f64) -> Result<f64, Error> {
    if !(eta > 2.0) {
        return Err(domain(format!(
            "path-loss exponent must exceed 2, got {eta}"
        )));
    }
    let delta = 2.0 / eta;
    Ok(gamma_function(1.0 + delta)? * gamma_function(1.0 - delta)?)
}

/// Laplace transform of one interference field at one receiver type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceLt {
    pub source: InterferenceSource,
    pub params: NetworkParams,
    /// Everything in the exponent except the s-dependence. Zero when the
    /// field is empty.
    coefficient: f64,
}

impl InterferenceLt {
    pub fn new(source: InterferenceSource, params: &NetworkParams) -> Result<Self, Error> {
        params.validate()?;
        let eta_c = params.pathloss_cellular;
        let eta_d = params.pathloss_d2d;
        let channels = params.num_channels as f64;
        let d2d_intensity = match params.bias {
            Bias::Finite(0.0) => 0.0,
            _ => mode_selection_probability(params)?.d2d_link_intensity,
        };
        let coefficient = match source {
            InterferenceSource::D2dOnD2d => {
                let g = pathloss_gamma_product(eta_d)?;
                if d2d_intensity == 0.0 {
                    0.0
                } else {
                    PI * d2d_intensity / channels * moment_power_d2d(2.0 / eta_d, params)? * g
                }
            }
            InterferenceSource::CellularOnD2d => {
                let g = pathloss_gamma_product(eta_d)?;
                params.pi_lambda() * moment_power_cellular_generic(2.0 / eta_d, params)? * g
            }
            InterferenceSource::D2dOnBs => {
                if d2d_intensity == 0.0 {
                    0.0
                } else {
                    2.0 * PI * d2d_intensity / channels * moment_power_d2d(2.0 / eta_c, params)?
                }
            }
            InterferenceSource::CellularOnBs => {
                2.0 * params.pi_lambda() * moment_power_cellular_generic(2.0 / eta_c, params)?
            }
        };
        Ok(Self {
            source,
            params: *params,
            coefficient,
        })
    }

    /// −ln 𝓛(s).
    pub fn exponent(&self, s: f64) -> Result<f64, Error> {
        self.exponent_with(s, LtMethod::Auto)
    }

    pub fn exponent_with(&self, s: f64, method: LtMethod) -> Result<f64, Error> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(domain(format!(
                "Laplace variable must be finite and >= 0, got {s}"
            )));
        }
        if s == 0.0 || self.coefficient == 0.0 {
            return Ok(0.0);
        }
        let p = &self.params;
        let eta_c = p.pathloss_cellular;
        match self.source {
            InterferenceSource::D2dOnD2d | InterferenceSource::CellularOnD2d => {
                Ok(self.coefficient * s.powf(2.0 / p.pathloss_d2d))
            }
            InterferenceSource::CellularOnBs | InterferenceSource::D2dOnBs => {
                // received-power cap seen at the BS: ρ_o for cellular, T_d ρ_o for D2D
                let cap = match (self.source, p.bias) {
                    (InterferenceSource::CellularOnBs, _) => Some(p.cutoff_threshold),
                    (_, Bias::Finite(t)) => Some(t * p.cutoff_threshold),
                    (_, Bias::Infinite) => None,
                };
                let use_closed = match method {
                    LtMethod::Auto => eta_c == 4.0,
                    LtMethod::Quadrature => false,
                    LtMethod::ClosedForm => {
                        if eta_c != 4.0 {
                            return Err(domain("the arctan form requires pathloss_cellular = 4"));
                        }
                        true
                    }
                };
                let tail = match (use_closed, cap) {
                    (true, Some(c)) => pathloss_tail_eta4((s * c).sqrt()),
                    (true, None) => PI / 4.0,
                    (false, Some(c)) => pathloss_tail_integral((s * c).powf(-1.0 / eta_c), eta_c)?,
                    (false, None) => pathloss_tail_integral(0.0, eta_c)?,
                };
                Ok(self.coefficient * s.powf(2.0 / eta_c) * tail)
            }
        }
    }

    pub fn eval(&self, s: f64) -> Result<f64, Error> {
        Ok((-self.exponent(s)?).exp())
    }

    pub fn eval_with(&self, s: f64, method: LtMethod) -> Result<f64, Error> {
        Ok((-self.exponent_with(s, method)?).exp())
    }
}

pub fn lt_d2d_on_d2d(s: f64, params: &NetworkParams) -> Result<f64, Error> {
    InterferenceLt::new(InterferenceSource::D2dOnD2d, params)?.eval(s)
}

pub fn lt_cellular_on_d2d(s: f64, params: &NetworkParams) -> Result<f64, Error> {
    InterferenceLt::new(InterferenceSource::CellularOnD2d, params)?.eval(s)
}

pub fn lt_cellular_on_bs(s: f64, params: &NetworkParams) -> Result<f64, Error> {
    InterferenceLt::new(InterferenceSource::CellularOnBs, params)?.eval(s)
}

pub fn lt_d2d_on_bs(s: f64, params: &NetworkParams) -> Result<f64, Error> {
    InterferenceLt::new(InterferenceSource::D2dOnBs, params)?.eval(s)
}

/// The two interference transforms seen by one receiver type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkInterference {
    pub mode: LinkMode,
    pub cellular: InterferenceLt,
    pub d2d: InterferenceLt,
    pub method: LtMethod,
}

impl LinkInterference {
    pub fn new(mode: LinkMode, params: &NetworkParams) -> Result<Self, Error> {
        Self::with_method(mode, params, LtMethod::Auto)
    }

    pub fn with_method(
        mode: LinkMode,
        params: &NetworkParams,
        method: LtMethod,
    ) -> Result<Self, Error> {
        let (c, d) = match mode {
            LinkMode::Cellular => (
                InterferenceSource::CellularOnBs,
                InterferenceSource::D2dOnBs,
            ),
            LinkMode::D2d => (
                InterferenceSource::CellularOnD2d,
                InterferenceSource::D2dOnD2d,
            ),
        };
        Ok(Self {
            mode,
            cellular: InterferenceLt::new(c, params)?,
            d2d: InterferenceLt::new(d, params)?,
            method,
        })
    }

    /// sσ² + both interference exponents.
    pub fn total_exponent(&self, s: f64) -> Result<f64, Error> {
        let noise = s * self.cellular.params.noise_power;
        Ok(noise
            + self.cellular.exponent_with(s, self.method)?
            + self.d2d.exponent_with(s, self.method)?)
    }

    pub fn outage(&self, theta: f64) -> Result<OutageResult, Error> {
        if !(theta > 0.0) || !theta.is_finite() {
            return Err(domain(format!(
                "SINR threshold must be finite and > 0, got {theta}"
            )));
        }
        let p = &self.cellular.params;
        let s = theta / p.cutoff_threshold;
        let noise = s * p.noise_power;
        let ec = self.cellular.exponent_with(s, self.method)?;
        let ed = self.d2d.exponent_with(s, self.method)?;
        Ok(OutageResult {
            mode: self.mode,
            outage_probability: -(-(noise + ec + ed)).exp_m1(),
            noise_term: (-noise).exp(),
            lt_cellular: (-ec).exp(),
            lt_d2d: (-ed).exp(),
        })
    }

    /// 𝔼[ln(1 + SINR)] in nats, from the t-form integral truncated where the
    /// integrand drops below `spec.absolute_tolerance`.
    pub fn link_capacity(&self, spec: &QuadratureSpec) -> Result<f64, Error> {
        let rho = self.cellular.params.cutoff_threshold;
        let integrand =
            |t: f64| -> Result<f64, Error> { Ok((-self.total_exponent(t.exp_m1() / rho)?).exp()) };
        let floor = spec.absolute_tolerance.max(1e-300);
        let mut upper = 1.0;
        while integrand(upper)? > floor {
            upper *= 2.0;
            if upper > 512.0 {
                return Err(domain(
                    "link rate diverges: no noise and no interference at this operating point",
                ));
            }
        }
        let value = integrate_finite(|t| integrand(t).unwrap_or(f64::NAN), 0.0, upper, spec)?;
        Ok(value)
    }

    /// Same rate through u = e^t − 1: ∫₀^∞ 𝓛(u/ρ_o)/(1 + u) du.
    pub fn link_capacity_u_form(&self, spec: &QuadratureSpec) -> Result<f64, Error> {
        let rho = self.cellular.params.cutoff_threshold;
        let value = integrate_semi_infinite(
            |u| match self.total_exponent(u / rho) {
                Ok(e) => (-e).exp() / (1.0 + u),
                Err(_) => f64::NAN,
            },
            0.0,
            spec,
        )?;
        Ok(value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageResult {
    pub mode: LinkMode,
    pub outage_probability: f64,
    /// e^{−θσ²/ρ_o}.
    pub noise_term: f64,
    pub lt_cellular: f64,
    pub lt_d2d: f64,
}

pub fn outage_d2d(params: &NetworkParams) -> Result<OutageResult, Error> {
    LinkInterference::new(LinkMode::D2d, params)?.outage(params.sinr_threshold)
}

pub fn outage_cellular(params: &NetworkParams) -> Result<OutageResult, Error> {
    LinkInterference::new(LinkMode::Cellular, params)?.outage(params.sinr_threshold)
}

pub fn outage_cellular_with(
    params: &NetworkParams,
    method: LtMethod,
) -> Result<OutageResult, Error> {
    LinkInterference::with_method(LinkMode::Cellular, params, method)?.outage(params.sinr_threshold)
}

pub fn outage(mode: LinkMode, params: &NetworkParams) -> Result<OutageResult, Error> {
    match mode {
        LinkMode::Cellular => outage_cellular(params),
        LinkMode::D2d => outage_d2d(params),
    }
}

/// Quadrature settings for rate integrals.
pub fn rate_quadrature() -> QuadratureSpec {
    QuadratureSpec {
        relative_tolerance: 1e-9,
        absolute_tolerance: 1e-14,
        max_subdivisions: 400,
    }
}

/// 𝓡_χ in nats/s/Hz.
pub fn link_capacity(mode: LinkMode, params: &NetworkParams) -> Result<f64, Error> {
    LinkInterference::new(mode, params)?.link_capacity(&rate_quadrature())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    pub link_capacity_d2d: f64,
    pub link_capacity_cellular: f64,
    pub potential_d2d_rate: f64,
    /// nats/s/Hz per m².
    pub total_capacity: f64,
}

pub fn rates(params: &NetworkParams) -> Result<RateResult, Error> {
    let link_capacity_cellular = link_capacity(LinkMode::Cellular, params)?;
    let link_capacity_d2d = link_capacity(LinkMode::D2d, params)?;
    Ok(RateResult {
        link_capacity_d2d,
        link_capacity_cellular,
        potential_d2d_rate: potential_d2d_rate_from(
            params,
            link_capacity_d2d,
            link_capacity_cellular,
        )?,
        total_capacity: total_capacity_from(params, link_capacity_d2d, link_capacity_cellular)?,
    })
}

/// [`potential_d2d_rate`] from link capacities already computed.
pub fn potential_d2d_rate_from(
    params: &NetworkParams,
    rate_d2d: f64,
    rate_cellular: f64,
) -> Result<f64, Error> {
    let derived = derive(params)?;
    let pd = mode_selection_probability(params)?.prob_d2d;
    let admitted = derived.d2d_admission_probability * params.potential_d2d_intensity;
    let covered = 1.0 - derived.cellular_truncation_probability;
    let cellular_share = if pd == 1.0 {
        0.0
    } else {
        let denom = (1.0 - pd) * admitted + (params.ue_intensity - admitted) * covered;
        if !(denom > 0.0) {
            return Err(domain(
                "no cellular UEs compete with a potential D2D UE for its BS",
            ));
        }
        0.5 * (1.0 - pd) * params.bs_intensity / denom
    };
    let d2d_part = if pd == 0.0 { 0.0 } else { pd * rate_d2d };
    Ok(d2d_part + cellular_share * rate_cellular)
}

/// [`total_network_capacity`] from link capacities already computed.
pub fn total_capacity_from(
    params: &NetworkParams,
    rate_d2d: f64,
    rate_cellular: f64,
) -> Result<f64, Error> {
    let ms = mode_selection_probability(params)?;
    let d2d_part = if ms.d2d_link_intensity == 0.0 {
        0.0
    } else {
        ms.d2d_link_intensity * rate_d2d
    };
    Ok(d2d_part + params.bs_intensity * rate_cellular)
}

/// Rate of a generic potential D2D UE: D2D rate with probability 𝒫_d,
/// otherwise a two-hop share of its BS's cellular rate.
pub fn potential_d2d_rate(params: &NetworkParams) -> Result<f64, Error> {
    let pd = mode_selection_probability(params)?.prob_d2d;
    let rc = if pd == 1.0 {
        0.0
    } else {
        link_capacity(LinkMode::Cellular, params)?
    };
    let rd = if pd == 0.0 {
        0.0
    } else {
        link_capacity(LinkMode::D2d, params)?
    };
    potential_d2d_rate_from(params, rd, rc)
}

/// 𝒫_d p𝒟 𝓡_d + λ𝓡_c, nats/s/Hz per m².
pub fn total_network_capacity(params: &NetworkParams) -> Result<f64, Error> {
    let pd = mode_selection_probability(params)?.prob_d2d;
    let rc = link_capacity(LinkMode::Cellular, params)?;
    let rd = if pd == 0.0 {
        0.0
    } else {
        link_capacity(LinkMode::D2d, params)?
    };
    total_capacity_from(params, rd, rc)
}

/// Objective for [`optimal_bias`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiasObjective {
    PotentialD2dRate,
    TotalCapacity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasOptimum {
    pub bias: f64,
    pub value: f64,
    /// The maximizer lies strictly inside the search interval and beats
    /// both endpoints.
    pub interior: bool,
    pub value_at_lower: f64,
    pub value_at_upper: f64,
}

/// Maximizes `objective` over T_d ∈ [lower, upper]: a log-spaced scan
/// followed by golden-section refinement in log T_d around the best grid
/// point.
pub fn optimal_bias(
    params: &NetworkParams,
    objective: BiasObjective,
    lower: f64,
    upper: f64,
) -> Result<BiasOptimum, Error> {
    if !(lower > 0.0) || !(upper > lower) || !upper.is_finite() {
        return Err(domain(format!(
            "bias search interval must satisfy 0 < lower < upper, got [{lower}, {upper}]"
        )));
    }
    let eval = |log_t: f64| -> Result<f64, Error> {
        let p = NetworkParams {
            bias: Bias::Finite(log_t.exp()),
            ..*params
        };
        match objective {
            BiasObjective::PotentialD2dRate => potential_d2d_rate(&p),
            BiasObjective::TotalCapacity => total_network_capacity(&p),
        }
    };
    let (a, b) = (lower.ln(), upper.ln());
    const SCAN: usize = 41;
    let grid: Vec<f64> = (0..SCAN)
        .map(|i| a + (b - a) * i as f64 / (SCAN - 1) as f64)
        .collect();
    let values = grid
        .iter()
        .map(|&x| eval(x))
        .collect::<Result<Vec<_>, _>>()?;
    let best = (0..SCAN)
        .max_by(|&i, &j| values[i].total_cmp(&values[j]))
        .expect("scan grid is nonempty");
    let (mut lo, mut hi) = (grid[best.saturating_sub(1)], grid[(best + 1).min(SCAN - 1)]);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    while hi - lo > 1e-6 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = eval(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = eval(x1)?;
        }
    }
    let (mut x, mut value) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    if values[best] > value {
        x = grid[best];
        value = values[best];
    }
    let (first, last) = (values[0], values[SCAN - 1]);
    Ok(BiasOptimum {
        bias: x.exp(),
        value,
        interior: best != 0 && best != SCAN - 1 && value > first && value > last,
        value_at_lower: first,
        value_at_upper: last,
    })
}
