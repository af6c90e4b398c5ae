//! Analytical model and Monte Carlo validator for mode selection, truncated
//! channel-inversion power control, and SINR outage in D2D-enabled uplink
//! cellular networks.
//!
//! Base stations and UEs are Poisson point processes. A fraction of UEs have
//! a nearby D2D receiver; those that can reach it under the power cap choose
//! between D2D and cellular mode with a biased path-loss comparison. The
//! analytical side ([`model`], [`power`], [`outage`]) gives closed forms and
//! quadratures; [`sim`] realizes the same network to check them.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod model;
pub mod oracle;
pub mod outage;
pub mod paramfile;
pub mod power;
pub mod sim;
pub mod specfun;
pub mod units;

pub use error::{Error, NumericError, ParamError, Result, SimulationError};
pub use model::{
    derive, mode_selection_probability, Bias, DerivedQuantities, ModeSelectionResult,
    NetworkParams, UeCase,
};
pub use outage::{
    link_capacity, outage_cellular, outage_d2d, potential_d2d_rate, rates, total_network_capacity,
    InterferenceLt, InterferenceSource, LinkMode, LtMethod, OutageResult, RateResult,
};
pub use power::{Case4SplitProbability, PowerDistribution, PowerKind};
pub use sim::{run_campaign, CampaignResult, Realization, SampleMetrics, SimulationConfig};
pub use specfun::QuadratureSpec;
