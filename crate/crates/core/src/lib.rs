//! Downlink coverage, throughput and area spectral efficiency of aerial and
//! ground UEs served by a Poisson field of base stations.
//!
//! The [`analysis`] module evaluates the exact stochastic-geometry
//! expressions and their approximations; [`simulator`] is an independent
//! Monte Carlo check of the same model.

#![allow(
    clippy::excessive_precision,
    clippy::needless_range_loop,
    clippy::neg_cmp_op_on_partial_ord
)]

pub mod analysis;
pub mod channel;
pub mod error;
pub mod geometry;
pub mod quadrature;
pub mod scenario;
pub mod simulator;
pub mod units;

pub use analysis::{
    approx_coverage_gamma, approx_coverage_los_only, area_spectral_efficiency, coverage,
    coverage_curve, exact_coverage, interference_moments, interference_moments_closed_form,
    optimize_parameter, throughput, tier_select, CoverageMethod, CoverageResult,
    InterferenceMoments, Objective, Parameter, Tier,
};
pub use channel::{
    fading_cdf, los_probability, los_step_function, path_loss, received_power, sample_fading,
    ChannelParams, Environment, LinkState, LosStepFunction,
};
pub use error::{Error, Result};
pub use geometry::{
    boundary_radii, compute_footprint, AngularExtent, AntennaConfig, AntennaFootprint, AntennaMode,
    ExclusionRadii,
};
pub use scenario::{load_scenario, parse_scenario, ScenarioConfig, ScenarioFile, SinrTarget};
pub use simulator::{AssociationRule, McEstimate, SimulationSettings};
