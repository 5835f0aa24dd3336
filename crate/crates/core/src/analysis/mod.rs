//! Analytical coverage, throughput and area spectral efficiency.
//!
//! Every entry point accepts a [`ScenarioConfig`] and builds a [`Model`]
//! internally. Callers that evaluate many quantities on one scenario can
//! build the model once and use its methods directly.

mod coverage;
mod kernel;
mod laplace;
mod model;
mod moments;
mod rate;
mod search;

use serde::{Deserialize, Serialize};

use crate::channel::LinkState;
use crate::error::{Error, Result};
use crate::scenario::ScenarioConfig;
use crate::simulator::{simulate, SimulationSettings};

use coverage::Conditional;
use laplace::check_orders;

pub use model::{truncation_radius, Mode, Model, TRUNCATION_CEILING, TRUNCATION_TAIL};
pub use moments::InterferenceMoments;
pub use rate::{
    area_spectral_efficiency, area_spectral_efficiency_with, gcq_rate, gcq_rate_bits, throughput,
    throughput_gcq, throughput_with, ThroughputResult, GCQ_DEFAULT_NODES, GCQ_MAX_NODES,
    GCQ_REL_TOL, RATE_SCALE_BITS,
};
pub use search::{
    optimize_parameter, tier_select, Objective, Optimum, Parameter, Tier, TierSelection,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverageMethod {
    Exact,
    LosOnly,
    GammaMatch,
    MonteCarlo,
}

impl CoverageMethod {
    pub const ALL: [CoverageMethod; 4] = [
        CoverageMethod::Exact,
        CoverageMethod::LosOnly,
        CoverageMethod::GammaMatch,
        CoverageMethod::MonteCarlo,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CoverageMethod::Exact => "exact",
            CoverageMethod::LosOnly => "los-only",
            CoverageMethod::GammaMatch => "gamma-match",
            CoverageMethod::MonteCarlo => "monte-carlo",
        }
    }
}

impl std::str::FromStr for CoverageMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CoverageMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::Parse(format!(
                    "unknown method `{s}` (expected exact, los-only, gamma-match or monte-carlo)"
                ))
            })
    }
}

impl std::fmt::Display for CoverageMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    pub p_cov: f64,
    pub method: CoverageMethod,
    /// Quadrature error estimate, or the Monte Carlo standard error.
    pub error_estimate: f64,
}

/// `I₁ξ^v`: void integral up to the exclusion radius of state `xi` for a
/// serving base station of state `v` at `r_s`.
pub fn void_integral_i1(
    xi: LinkState,
    v: LinkState,
    r_s: f64,
    cfg: &ScenarioConfig,
) -> Result<f64> {
    let model = Model::new(cfg, Mode::Full)?;
    model.check_radius(r_s)?;
    model.void_integral(xi, model.exclusion_radii(v, r_s).get(xi))
}

/// Density of the serving distance in state `v`, without the `2 r w(r)`
/// area element.
pub fn serving_distance_pdf(v: LinkState, r_s: f64, cfg: &ScenarioConfig) -> Result<f64> {
    let model = Model::new(cfg, Mode::Full)?;
    model.check_radius(r_s)?;
    model.serving_density(v, r_s)
}

/// `Υ_ξ(r, y) = (m / (m + y P G ζ_ξ(r)))^m`.
pub fn upsilon(xi: LinkState, r: f64, y: f64, cfg: &ScenarioConfig) -> f64 {
    let ch = cfg.channel();
    let m = ch.nakagami_m(xi) as f64;
    let x = y * ch.tx_gain() * crate::channel::path_loss(r, cfg.delta_h(), xi, &ch);
    (1.0 + x / m).powf(-m)
}

/// `I₂ξ^v(y)`: interference integral of state `xi` beyond its exclusion
/// radius.
pub fn laplace_log_exponent_i2(
    xi: LinkState,
    v: LinkState,
    r_s: f64,
    y: f64,
    cfg: &ScenarioConfig,
) -> Result<f64> {
    let model = Model::new(cfg, Mode::Full)?;
    model.check_radius(r_s)?;
    check_y(y)?;
    let z = y * model.channel().tx_gain();
    Ok(model.interference_integrals(v, r_s, &[z], 1, &[xi])?[0])
}

/// Laplace transform of the interference at `y`, conditioned on a serving
/// base station of state `v` at `r_s`.
pub fn laplace_transform(v: LinkState, r_s: f64, y: f64, cfg: &ScenarioConfig) -> Result<f64> {
    Ok(laplace_derivatives(v, r_s, y, 1, cfg)?[0])
}

/// `dᵏL/dyᵏ` for `k < orders`.
pub fn laplace_derivatives(
    v: LinkState,
    r_s: f64,
    y: f64,
    orders: usize,
    cfg: &ScenarioConfig,
) -> Result<Vec<f64>> {
    check_orders(orders)?;
    check_y(y)?;
    let model = Model::new(cfg, Mode::Full)?;
    model.check_radius(r_s)?;
    if y == 0.0 {
        if orders > 1 {
            return Err(Error::Validation("derivatives need y > 0".into()));
        }
        return Ok(vec![1.0]);
    }
    let z = y * model.channel().tx_gain();
    let g = model.log_laplace_terms(v, r_s, &[z], orders)?;
    let mut scaled = vec![0.0; orders];
    laplace::laplace_from_log_terms(&g, &mut scaled);
    Ok(scaled
        .iter()
        .enumerate()
        .map(|(k, l)| l / y.powi(k as i32))
        .collect())
}

/// Coverage given a serving base station of state `v` at `r_s`, at the
/// configured threshold.
pub fn conditional_coverage(v: LinkState, r_s: f64, cfg: &ScenarioConfig) -> Result<f64> {
    let model = Model::new(cfg, Mode::Full)?;
    model.check_radius(r_s)?;
    Ok(model.conditional_coverage_curve(v, r_s, &[cfg.sinr_threshold()])?[0])
}

pub fn exact_coverage(cfg: &ScenarioConfig) -> Result<CoverageResult> {
    single(cfg, CoverageMethod::Exact)
}

/// Coverage with NLoS base stations and noise removed.
pub fn approx_coverage_los_only(cfg: &ScenarioConfig) -> Result<CoverageResult> {
    single(cfg, CoverageMethod::LosOnly)
}

/// LoS-only coverage with the interference replaced by a moment-matched
/// Gamma variable.
pub fn approx_coverage_gamma(cfg: &ScenarioConfig) -> Result<CoverageResult> {
    single(cfg, CoverageMethod::GammaMatch)
}

pub fn coverage(cfg: &ScenarioConfig, method: CoverageMethod) -> Result<CoverageResult> {
    single(cfg, method)
}

fn single(cfg: &ScenarioConfig, method: CoverageMethod) -> Result<CoverageResult> {
    Ok(coverage_curve(cfg, &[cfg.sinr_threshold()], method)?[0])
}

/// Coverage at each linear SINR threshold, sharing one outer quadrature.
pub fn coverage_curve(
    cfg: &ScenarioConfig,
    thresholds: &[f64],
    method: CoverageMethod,
) -> Result<Vec<CoverageResult>> {
    coverage_curve_with(cfg, thresholds, method, &SimulationSettings::default())
}

/// [`coverage_curve`] with explicit Monte Carlo settings.
pub fn coverage_curve_with(
    cfg: &ScenarioConfig,
    thresholds: &[f64],
    method: CoverageMethod,
    settings: &SimulationSettings,
) -> Result<Vec<CoverageResult>> {
    if let Some(t) = thresholds.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::Validation(format!(
            "SINR threshold {t} must be non-negative"
        )));
    }
    let (mode, how) = match method {
        CoverageMethod::Exact => (Mode::Full, Conditional::Laplace),
        CoverageMethod::LosOnly => (Mode::LosOnly, Conditional::Laplace),
        CoverageMethod::GammaMatch => (Mode::LosOnly, Conditional::Gamma),
        CoverageMethod::MonteCarlo => {
            let samples = simulate(cfg, settings)?;
            return Ok(thresholds
                .iter()
                .map(|&t| {
                    let est = samples.coverage(t);
                    CoverageResult {
                        p_cov: est.value,
                        method,
                        error_estimate: est.std_error,
                    }
                })
                .collect());
        }
    };
    let model = Model::new(cfg, mode)?;
    // No link reaches an infinite threshold.
    let finite: Vec<f64> = thresholds
        .iter()
        .copied()
        .filter(|t| t.is_finite())
        .collect();
    let curve = model.coverage_curve(&finite, how)?;
    let mut solved = curve.values.iter().zip(&curve.errors);
    Ok(thresholds
        .iter()
        .map(|t| {
            let (p, e) = if t.is_finite() {
                let (&p, &e) = solved.next().expect("one value per finite threshold");
                (p, e)
            } else {
                (0.0, 0.0)
            };
            CoverageResult {
                p_cov: p,
                method,
                error_estimate: e,
            }
        })
        .collect())
}

/// LoS interference moments beyond `r_s` by quadrature.
pub fn interference_moments(r_s: f64, cfg: &ScenarioConfig) -> Result<InterferenceMoments> {
    Model::new(cfg, Mode::LosOnly)?.interference_moments_numeric(r_s)
}

/// LoS interference moments from the plateau-summed antiderivative; needs
/// an untilted or omnidirectional antenna.
pub fn interference_moments_closed_form(
    r_s: f64,
    cfg: &ScenarioConfig,
) -> Result<InterferenceMoments> {
    Model::new(cfg, Mode::LosOnly)?.interference_moments_closed_form(r_s)
}

fn check_y(y: f64) -> Result<()> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::Validation(format!(
            "Laplace argument {y} must be finite and non-negative"
        )));
    }
    Ok(())
}
