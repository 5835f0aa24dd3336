//! Ergodic rate by Gauss–Chebyshev quadrature over the coverage CCDF, and
//! the area spectral efficiency built on it.
//!
//! [`gcq_rate`] applies the rule in the threshold `t`. A noise-limited
//! directional link has a CCDF that stays near one up to SINR values of
//! 1e9 and more, so the `1/(1+t)` tail converges only slowly in `K`.
//! [`throughput`] therefore integrates in the rate `u = log₂(1+t)`
//! instead, where the CCDF decays over a few tens of bits.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::quadrature::gauss_chebyshev_half_line;
use crate::scenario::ScenarioConfig;
use crate::simulator::{simulate, SimulationSettings};

use super::{coverage_curve, CoverageMethod};

pub const GCQ_DEFAULT_NODES: usize = 64;
pub const GCQ_MAX_NODES: usize = 512;
/// Agreement between successive node counts at which doubling stops.
pub const GCQ_REL_TOL: f64 = 1e-4;
/// Bits per unit of the mapped variable in [`gcq_rate_bits`].
pub const RATE_SCALE_BITS: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputResult {
    /// bit/s/Hz.
    pub value: f64,
    pub method: CoverageMethod,
    /// Node count of the accepted estimate; 0 for Monte Carlo.
    pub nodes: usize,
    /// Difference to the previous node count, or the Monte Carlo standard
    /// error.
    pub error_estimate: f64,
}

/// `(1/ln 2) ∫₀^∞ P_cov(t)/(1+t) dt` on `k` nodes. `p_cov` receives all
/// node thresholds at once.
pub fn gcq_rate<F>(mut p_cov: F, k: usize) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let rule = gauss_chebyshev_half_line(k);
    let t: Vec<f64> = rule.iter().map(|&(t, _)| t).collect();
    let p = p_cov(&t)?;
    Ok(rule
        .iter()
        .zip(&p)
        .map(|(&(t, w), &p)| w * p / (1.0 + t))
        .sum::<f64>()
        / LN_2)
}

/// `∫₀^∞ P_cov(2ᵘ − 1) du` on `k` nodes with `u = s x`. The rule is applied
/// to `P_cov(2^{sx} − 1) − P_cov(0) e^{−x}`, whose exponential part is
/// added back exactly. `p_cov` receives `0` followed by the node
/// thresholds.
pub fn gcq_rate_bits<F>(mut p_cov: F, k: usize, s: f64) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let rule = gauss_chebyshev_half_line(k);
    let mut t = vec![0.0];
    t.extend(rule.iter().map(|&(x, _)| (s * x * LN_2).exp_m1()));
    let p = p_cov(&t)?;
    let p0 = p[0];
    let sum: f64 = rule
        .iter()
        .zip(&p[1..])
        .map(|(&(x, w), &p)| w * (p - p0 * (-x).exp()))
        .sum();
    Ok(s * (p0 + sum))
}

/// Rate on a fixed number of nodes in the threshold variable.
pub fn throughput_gcq(cfg: &ScenarioConfig, method: CoverageMethod, k: usize) -> Result<f64> {
    gcq_rate(|t| curve(cfg, t, method), k)
}

fn curve(cfg: &ScenarioConfig, t: &[f64], method: CoverageMethod) -> Result<Vec<f64>> {
    Ok(coverage_curve(cfg, t, method)?
        .into_iter()
        .map(|r| r.p_cov)
        .collect())
}

/// Ergodic rate by [`gcq_rate_bits`], doubling the node count from 64 until
/// two successive estimates agree to `GCQ_REL_TOL`, up to 512 nodes. Monte
/// Carlo averages `log₂(1 + SINR)` over the simulated realizations instead.
pub fn throughput(cfg: &ScenarioConfig, method: CoverageMethod) -> Result<ThroughputResult> {
    throughput_with(cfg, method, &SimulationSettings::default())
}

/// [`throughput`] with explicit Monte Carlo settings.
pub fn throughput_with(
    cfg: &ScenarioConfig,
    method: CoverageMethod,
    settings: &SimulationSettings,
) -> Result<ThroughputResult> {
    if method == CoverageMethod::MonteCarlo {
        let samples = simulate(cfg, settings)?;
        let est = samples.throughput();
        return Ok(ThroughputResult {
            value: est.value,
            method,
            nodes: 0,
            error_estimate: est.std_error,
        });
    }
    let rate = |k| gcq_rate_bits(|t| curve(cfg, t, method), k, RATE_SCALE_BITS);
    let mut k = GCQ_DEFAULT_NODES;
    let mut prev = rate(k)?;
    loop {
        let next_k = 2 * k;
        let next = rate(next_k)?;
        let diff = (next - prev).abs();
        if diff <= GCQ_REL_TOL * next.abs() || next_k >= GCQ_MAX_NODES {
            if diff > GCQ_REL_TOL * next.abs() {
                log::warn!("throughput not converged at {next_k} nodes (change {diff:.3e})");
            }
            return Ok(ThroughputResult {
                value: next,
                method,
                nodes: next_k,
                error_estimate: diff,
            });
        }
        k = next_k;
        prev = next;
    }
}

/// `λ [(1−ρ) R(ground) + ρ R(aerial)]` in bit/s/Hz/km², with the ground UE
/// at 1.5 m on an omnidirectional antenna.
pub fn area_spectral_efficiency(cfg: &ScenarioConfig, method: CoverageMethod) -> Result<f64> {
    area_spectral_efficiency_with(cfg, method, &SimulationSettings::default())
}

pub fn area_spectral_efficiency_with(
    cfg: &ScenarioConfig,
    method: CoverageMethod,
    settings: &SimulationSettings,
) -> Result<f64> {
    let rho = cfg.rho;
    let ground = if rho < 1.0 {
        throughput_with(&cfg.ground_counterpart(), method, settings)?.value
    } else {
        0.0
    };
    let aerial = if rho > 0.0 {
        throughput_with(cfg, method, settings)?.value
    } else {
        0.0
    };
    Ok(cfg.lambda_per_km2() * ((1.0 - rho) * ground + rho * aerial))
}
