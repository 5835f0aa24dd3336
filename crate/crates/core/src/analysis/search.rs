//! Grid searches over one scenario parameter and the macro/micro tier choice.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::ScenarioConfig;

use super::{coverage, throughput, CoverageMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parameter {
    /// Antenna tilt, degrees.
    Tilt,
    /// Antenna beamwidth, degrees.
    Beamwidth,
    /// UE altitude, m.
    Altitude,
    /// Base station density, per km².
    Lambda,
}

impl Parameter {
    pub fn apply(&self, cfg: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut out = cfg.clone();
        match self {
            Parameter::Tilt | Parameter::Beamwidth if !cfg.antenna.is_directional() => {
                return Err(Error::Validation(format!(
                    "{self:?} search needs a directional antenna"
                )));
            }
            Parameter::Tilt => out.antenna.tilt_deg = value,
            Parameter::Beamwidth => out.antenna.beamwidth_deg = value,
            Parameter::Altitude => out.h_u = value,
            Parameter::Lambda => out.set_lambda_per_km2(value),
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Coverage,
    Throughput,
}

impl Objective {
    pub fn evaluate(&self, cfg: &ScenarioConfig, method: CoverageMethod) -> Result<f64> {
        match self {
            Objective::Coverage => Ok(coverage(cfg, method)?.p_cov),
            Objective::Throughput => Ok(throughput(cfg, method)?.value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub argmax: f64,
    pub max: f64,
    /// Objective at every grid point; `None` where the geometry is invalid.
    pub evaluated: Vec<(f64, Option<f64>)>,
}

fn evaluate_grid<F>(grid: &[f64], f: F) -> Result<Vec<Option<f64>>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    grid.par_iter()
        .map(|&x| match f(x) {
            Ok(v) => Ok(Some(v)),
            Err(Error::InvalidGeometry(msg)) => {
                log::debug!("skipping grid point {x}: {msg}");
                Ok(None)
            }
            Err(e) => Err(e),
        })
        .collect()
}

/// Exhaustive search of `grid`; ties go to the smaller parameter value.
pub fn optimize_parameter(
    cfg: &ScenarioConfig,
    param: Parameter,
    grid: &[f64],
    objective: Objective,
    method: CoverageMethod,
) -> Result<Optimum> {
    let values = evaluate_grid(grid, |x| objective.evaluate(&param.apply(cfg, x)?, method))?;
    let mut best: Option<(f64, f64)> = None;
    for (&x, v) in grid.iter().zip(&values) {
        let Some(v) = *v else { continue };
        best = match best {
            Some((bx, bv)) if bv > v || (bv == v && bx <= x) => Some((bx, bv)),
            _ => Some((x, v)),
        };
    }
    let (argmax, max) =
        best.ok_or_else(|| Error::Validation("no valid point on the search grid".into()))?;
    Ok(Optimum {
        argmax,
        max,
        evaluated: grid.iter().copied().zip(values).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Macro,
    Micro,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierSelection {
    pub altitudes: Vec<f64>,
    pub macro_values: Vec<f64>,
    pub micro_values: Vec<f64>,
    pub best: Vec<Tier>,
    /// First altitude whose best tier differs from that of the previous one.
    pub crossover: Option<f64>,
    /// Every altitude at which the best tier changes.
    pub switches: Vec<f64>,
}

/// Best tier per altitude. The tiers use orthogonal spectrum, so each is
/// evaluated on its own; ties go to the macro tier.
pub fn tier_select(
    cfg_macro: &ScenarioConfig,
    cfg_micro: &ScenarioConfig,
    h_u_grid: &[f64],
    objective: Objective,
    method: CoverageMethod,
) -> Result<TierSelection> {
    let eval = |cfg: &ScenarioConfig| -> Result<Vec<f64>> {
        h_u_grid
            .par_iter()
            .map(|&h| objective.evaluate(&Parameter::Altitude.apply(cfg, h)?, method))
            .collect()
    };
    let macro_values = eval(cfg_macro)?;
    let micro_values = eval(cfg_micro)?;
    let best: Vec<Tier> = macro_values
        .iter()
        .zip(&micro_values)
        .map(|(a, b)| if b > a { Tier::Micro } else { Tier::Macro })
        .collect();
    let switches: Vec<f64> = best
        .windows(2)
        .zip(&h_u_grid[1..])
        .filter(|(w, _)| w[0] != w[1])
        .map(|(_, &h)| h)
        .collect();
    Ok(TierSelection {
        altitudes: h_u_grid.to_vec(),
        macro_values,
        micro_values,
        best,
        crossover: switches.first().copied(),
        switches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omni_antenna_rejects_tilt_search() {
        let cfg = ScenarioConfig::urban_default();
        assert!(Parameter::Tilt.apply(&cfg, 10.0).is_err());
        assert_eq!(Parameter::Altitude.apply(&cfg, 42.0).unwrap().h_u, 42.0);
    }

    #[test]
    fn identical_tiers_never_cross() {
        let cfg = ScenarioConfig::urban_default();
        let sel = tier_select(
            &cfg,
            &cfg,
            &[1.5, 50.0],
            Objective::Coverage,
            CoverageMethod::Exact,
        )
        .unwrap();
        assert!(sel.best.iter().all(|t| *t == Tier::Macro));
        assert_eq!(sel.crossover, None);
        assert!(sel.switches.is_empty());
    }
}
