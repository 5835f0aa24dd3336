//! Outer integral over the serving distance.

use std::cell::RefCell;

use crate::channel::LinkState;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_vec, Tolerance};

use super::model::Model;

/// How the conditional coverage given `(v, r_S)` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Conditional {
    Laplace,
    Gamma,
}

#[derive(Debug, Clone)]
pub(crate) struct CoverageCurve {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
}

pub(crate) fn outer_tolerance() -> Tolerance {
    Tolerance::new(1e-10, 1e-7)
}

impl Model {
    pub(crate) fn conditional(
        &self,
        how: Conditional,
        v: LinkState,
        r_s: f64,
        thresholds: &[f64],
    ) -> Result<Vec<f64>> {
        match how {
            Conditional::Laplace => self.conditional_coverage_curve(v, r_s, thresholds),
            Conditional::Gamma => self.gamma_coverage_curve(r_s, thresholds),
        }
    }

    /// `2 Σ_v ∫ P_cov|R_S^v f^v r_S w dr_S` for every threshold at once.
    pub(crate) fn coverage_curve(
        &self,
        thresholds: &[f64],
        how: Conditional,
    ) -> Result<CoverageCurve> {
        let nt = thresholds.len();
        let states: Vec<LinkState> = match how {
            Conditional::Laplace => self.states().to_vec(),
            Conditional::Gamma => vec![LinkState::Los],
        };
        let mut cutoff = [self.inner; 2];
        for &v in &states {
            cutoff[v as usize] = self.outer_cutoff(v)?;
        }
        let hi = cutoff.iter().copied().fold(self.inner, f64::max);
        if !(hi > self.inner) {
            return Ok(CoverageCurve {
                values: vec![0.0; nt],
                errors: vec![0.0; nt],
            });
        }
        let mut pts: Vec<f64> = self.knots.iter().copied().filter(|&k| k < hi).collect();
        pts.extend(cutoff.iter().copied().filter(|&c| c > self.inner));
        pts.sort_by(f64::total_cmp);
        pts.dedup();

        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let integrand = |r: f64, out: &mut [f64]| {
            out.iter_mut().for_each(|o| *o = 0.0);
            if failure.borrow().is_some() {
                return;
            }
            let w = self.weight(r);
            if w == 0.0 {
                return;
            }
            for &v in &states {
                if r > cutoff[v as usize] {
                    continue;
                }
                let mut step = || -> Result<()> {
                    let f = self.serving_density(v, r)?;
                    if f == 0.0 {
                        return Ok(());
                    }
                    let base = 2.0 * r * w * f;
                    // The last slot carries the serving probability so that
                    // panels are refined where the mass is.
                    out[nt] += base;
                    let cov = self.conditional(how, v, r, thresholds)?;
                    for (o, c) in out.iter_mut().zip(&cov) {
                        *o += base * c;
                    }
                    Ok(())
                };
                if let Err(e) = step() {
                    failure.borrow_mut().get_or_insert(e);
                    return;
                }
            }
        };
        let res = integrate_vec(integrand, &pts, nt + 1, &outer_tolerance())?;
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        Ok(CoverageCurve {
            values: res.value[..nt].iter().map(|p| p.clamp(0.0, 1.0)).collect(),
            errors: res.error[..nt].to_vec(),
        })
    }
}
