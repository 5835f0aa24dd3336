//! First two moments of the LoS interference beyond the serving distance
//! and the Gamma fit built on them.

use crate::channel::LinkState;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_vec, Tolerance};

use super::model::{ln_power_moment, Model, SERIES_TERMS};

/// Mean and variance of the conditional interference with the matched
/// Gamma scale `beta1` and shape `beta2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceMoments {
    /// W.
    pub mean: f64,
    /// W².
    pub variance: f64,
    /// Gamma scale, W.
    pub beta1: f64,
    /// Gamma shape.
    pub beta2: f64,
}

impl InterferenceMoments {
    pub fn from_mean_variance(mean: f64, variance: f64) -> Self {
        InterferenceMoments {
            mean,
            variance,
            beta1: variance / mean,
            beta2: mean * mean / variance,
        }
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

impl Model {
    /// `ln ∫_{r_s}^{outer} r P_L w ζ_L^j dr` for `j = 1, 2`, from the
    /// segment tables plus the partial segment containing `r_s`.
    pub(crate) fn ln_los_moments(&self, r_s: f64) -> Result<[f64; 2]> {
        let first = self.knot_at_or_after(r_s);
        let suffix = *self.ln_suffix(LinkState::Los, first.min(self.segs.len()));
        let mut out = [suffix[1], suffix[2]];
        if first == 0 || r_s >= self.knots[first] {
            return Ok(out);
        }
        let s = first - 1;
        let p = self.seg_p(s, LinkState::Los);
        if p == 0.0 {
            return Ok(out);
        }
        let b = self.knots[first];
        let dh2 = self.dh * self.dh;
        let alpha = self.ch.alpha_los;
        let ln_a = self.ch.a_los.ln();
        match self.segs[s].const_weight {
            Some(w) => {
                for j in 1..=2 {
                    let beta = 0.5 * alpha * j as f64;
                    let ln_part =
                        p.ln() + w.ln() + j as f64 * ln_a + ln_power_moment(r_s, b, dh2, beta);
                    out[j - 1] = log_add(out[j - 1], ln_part);
                }
            }
            None => {
                let fp = self.fp;
                let d0 = r_s * r_s + dh2;
                let res = integrate_vec(
                    |r, o| {
                        let base = r * fp.angular_extent_unchecked(r).weight();
                        let q = ((r * r + dh2) / d0).powf(-0.5 * alpha);
                        o[0] = base * q;
                        o[1] = base * q * q;
                    },
                    &[r_s, b],
                    2,
                    &Tolerance {
                        abs: 1e-300,
                        rel: 1e-11,
                        max_panels: 4000,
                    },
                )?;
                for j in 1..=2 {
                    if res.value[j - 1] > 0.0 {
                        let ln_part = p.ln()
                            + res.value[j - 1].ln()
                            + j as f64 * (ln_a - 0.5 * alpha * d0.ln());
                        out[j - 1] = log_add(out[j - 1], ln_part);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Conditional coverage of a LoS link with the interference replaced by
    /// its moment-matched Gamma law.
    pub(crate) fn gamma_coverage_curve(&self, r_s: f64, thresholds: &[f64]) -> Result<Vec<f64>> {
        let [ln_m1, ln_m2] = self.ln_los_moments(r_s)?;
        if ln_m1 == f64::NEG_INFINITY {
            return Ok(vec![1.0; thresholds.len()]);
        }
        let m = self.ch.m_los;
        let mf = m as f64;
        let ln_zeta = self.ln_path_gain(LinkState::Los, r_s);
        // β₂ = 2λ m M₁² / ((m+1) M₂),  β₁ y_L = (m+1) M₂ T / (M₁ ζ_L(r_S)).
        let ln_beta2 = (2.0 * self.lambda * mf / (mf + 1.0)).ln() + 2.0 * ln_m1 - ln_m2;
        let beta2 = ln_beta2.exp();
        Ok(thresholds
            .iter()
            .map(|&t| {
                if t <= 0.0 {
                    return 1.0;
                }
                let ln_by = (mf + 1.0).ln() + ln_m2 - ln_m1 + t.ln() - ln_zeta;
                gamma_match_coverage(ln_by, beta2, m)
            })
            .collect())
    }

    /// Mean and variance by adaptive quadrature over `[r_s, outer]`.
    pub fn interference_moments_numeric(&self, r_s: f64) -> Result<InterferenceMoments> {
        self.check_radius(r_s)?;
        let mut pts = vec![r_s];
        pts.extend(self.knots.iter().copied().filter(|&k| k > r_s));
        if pts.len() < 2 {
            return Err(Error::Validation(
                "serving distance at the footprint edge".into(),
            ));
        }
        let zeta_s = self.path_gain(LinkState::Los, r_s);
        let fp = self.fp;
        let res = integrate_vec(
            |r, o| {
                let base = r * self.state_probability(LinkState::Los, r) * fp.weight(r);
                let q = self.path_gain(LinkState::Los, r) / zeta_s;
                o[0] = base * q;
                o[1] = base * q * q;
            },
            &pts,
            2,
            &Tolerance {
                abs: 1e-300,
                rel: 1e-12,
                max_panels: 20_000,
            },
        )?;
        Ok(self.moments_from_integrals(res.value[0] * zeta_s, res.value[1] * zeta_s * zeta_s))
    }

    /// Step-summed antiderivative form, valid when the angular weight is
    /// `π` over `[r_s, outer]`.
    pub fn interference_moments_closed_form(&self, r_s: f64) -> Result<InterferenceMoments> {
        self.check_radius(r_s)?;
        if !self.fp.is_omnidirectional() && self.fp.center_offset != 0.0 {
            return Err(Error::InvalidGeometry(
                "closed-form moments need an untilted antenna".into(),
            ));
        }
        let env = &self.cfg.env;
        let (h_u, h_b) = (self.cfg.h_u, self.cfg.h_b);
        let alpha = self.ch.alpha_los;
        let dh2 = self.dh * self.dh;
        let i = env.plateau_index(r_s);
        let j = env.plateau_index(self.outer);
        let (mut s1, mut s2) = (0.0, 0.0);
        for k in i..=j {
            let lo = if k == i { r_s } else { env.breakpoint(k) };
            let hi = if k == j {
                self.outer
            } else {
                env.breakpoint(k + 1)
            };
            if !(hi > lo) {
                continue;
            }
            let p = env.los_product(k, h_u, h_b);
            let (dl, dh) = (lo * lo + dh2, hi * hi + dh2);
            s1 += p * (dl.powf(1.0 - 0.5 * alpha) - dh.powf(1.0 - 0.5 * alpha));
            s2 += p * (dl.powf(1.0 - alpha) - dh.powf(1.0 - alpha));
        }
        let a = self.ch.a_los;
        // ∫ r ζ^j π dr = π A^j (D_lo^{1−jα/2} − D_hi^{1−jα/2}) / (jα − 2)
        let i1 = std::f64::consts::PI * a * s1 / (alpha - 2.0);
        let i2 = std::f64::consts::PI * a * a * s2 / (2.0 * alpha - 2.0);
        Ok(self.moments_from_integrals(i1, i2))
    }

    /// Moments from `∫ r P_L w ζ_L dr` and `∫ r P_L w ζ_L² dr`.
    fn moments_from_integrals(&self, i1: f64, i2: f64) -> InterferenceMoments {
        let pg = self.ch.tx_gain();
        let m = self.ch.m_los as f64;
        let mean = 2.0 * self.lambda * pg * i1;
        let variance = 2.0 * self.lambda * pg * pg * (m + 1.0) / m * i2;
        InterferenceMoments::from_mean_variance(mean, variance)
    }
}

/// `Σ_{k<m} (β₁y)^k/k! · Π_{i<k}(β₂+i) · (1+β₁y)^{−β₂−k}` in log space.
pub(crate) fn gamma_match_coverage(ln_by: f64, beta2: f64, m: u32) -> f64 {
    let by = ln_by.exp();
    let ln1p = by.ln_1p();
    let mut ln_rising = 0.0;
    let mut ln_fact = 0.0;
    let mut sum = 0.0;
    for k in 0..m as usize {
        if k > 0 {
            ln_rising += (beta2 + (k - 1) as f64).ln();
            ln_fact += (k as f64).ln();
        }
        sum += (k as f64 * ln_by - ln_fact + ln_rising - (beta2 + k as f64) * ln1p).exp();
    }
    sum.clamp(0.0, 1.0)
}

const _: () = assert!(SERIES_TERMS >= 2);
