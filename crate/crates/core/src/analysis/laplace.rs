//! Laplace transform of the conditional interference and its derivatives.
//!
//! Everything is carried in scaled form: with `z = y P G` and
//! `x = z ζ_ξ(r)`, the quantities `hₙ = yⁿ dⁿ(1 − Υ)/dyⁿ` depend on `x` only.
//! Where `x` is large they come from the series of `Υ` in `1/x`, where it
//! is small from the power series of `1 − Υ`, both summed against
//! precomputed log-moments of `ζ_ξ`; in between they are integrated
//! numerically.

use std::f64::consts::PI;

use crate::channel::LinkState;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_vec, Tolerance};

use super::model::{Model, SERIES_TERMS};

/// `hₙ(x) = yⁿ dⁿ(1 − Υ)/dyⁿ` for `n < out.len()`.
pub(crate) fn scaled_upsilon_terms(x: f64, m: u32, out: &mut [f64]) {
    let mf = m as f64;
    let u = x / mf;
    let base = 1.0 / (1.0 + u);
    let ups = base.powi(m as i32);
    out[0] = if u < 1e-3 {
        -(-mf * u.ln_1p()).exp_m1()
    } else {
        1.0 - ups
    };
    // (−1)^{n+1} (m)ₙ uⁿ (1+u)^{−m−n}
    let mut t = ups;
    for n in 1..out.len() {
        t *= -(mf + (n - 1) as f64) * u * base;
        out[n] = -t;
    }
}

/// `ln |a_j|` and sign of the coefficients of `1 − (1 + x/m)^{−m} = Σ a_j x^j`.
fn series_coefficients(m: u32) -> [(f64, f64); SERIES_TERMS + 1] {
    let mf = m as f64;
    let mut out = [(f64::NEG_INFINITY, 0.0); SERIES_TERMS + 1];
    let mut ln_c = 0.0;
    for j in 1..=SERIES_TERMS {
        if j > 1 {
            let jf = j as f64;
            ln_c += ((mf + jf - 1.0) / (jf * mf)).ln();
        }
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        out[j] = (ln_c, sign);
    }
    out
}

fn falling(j: usize, n: usize) -> f64 {
    (0..n).map(|i| (j - i) as f64).product::<f64>()
}

impl Model {
    /// `Σ_ξ ∫_{r_ξ^v}^{outer} r P_ξ w hₙ dr` for each scaled argument `z`
    /// and each order `n < orders`, laid out as `out[t * orders + n]`.
    ///
    /// Per state the range splits at knots into an inner stretch where
    /// `u = x/m ≥ 4` (series in `1/u`), a quadrature stretch, and an outer
    /// stretch where `x ≤ 0.25` (series in `x`).
    pub(crate) fn interference_integrals(
        &self,
        v: LinkState,
        r_s: f64,
        z: &[f64],
        orders: usize,
        states: &[LinkState],
    ) -> Result<Vec<f64>> {
        let nz = z.len();
        let mut total = vec![0.0; nz * orders];
        let radii = self.exclusion_radii(v, r_s);
        for &xi in states {
            let lo = radii.get(xi);
            if lo >= self.outer {
                continue;
            }
            let first = self.knot_at_or_after(lo);
            let mass = self.mass_knot(xi);
            for (t, &zt) in z.iter().enumerate() {
                if zt <= 0.0 {
                    continue;
                }
                let out = &mut total[t * orders..(t + 1) * orders];
                let sk = first.max(self.series_knot(xi, zt));
                let (end, far) = if sk < mass {
                    (sk, true)
                } else {
                    (first.max(mass), false)
                };
                let end = end.min(self.knots.len() - 1);
                let inner_end = self
                    .asymptotic_knots(xi, zt)
                    .saturating_sub(1)
                    .clamp(first, end);
                if inner_end > first {
                    self.add_inverse_series(xi, zt, first, inner_end, out);
                    self.add_middle(xi, zt, lo, self.knots[first], out)?;
                    self.add_middle(xi, zt, self.knots[inner_end], self.knots[end], out)?;
                } else {
                    self.add_middle(xi, zt, lo, self.knots[end].max(lo), out)?;
                }
                if far && end < self.segs.len() {
                    self.add_power_series(xi, zt, end, out);
                }
            }
        }
        Ok(total)
    }

    /// Segments of constant weight via the tabulated antiderivative, the
    /// rest by quadrature.
    fn add_middle(&self, xi: LinkState, z: f64, lo: f64, hi: f64, out: &mut [f64]) -> Result<()> {
        if !(hi > lo) {
            return Ok(());
        }
        let orders = out.len();
        let table = self.kernel(xi);
        if orders > table.orders() {
            return self.add_quadrature(xi, z, lo, hi, out);
        }
        let delta = table.delta();
        let pre = 0.5 * delta * (delta * (z * self.ch.reference_gain(xi)).ln()).exp();
        let dh2 = self.dh * self.dh;
        let alpha = self.ch.alpha(xi);
        let x_at = |r: f64| z * self.ch.reference_gain(xi) * (r * r + dh2).powf(-0.5 * alpha);
        let mut buf = [0.0; 16];
        let mut pending: Option<f64> = None;
        let mut a = lo;
        let mut s = self.seg_index(lo);
        while a < hi && s < self.segs.len() {
            let b = self.segs[s].b.min(hi);
            let p = self.seg_p(s, xi);
            match self.segs[s].const_weight {
                Some(w) if b > a => {
                    if let Some(q) = pending.take() {
                        self.add_quadrature(xi, z, q, a, out)?;
                    }
                    if p > 0.0 {
                        table.integral(x_at(b), x_at(a), &mut buf[..orders]);
                        let c = p * w * pre;
                        for (o, v) in out.iter_mut().zip(&buf) {
                            *o += c * v;
                        }
                    }
                }
                _ => {
                    pending.get_or_insert(a);
                }
            }
            a = b;
            s += 1;
        }
        if let Some(q) = pending {
            self.add_quadrature(xi, z, q, a, out)?;
        }
        Ok(())
    }

    /// Quadrature segment by segment in `θ`, with `r = a + (b − a)(1 − cos θ)/2`.
    /// The footprint weight has square-root edges at segment ends, which the
    /// map turns analytic.
    fn add_quadrature(
        &self,
        xi: LinkState,
        z: f64,
        lo: f64,
        hi: f64,
        out: &mut [f64],
    ) -> Result<()> {
        if !(hi > lo) {
            return Ok(());
        }
        let orders = out.len();
        let fp = self.fp;
        let m = self.ch.nakagami_m(xi);
        let mut h = vec![0.0; orders];
        let tol = Tolerance::new(1e-12 / (2.0 * self.lambda), 1e-9);
        let mut s = self.seg_index(lo);
        let mut a = lo;
        while a < hi && s < self.segs.len() {
            let b = self.segs[s].b.min(hi);
            let p = self.seg_p(s, xi);
            if b > a && p > 0.0 {
                let half = 0.5 * (b - a);
                let integrand = |theta: f64, o: &mut [f64]| {
                    let r = a + half * (1.0 - theta.cos());
                    let w = fp.weight(r);
                    if w == 0.0 {
                        o.iter_mut().for_each(|x| *x = 0.0);
                        return;
                    }
                    let base = r * p * w * half * theta.sin();
                    scaled_upsilon_terms(z * self.path_gain(xi, r), m, &mut h);
                    for (x, hn) in o.iter_mut().zip(&h) {
                        *x = base * hn;
                    }
                };
                let res = integrate_vec(integrand, &[0.0, PI], orders, &tol)?;
                for (acc, v) in out.iter_mut().zip(&res.value) {
                    *acc += v;
                }
            }
            a = b;
            s += 1;
        }
        Ok(())
    }

    /// `1 − Υ = 1 − Σ_j C(−m, j) u^{−m−j}` over knots `[a, b]`.
    fn add_inverse_series(&self, xi: LinkState, z: f64, a: usize, b: usize, out: &mut [f64]) {
        let m = self.ch.nakagami_m(xi) as usize;
        let mf = m as f64;
        let ln_n = self.ln_inverse_moments(xi, a, b);
        let ln_z = z.ln();
        out[0] += self.knot_mass(xi, a, b);
        // ln C(m+j−1, j), with the sign (−1)^j carried separately.
        let mut ln_binom = 0.0;
        for j in 0..=SERIES_TERMS {
            if j > 0 {
                ln_binom += ((m + j - 1) as f64 / j as f64).ln();
            }
            let k = (m + j) as f64;
            let e = ln_binom + k * (mf.ln() - ln_z) + ln_n[j];
            if e == f64::NEG_INFINITY {
                continue;
            }
            let term = e.exp();
            let sign_j = if j % 2 == 0 { 1.0 } else { -1.0 };
            // yⁿ dⁿ/dyⁿ y^{−k} = (−1)ⁿ k(k+1)…(k+n−1) y^{−k}
            let mut rising = 1.0;
            for (n, slot) in out.iter_mut().enumerate() {
                if n > 0 {
                    rising *= -(k + (n - 1) as f64);
                }
                *slot -= sign_j * rising * term;
            }
        }
    }

    /// `1 − Υ = Σ_j a_j x^j` from knot `k` to the outer edge.
    fn add_power_series(&self, xi: LinkState, z: f64, k: usize, out: &mut [f64]) {
        let ln_t = self.ln_suffix(xi, k);
        let coef = series_coefficients(self.ch.nakagami_m(xi));
        let ln_z = z.ln();
        for (n, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in n.max(1)..=SERIES_TERMS {
                let (ln_a, sign) = coef[j];
                let e = ln_a + j as f64 * ln_z + ln_t[j];
                if e == f64::NEG_INFINITY {
                    continue;
                }
                acc += sign * falling(j, n) * e.exp();
            }
            *slot += acc;
        }
    }

    /// Scaled derivatives `g̃ₙ = yⁿ g⁽ⁿ⁾(y)` of the log-Laplace exponent
    /// `g = −2λ Σ_ξ I₂ξ^v`, at `y = z / (P G)`.
    pub(crate) fn log_laplace_terms(
        &self,
        v: LinkState,
        r_s: f64,
        z: &[f64],
        orders: usize,
    ) -> Result<Vec<f64>> {
        let mut g = self.interference_integrals(v, r_s, z, orders, self.states())?;
        let scale = -2.0 * self.lambda;
        g.iter_mut().for_each(|x| *x *= scale);
        Ok(g)
    }

    /// `1 − Σ_k (−1)^k q_k L⁽ᵏ⁾(y_v)` evaluated as a coverage probability for
    /// each threshold.
    pub fn conditional_coverage_curve(
        &self,
        v: LinkState,
        r_s: f64,
        thresholds: &[f64],
    ) -> Result<Vec<f64>> {
        let m = self.ch.nakagami_m(v) as usize;
        let zeta_s = self.path_gain(v, r_s);
        let pg = self.ch.tx_gain();
        let n0 = self.ch.n0;
        let mut lt = vec![0.0; m];
        // Each threshold gets its own near/far split: sharing one quadrature
        // across widely spread thresholds refines all of them everywhere.
        let mut out = Vec::with_capacity(thresholds.len());
        for &t in thresholds {
            let z = m as f64 * t / zeta_s;
            let ny = n0 * z / pg;
            if !z.is_finite() || (t > 0.0 && z == 0.0) || noise_weight(ny, 0, m) == 0.0 {
                out.push(0.0);
                continue;
            }
            let g = self.log_laplace_terms(v, r_s, &[z], m)?;
            laplace_from_log_terms(&g, &mut lt);
            let mut cov = 0.0;
            for k in 0..m {
                cov += noise_weight(ny, k, m) * sign(k) * lt[k];
            }
            out.push(cov.clamp(0.0, 1.0));
        }
        Ok(out)
    }
}

fn sign(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `q_k / y^k = e^{−N₀y}/k! Σ_{j=k}^{m−1} (N₀y)^{j−k}/(j−k)!`.
pub(crate) fn noise_weight(ny: f64, k: usize, m: usize) -> f64 {
    if ny > 1e4 {
        return 0.0;
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for i in 1..(m - k) {
        term *= ny / i as f64;
        sum += term;
    }
    let k_fact: f64 = (1..=k).map(|i| i as f64).product();
    (-ny).exp() * sum / k_fact
}

/// Scaled derivatives `L̃ₖ = yᵏ L⁽ᵏ⁾` of `L = e^g` from `g̃ₙ = yⁿ g⁽ⁿ⁾`,
/// by `L̃ₖ = Σ_{j<k} C(k−1, j) g̃_{k−j} L̃ⱼ`.
pub(crate) fn laplace_from_log_terms(g: &[f64], out: &mut [f64]) {
    out[0] = g[0].exp();
    for k in 1..out.len() {
        let mut acc = 0.0;
        let mut binom = 1.0;
        for j in 0..k {
            acc += binom * g[k - j] * out[j];
            binom = binom * (k - 1 - j) as f64 / (j + 1) as f64;
        }
        out[k] = acc;
    }
}

pub(crate) fn check_orders(orders: usize) -> Result<()> {
    if orders == 0 || orders > 16 {
        return Err(Error::Validation(format!(
            "derivative order count {orders} outside 1..=16"
        )));
    }
    Ok(())
}
