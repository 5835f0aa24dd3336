//! Prepared radial model: piecewise-constant LoS segments over the
//! footprint, cumulative void integrals, and the log-moment tables used to
//! sum far-field interference as a power series.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::channel::{los_step_function, ChannelParams, LinkState};
use crate::error::{Error, Result};
use crate::geometry::{boundary_radii, AntennaFootprint, ExclusionRadii};
use crate::quadrature::{integrate, integrate_vec, Tolerance};
use crate::scenario::ScenarioConfig;

use super::kernel::KernelTable;

/// Terms of the far-field power series.
pub(crate) const SERIES_TERMS: usize = 32;
/// Largest `x = y P G ζ(r)` for which the series is used.
pub(crate) const SERIES_RADIUS: f64 = 0.25;
/// Smallest `u = x / m` for which the inverse series is used near the UE.
pub(crate) const ASYMPTOTIC_RATIO: f64 = 4.0;
/// Largest truncation radius of an omnidirectional footprint, m.
pub const TRUNCATION_CEILING: f64 = 30_000.0;
/// Relative mean-interference tail beyond the truncation radius.
pub const TRUNCATION_TAIL: f64 = 1e-6;
/// Expected-count threshold below which interference mass is dropped.
const NEGLIGIBLE_MASS: f64 = 1e-15;
/// Probability mass below which outer segments are skipped.
const NEGLIGIBLE_DENSITY: f64 = 1e-13;

/// Which interferer classes the model carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// LoS and NLoS base stations with thermal noise.
    Full,
    /// LoS base stations only, no noise.
    LosOnly,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Segment {
    pub a: f64,
    pub b: f64,
    pub p_los: f64,
    /// `π + φ₁ − φ₂` when it is constant over the segment.
    pub const_weight: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Model {
    pub(crate) cfg: ScenarioConfig,
    pub(crate) ch: ChannelParams,
    pub(crate) mode: Mode,
    pub(crate) lambda: f64,
    pub(crate) dh: f64,
    pub(crate) fp: AntennaFootprint,
    pub(crate) inner: f64,
    pub(crate) outer: f64,
    pub(crate) knots: Vec<f64>,
    pub(crate) segs: Vec<Segment>,
    /// `∫ r w dr` over each segment.
    geo: Vec<f64>,
    /// Cumulative void integrals `∫_{inner}^{knot_i} r P_ξ w dr`, per state.
    cum: [Vec<f64>; 2],
    /// `ln ∫_{knot_i}^{outer} r P_ξ w ζ_ξ^j dr` for `j = 0..=J`, per state.
    ln_suffix: [Vec<[f64; SERIES_TERMS + 1]>; 2],
    /// First knot beyond which the interferer mass of each state is negligible.
    mass_knot: [usize; 2],
    /// `ln ∫_{inner}^{knot_i} r P_ξ w ζ_ξ^{−(m_ξ+j)} dr` for `j = 0..=J`, per state.
    ln_prefix_inverse: [Vec<[f64; SERIES_TERMS + 1]>; 2],
    kernels: [Arc<KernelTable>; 2],
}

/// Kernel tables depend only on `(m, α, orders)`; build each once.
fn kernel_table(ch: &ChannelParams, xi: LinkState) -> Result<Arc<KernelTable>> {
    type Key = (u32, u64, usize);
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<KernelTable>>>> = OnceLock::new();
    let orders = ch
        .nakagami_m(LinkState::Los)
        .max(ch.nakagami_m(LinkState::Nlos)) as usize;
    let key = (ch.nakagami_m(xi), ch.alpha(xi).to_bits(), orders);
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().expect("kernel cache poisoned").get(&key) {
        return Ok(t.clone());
    }
    let table = Arc::new(KernelTable::new(key.0, ch.alpha(xi), orders)?);
    cache
        .lock()
        .expect("kernel cache poisoned")
        .insert(key, table.clone());
    Ok(table)
}

fn state_index(v: LinkState) -> usize {
    match v {
        LinkState::Los => 0,
        LinkState::Nlos => 1,
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

/// `ln ∫_a^b r (r² + Δh²)^{−β} dr`, exact.
pub(crate) fn ln_power_moment(a: f64, b: f64, dh2: f64, beta: f64) -> f64 {
    let da = a * a + dh2;
    let db = b * b + dh2;
    if !(db > da) {
        return f64::NEG_INFINITY;
    }
    let l = (db / da).ln();
    let e = 1.0 - beta;
    if e > 1e-12 {
        // Growing integrand: factor out the upper end so nothing overflows.
        return -std::f64::consts::LN_2 - e.ln() + e * db.ln() + (-(-e * l).exp_m1()).ln();
    }
    let h = if e.abs() <= 1e-12 {
        l
    } else {
        (e * l).exp_m1() / e
    };
    -std::f64::consts::LN_2 + e * da.ln() + h.ln()
}

/// `ln(e^a − e^b)` for `a ≥ b`.
pub(crate) fn log_sub(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    if !(a > b) {
        return f64::NEG_INFINITY;
    }
    a + (-(b - a).exp_m1()).ln()
}

impl Model {
    pub fn new(cfg: &ScenarioConfig, mode: Mode) -> Result<Model> {
        cfg.validate()?;
        let mut ch = cfg.channel();
        if mode == Mode::LosOnly {
            ch.n0 = 0.0;
        }
        let fp = cfg.footprint()?;
        let dh = cfg.delta_h();
        let inner = fp.inner_radius;
        let outer = if fp.is_omnidirectional() {
            truncation_radius(cfg, &ch)
        } else {
            fp.outer_radius()
        };

        let los = los_step_function(&cfg.env, cfg.h_u, cfg.h_b, outer);
        let mut knots = vec![inner];
        knots.extend(
            los.breakpoints
                .iter()
                .copied()
                .filter(|&r| r > inner && r < outer),
        );
        knots.extend(fp.angular_breakpoints());
        knots.push(outer);
        knots.sort_by(f64::total_cmp);
        knots.dedup_by(|b, a| (*b - *a).abs() <= 1e-9 * a.abs().max(1.0));
        let last = knots.len() - 1;
        knots[last] = outer;

        let inscribed = fp.inscribed_radius();
        let segs: Vec<Segment> = knots
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                let const_weight = if fp.is_omnidirectional() || w[1] <= inscribed * (1.0 + 1e-12) {
                    Some(PI)
                } else {
                    None
                };
                Segment {
                    a: w[0],
                    b: w[1],
                    p_los: los.value(mid),
                    const_weight,
                }
            })
            .collect();

        let mut model = Model {
            cfg: cfg.clone(),
            ch,
            mode,
            lambda: cfg.lambda,
            dh,
            fp,
            inner,
            outer,
            knots,
            segs,
            geo: Vec::new(),
            cum: [Vec::new(), Vec::new()],
            ln_suffix: [Vec::new(), Vec::new()],
            mass_knot: [0, 0],
            ln_prefix_inverse: [Vec::new(), Vec::new()],
            kernels: [
                kernel_table(&ch, LinkState::Los)?,
                kernel_table(&ch, LinkState::Nlos)?,
            ],
        };
        model.geo = (0..model.segs.len())
            .map(|s| model.geo_partial(s, model.segs[s].a, model.segs[s].b))
            .collect::<Result<_>>()?;
        for v in LinkState::BOTH {
            let k = state_index(v);
            let mut acc = vec![0.0; model.segs.len() + 1];
            for s in 0..model.segs.len() {
                acc[s + 1] = acc[s] + model.seg_p(s, v) * model.geo[s];
            }
            model.cum[k] = acc;
        }
        model.build_far_tables()?;
        model.build_inverse_tables()?;
        Ok(model)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn channel(&self) -> &ChannelParams {
        &self.ch
    }

    pub fn footprint(&self) -> &AntennaFootprint {
        &self.fp
    }

    /// Integration domain `[r_0, r_e + r_M]`, or `[0, R_trunc]` for omni.
    pub fn domain(&self) -> (f64, f64) {
        (self.inner, self.outer)
    }

    pub fn states(&self) -> &'static [LinkState] {
        match self.mode {
            Mode::Full => &LinkState::BOTH,
            Mode::LosOnly => &[LinkState::Los],
        }
    }

    pub(crate) fn seg_p(&self, s: usize, v: LinkState) -> f64 {
        let p = self.segs[s].p_los;
        match (v, self.mode) {
            (LinkState::Los, _) => p,
            (LinkState::Nlos, Mode::Full) => 1.0 - p,
            (LinkState::Nlos, Mode::LosOnly) => 0.0,
        }
    }

    /// Segment containing `r`, clamped to the domain.
    pub(crate) fn seg_index(&self, r: f64) -> usize {
        let n = self.segs.len();
        match self.knots.binary_search_by(|k| k.total_cmp(&r)) {
            Ok(i) => i.min(n - 1),
            Err(i) => i.saturating_sub(1).min(n - 1),
        }
    }

    /// Index of the first knot `≥ r`.
    pub(crate) fn knot_at_or_after(&self, r: f64) -> usize {
        self.knots.partition_point(|&k| k < r * (1.0 - 1e-13))
    }

    pub fn state_probability(&self, v: LinkState, r: f64) -> f64 {
        if r < self.inner || r > self.outer {
            return 0.0;
        }
        self.seg_p(self.seg_index(r), v)
    }

    pub fn weight(&self, r: f64) -> f64 {
        self.fp.weight(r)
    }

    /// `ζ_ξ(r)`.
    pub fn path_gain(&self, v: LinkState, r: f64) -> f64 {
        let d2 = r * r + self.dh * self.dh;
        self.ch.reference_gain(v) * d2.powf(-0.5 * self.ch.alpha(v))
    }

    pub(crate) fn ln_path_gain(&self, v: LinkState, r: f64) -> f64 {
        let d2 = r * r + self.dh * self.dh;
        self.ch.reference_gain(v).ln() - 0.5 * self.ch.alpha(v) * d2.ln()
    }

    /// `∫_a^b r w(r) dr` within segment `s`.
    pub(crate) fn geo_partial(&self, s: usize, a: f64, b: f64) -> Result<f64> {
        if !(b > a) {
            return Ok(0.0);
        }
        match self.segs[s].const_weight {
            Some(w) => Ok(0.5 * w * (b * b - a * a)),
            None => {
                let fp = self.fp;
                let tol = Tolerance::new(1e-14 * b * b, 1e-11);
                integrate(
                    |r| r * fp.angular_extent_unchecked(r).weight(),
                    &[a, b],
                    &tol,
                )
                .map(|(v, _)| v)
            }
        }
    }

    /// Void integral `∫_{r_0}^{x} r P_ξ(r) w(r) dr`.
    pub fn void_integral(&self, xi: LinkState, x: f64) -> Result<f64> {
        let k = state_index(xi);
        if x <= self.inner {
            return Ok(0.0);
        }
        if x >= self.outer {
            return Ok(self.cum[k][self.segs.len()]);
        }
        let s = self.seg_index(x);
        let p = self.seg_p(s, xi);
        let partial = if p == 0.0 {
            0.0
        } else {
            p * self.geo_partial(s, self.segs[s].a, x)?
        };
        Ok(self.cum[k][s] + partial)
    }

    pub fn exclusion_radii(&self, v: LinkState, r_s: f64) -> ExclusionRadii {
        let mut radii = boundary_radii(r_s, v, &self.ch, &self.fp);
        radii.los = radii.los.min(self.outer);
        radii.nlos = radii.nlos.min(self.outer);
        radii
    }

    /// `I₁L^v + I₁N^v` for a serving BS of state `v` at `r_s`.
    pub fn void_exponent(&self, v: LinkState, r_s: f64) -> Result<f64> {
        let radii = self.exclusion_radii(v, r_s);
        let mut total = 0.0;
        for &xi in self.states() {
            total += self.void_integral(xi, radii.get(xi))?;
        }
        Ok(total)
    }

    /// `λ P_v(r_s) exp(−2λ (I₁L^v + I₁N^v))`.
    pub fn serving_density(&self, v: LinkState, r_s: f64) -> Result<f64> {
        let p = self.state_probability(v, r_s);
        if p == 0.0 {
            return Ok(0.0);
        }
        Ok(self.lambda * p * (-2.0 * self.lambda * self.void_exponent(v, r_s)?).exp())
    }

    /// Expected number of base stations in the domain.
    pub fn expected_count(&self) -> f64 {
        2.0 * self.lambda * self.geo.iter().sum::<f64>()
    }

    pub(crate) fn ln_suffix(&self, xi: LinkState, knot: usize) -> &[f64; SERIES_TERMS + 1] {
        &self.ln_suffix[state_index(xi)][knot]
    }

    pub(crate) fn kernel(&self, xi: LinkState) -> &KernelTable {
        &self.kernels[state_index(xi)]
    }

    pub(crate) fn mass_knot(&self, xi: LinkState) -> usize {
        self.mass_knot[state_index(xi)]
    }

    fn build_far_tables(&mut self) -> Result<()> {
        let n = self.segs.len();
        let dh2 = self.dh * self.dh;
        for v in LinkState::BOTH {
            let k = state_index(v);
            let alpha = self.ch.alpha(v);
            let ln_a = self.ch.reference_gain(v).ln();
            let mut seg_moments = vec![[f64::NEG_INFINITY; SERIES_TERMS + 1]; n];
            for s in 0..n {
                let p = self.seg_p(s, v);
                if p == 0.0 {
                    continue;
                }
                let seg = self.segs[s];
                let row = &mut seg_moments[s];
                match seg.const_weight {
                    Some(w) => {
                        row[0] = (p * self.geo[s]).ln();
                        for (j, slot) in row.iter_mut().enumerate().skip(1) {
                            let beta = 0.5 * alpha * j as f64;
                            *slot = p.ln()
                                + w.ln()
                                + j as f64 * ln_a
                                + ln_power_moment(seg.a, seg.b, dh2, beta);
                        }
                    }
                    None => {
                        let fp = self.fp;
                        let da = seg.a * seg.a + dh2;
                        let tol = Tolerance::new(0.0, 1e-11);
                        let res = integrate_vec(
                            |r, out| {
                                let base = r * fp.angular_extent_unchecked(r).weight();
                                let q = ((r * r + dh2) / da).powf(-0.5 * alpha);
                                let mut acc = base;
                                for slot in out.iter_mut() {
                                    *slot = acc;
                                    acc *= q;
                                }
                            },
                            &[seg.a, seg.b],
                            SERIES_TERMS + 1,
                            &Tolerance { abs: 1e-300, ..tol },
                        )?;
                        for j in 0..=SERIES_TERMS {
                            let scale = j as f64 * (ln_a - 0.5 * alpha * da.ln());
                            row[j] = p.ln() + res.value[j].max(0.0).ln() + scale;
                        }
                    }
                }
            }
            let mut suffix = vec![[f64::NEG_INFINITY; SERIES_TERMS + 1]; n + 1];
            for s in (0..n).rev() {
                for j in 0..=SERIES_TERMS {
                    suffix[s][j] = log_add(seg_moments[s][j], suffix[s + 1][j]);
                }
            }
            let threshold = (NEGLIGIBLE_MASS / (2.0 * self.lambda)).ln();
            self.mass_knot[k] = (0..=n).find(|&i| suffix[i][0] < threshold).unwrap_or(n);
            self.ln_suffix[k] = suffix;
        }
        Ok(())
    }

    /// `ln ∫_{knot_a}^{knot_b} r P_ξ w ζ_ξ^{−(m_ξ+j)} dr`.
    pub(crate) fn ln_inverse_moments(
        &self,
        xi: LinkState,
        a: usize,
        b: usize,
    ) -> [f64; SERIES_TERMS + 1] {
        let t = &self.ln_prefix_inverse[state_index(xi)];
        let mut out = [f64::NEG_INFINITY; SERIES_TERMS + 1];
        for j in 0..=SERIES_TERMS {
            out[j] = log_sub(t[b][j], t[a][j]);
        }
        out
    }

    /// `∫_{knot_a}^{knot_b} r P_ξ w dr`.
    pub(crate) fn knot_mass(&self, xi: LinkState, a: usize, b: usize) -> f64 {
        let c = &self.cum[state_index(xi)];
        c[b] - c[a]
    }

    /// Number of leading knots at which `u = z ζ_ξ / m ≥ ASYMPTOTIC_RATIO`.
    pub(crate) fn asymptotic_knots(&self, xi: LinkState, z: f64) -> usize {
        let m = self.ch.nakagami_m(xi) as f64;
        let ln_bound = (ASYMPTOTIC_RATIO * m / z).ln();
        self.knots
            .partition_point(|&r| self.ln_path_gain(xi, r) >= ln_bound)
    }

    fn build_inverse_tables(&mut self) -> Result<()> {
        let n = self.segs.len();
        let dh2 = self.dh * self.dh;
        for v in LinkState::BOTH {
            let k = state_index(v);
            let alpha = self.ch.alpha(v);
            let ln_a = self.ch.reference_gain(v).ln();
            let m = self.ch.nakagami_m(v) as usize;
            let mut prefix = vec![[f64::NEG_INFINITY; SERIES_TERMS + 1]; n + 1];
            for s in 0..n {
                let mut row = [f64::NEG_INFINITY; SERIES_TERMS + 1];
                let p = self.seg_p(s, v);
                let seg = self.segs[s];
                if p > 0.0 && seg.b * seg.b + dh2 > 0.0 {
                    match seg.const_weight {
                        Some(w) => {
                            for (j, slot) in row.iter_mut().enumerate() {
                                let kk = (m + j) as f64;
                                *slot = p.ln() + w.ln() - kk * ln_a
                                    + ln_power_moment(seg.a, seg.b, dh2, -0.5 * alpha * kk);
                            }
                        }
                        None => {
                            let fp = self.fp;
                            let db = seg.b * seg.b + dh2;
                            let res = integrate_vec(
                                |r, out| {
                                    let base = r * fp.angular_extent_unchecked(r).weight();
                                    let q = ((r * r + dh2) / db).powf(0.5 * alpha);
                                    let mut acc = base * q.powi(m as i32);
                                    for slot in out.iter_mut() {
                                        *slot = acc;
                                        acc *= q;
                                    }
                                },
                                &[seg.a, seg.b],
                                SERIES_TERMS + 1,
                                &Tolerance {
                                    abs: 1e-300,
                                    rel: 1e-11,
                                    max_panels: 4000,
                                },
                            )?;
                            for (j, slot) in row.iter_mut().enumerate() {
                                let kk = (m + j) as f64;
                                *slot = p.ln()
                                    + res.value[j].max(0.0).ln()
                                    + kk * (0.5 * alpha * db.ln() - ln_a);
                            }
                        }
                    }
                }
                for j in 0..=SERIES_TERMS {
                    prefix[s + 1][j] = log_add(prefix[s][j], row[j]);
                }
            }
            self.ln_prefix_inverse[k] = prefix;
        }
        Ok(())
    }

    /// Knot index from which the far series converges for every `z ≤ z_max`,
    /// where `x = z ζ_ξ(r)`.
    pub(crate) fn series_knot(&self, xi: LinkState, z_max: f64) -> usize {
        if z_max <= 0.0 {
            return 0;
        }
        let ln_bound = (SERIES_RADIUS / z_max).ln();
        self.knots
            .partition_point(|&r| self.ln_path_gain(xi, r) > ln_bound)
    }

    /// Upper end of the outer integral for serving state `v`: beyond it the
    /// serving-distance mass is negligible.
    pub(crate) fn outer_cutoff(&self, v: LinkState) -> Result<f64> {
        let o2 = self.outer * self.outer;
        for (i, &a) in self.knots.iter().enumerate() {
            if i == 0 {
                continue;
            }
            let p_bound = match v {
                LinkState::Los => self.state_probability(v, a),
                LinkState::Nlos => 1.0,
            };
            let bound = self.lambda
                * p_bound
                * (-2.0 * self.lambda * self.void_exponent(v, a)?).exp()
                * PI
                * (o2 - a * a);
            if bound < NEGLIGIBLE_DENSITY {
                return Ok(a);
            }
        }
        Ok(self.outer)
    }

    pub(crate) fn check_radius(&self, r: f64) -> Result<()> {
        let slack = 1e-9 * self.outer.max(1.0);
        if r < self.inner - slack || r > self.outer + slack {
            return Err(Error::OutOfFootprint {
                r,
                lo: self.inner,
                hi: self.outer,
            });
        }
        Ok(())
    }
}

/// Smallest LoS breakpoint beyond which the mean interference of an
/// unbounded omnidirectional field is below `TRUNCATION_TAIL` of its total.
pub fn truncation_radius(cfg: &ScenarioConfig, ch: &ChannelParams) -> f64 {
    let env = &cfg.env;
    let dh = cfg.delta_h();
    let dh2 = dh * dh;
    let start = if dh.abs() < 1.0 { 1.0 } else { 0.0 };
    let los = los_step_function(env, cfg.h_u, cfg.h_b, TRUNCATION_CEILING);
    let mut edges = vec![start];
    edges.extend(los.breakpoints.iter().copied().filter(|&r| r > start));
    edges.push(TRUNCATION_CEILING);

    let moment = |v: LinkState, a: f64, b: f64| -> f64 {
        let beta = 0.5 * ch.alpha(v);
        ch.reference_gain(v) * PI * ln_power_moment(a, b, dh2, beta).exp()
    };
    let contributions: Vec<f64> = edges
        .windows(2)
        .map(|w| {
            let p = los.value(0.5 * (w[0] + w[1]));
            p * moment(LinkState::Los, w[0], w[1]) + (1.0 - p) * moment(LinkState::Nlos, w[0], w[1])
        })
        .collect();
    // Beyond the ceiling the LoS plateau can only decrease.
    let p_last = los.value(TRUNCATION_CEILING);
    let tail_beyond = |v: LinkState, p: f64| -> f64 {
        let beta = 0.5 * ch.alpha(v);
        let d = TRUNCATION_CEILING * TRUNCATION_CEILING + dh2;
        p * ch.reference_gain(v) * PI * 0.5 * d.powf(1.0 - beta) / (beta - 1.0)
    };
    let far = tail_beyond(LinkState::Los, p_last) + tail_beyond(LinkState::Nlos, 1.0);
    let total: f64 = contributions.iter().sum::<f64>() + far;

    let mut tail = far;
    let mut radius = TRUNCATION_CEILING;
    for (i, c) in contributions.iter().enumerate().rev() {
        let candidate = tail + c;
        if candidate >= TRUNCATION_TAIL * total {
            break;
        }
        tail = candidate;
        radius = edges[i];
    }
    if tail > TRUNCATION_TAIL * total || radius >= TRUNCATION_CEILING {
        log::debug!("truncation radius capped at {TRUNCATION_CEILING} m");
    }
    radius.max(edges[1])
}
