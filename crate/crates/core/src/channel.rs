//! Path loss, Nakagami-m fading and the building-grid LoS probability.

use std::fmt;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::units::{db_to_linear, dbm_to_watts};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkState {
    Los,
    Nlos,
}

impl LinkState {
    pub const BOTH: [LinkState; 2] = [LinkState::Los, LinkState::Nlos];
}

impl fmt::Display for LinkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinkState::Los => f.write_str("LoS"),
            LinkState::Nlos => f.write_str("NLoS"),
        }
    }
}

/// Link budget in linear units. Reference gains `a_*` are at 1 m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    pub a_los: f64,
    pub a_nlos: f64,
    pub m_los: u32,
    pub m_nlos: u32,
    /// Transmit power, W.
    pub p_tx: f64,
    /// BS antenna gain toward the UE (main or side lobe).
    pub g_b: f64,
    /// UE antenna gain.
    pub g_u: f64,
    /// Noise power, W.
    pub n0: f64,
}

impl ChannelParams {
    /// Default link budget of the urban reference scenario: an omnidirectional
    /// UE above BS height (side-lobe BS gain) with 200 kHz of thermal noise.
    pub fn table_default() -> Self {
        ChannelParams {
            alpha_los: 2.09,
            alpha_nlos: 3.75,
            a_los: db_to_linear(-41.1),
            a_nlos: db_to_linear(-32.9),
            m_los: 3,
            m_nlos: 1,
            p_tx: dbm_to_watts(46.0),
            g_b: 0.5,
            g_u: 1.0,
            n0: dbm_to_watts(-174.0 + 10.0 * 200e3_f64.log10()),
        }
    }

    pub fn alpha(&self, v: LinkState) -> f64 {
        match v {
            LinkState::Los => self.alpha_los,
            LinkState::Nlos => self.alpha_nlos,
        }
    }

    pub fn reference_gain(&self, v: LinkState) -> f64 {
        match v {
            LinkState::Los => self.a_los,
            LinkState::Nlos => self.a_nlos,
        }
    }

    pub fn nakagami_m(&self, v: LinkState) -> u32 {
        match v {
            LinkState::Los => self.m_los,
            LinkState::Nlos => self.m_nlos,
        }
    }

    /// `P_tx · G_b · G_u`.
    pub fn tx_gain(&self) -> f64 {
        self.p_tx * self.g_b * self.g_u
    }
}

/// Building statistics of the propagation environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    /// Fraction of land covered by buildings.
    pub a: f64,
    /// Buildings per km².
    pub b: f64,
    /// Rayleigh scale of building heights, m.
    pub c: f64,
    #[serde(default)]
    pub label: String,
}

impl Environment {
    pub fn new(a: f64, b: f64, c: f64, label: impl Into<String>) -> Self {
        Environment {
            a,
            b,
            c,
            label: label.into(),
        }
    }

    pub fn urban() -> Self {
        Environment::new(0.3, 500.0, 15.0, "urban")
    }

    // ITU-R P.1410 building statistics.
    pub fn suburban() -> Self {
        Environment::new(0.1, 750.0, 8.0, "suburban")
    }

    pub fn dense_urban() -> Self {
        Environment::new(0.5, 300.0, 20.0, "dense-urban")
    }

    pub fn highrise_urban() -> Self {
        Environment::new(0.5, 300.0, 50.0, "highrise-urban")
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "urban" => Some(Self::urban()),
            "suburban" => Some(Self::suburban()),
            "dense-urban" | "dense_urban" => Some(Self::dense_urban()),
            "highrise-urban" | "highrise_urban" => Some(Self::highrise_urban()),
            _ => None,
        }
    }

    /// Breakpoint spacing scale `√(ab)/1000` in 1/m.
    fn density_scale(&self) -> f64 {
        (self.a * self.b).sqrt() / 1000.0
    }

    /// Index `M = ⌊r√(ab)/1000 − 1⌋` of the plateau containing `r`.
    pub fn plateau_index(&self, r: f64) -> i64 {
        (r * self.density_scale() - 1.0).floor() as i64
    }

    /// Ground distance `r_k = 1000(k+1)/√(ab)` where plateau `k` starts.
    pub fn breakpoint(&self, k: i64) -> f64 {
        (k + 1) as f64 / self.density_scale()
    }

    /// LoS probability on plateau `M`: the product of the probabilities that
    /// each of the `M + 1` crossed buildings is lower than the ray.
    pub fn los_product(&self, m: i64, h_u: f64, h_b: f64) -> f64 {
        if m < 0 {
            return 1.0;
        }
        let two_c2 = 2.0 * self.c * self.c;
        let count = (m + 1) as f64;
        let mut p = 1.0;
        for n in 0..=m {
            let h = h_b - (n as f64 + 0.5) * (h_b - h_u) / count;
            p *= -(-(h * h) / two_c2).exp_m1();
            if p == 0.0 {
                break;
            }
        }
        p
    }
}

/// `A_v (r² + Δh²)^{−α_v/2}`.
pub fn path_loss(r: f64, delta_h: f64, v: LinkState, ch: &ChannelParams) -> f64 {
    let d2 = r * r + delta_h * delta_h;
    ch.reference_gain(v) * d2.powf(-0.5 * ch.alpha(v))
}

pub fn los_probability(r: f64, h_u: f64, h_b: f64, env: &Environment) -> f64 {
    env.los_product(env.plateau_index(r), h_u, h_b)
}

/// Piecewise-constant LoS probability. `plateaus[0]` covers `[0, r_0)` and
/// `plateaus[k + 1]` covers `[r_k, r_{k+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct LosStepFunction {
    pub breakpoints: Vec<f64>,
    pub plateaus: Vec<f64>,
    pub h_u: f64,
    pub h_b: f64,
    env: Environment,
}

pub fn los_step_function(env: &Environment, h_u: f64, h_b: f64, r_max: f64) -> LosStepFunction {
    let mut breakpoints = Vec::new();
    let mut plateaus = vec![1.0];
    let mut k = 0_i64;
    loop {
        let r_k = env.breakpoint(k);
        if r_k > r_max {
            break;
        }
        breakpoints.push(r_k);
        plateaus.push(env.los_product(k, h_u, h_b));
        k += 1;
    }
    LosStepFunction {
        breakpoints,
        plateaus,
        h_u,
        h_b,
        env: env.clone(),
    }
}

impl LosStepFunction {
    pub fn value(&self, r: f64) -> f64 {
        let m = self.env.plateau_index(r);
        let slot = (m + 1).max(0) as usize;
        match self.plateaus.get(slot) {
            Some(&p) => p,
            None => self.env.los_product(m, self.h_u, self.h_b),
        }
    }

    pub fn environment(&self) -> &Environment {
        &self.env
    }
}

/// Nakagami-m power CDF with unit mean, integer `m`.
pub fn fading_cdf(omega: f64, m: u32) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    let x = m as f64 * omega;
    if m == 1 {
        return -(-x).exp_m1();
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..m {
        term *= x / k as f64;
        sum += term;
    }
    (1.0 - sum * (-x).exp()).clamp(0.0, 1.0)
}

/// Unit-mean Gamma(m, 1/m) draw as a scaled sum of `m` unit exponentials.
pub fn sample_fading<R: Rng + ?Sized>(m: u32, rng: &mut R) -> f64 {
    let mut acc = 0.0;
    for _ in 0..m {
        let e: f64 = rng.sample(Exp1);
        acc += e;
    }
    acc / m as f64
}

/// `P_tx G_tot ζ_v(r) Ω`.
pub fn received_power(r: f64, delta_h: f64, v: LinkState, omega: f64, ch: &ChannelParams) -> f64 {
    ch.tx_gain() * path_loss(r, delta_h, v, ch) * omega
}
