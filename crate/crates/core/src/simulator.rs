//! Monte Carlo realizations of the network: Poisson base stations in the
//! antenna footprint, independent LoS states and Nakagami fading.
//!
//! Realization `i` of a run seeded with `s` draws from ChaCha8 stream `i`
//! of seed `s`, so estimates do not depend on the thread count.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::truncation_radius;
use crate::channel::{los_step_function, sample_fading, ChannelParams, LinkState, LosStepFunction};
use crate::error::{Error, Result};
use crate::geometry::AntennaFootprint;
use crate::scenario::ScenarioConfig;

/// Environment variable capping the worker threads of a run.
pub const THREADS_ENV: &str = "AERIAL_LINK_THREADS";

/// Which base station serves the UE.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AssociationRule {
    /// Largest mean received power `P G ζ_v(r)`, fading ignored. This is the
    /// rule the analytical serving-distance law assumes.
    #[default]
    StrongestMeanPower,
    /// Largest instantaneous SINR, i.e. largest faded received power.
    MaxInstantaneousSinr,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSettings {
    pub realizations: usize,
    pub seed: u64,
    pub association: AssociationRule,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        SimulationSettings {
            realizations: 100_000,
            seed: 1,
            association: AssociationRule::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaseStation {
    /// Ground distance to the UE, m.
    pub r: f64,
    /// Azimuth about the UE ground projection, measured from the tilt
    /// direction, rad.
    pub azimuth: f64,
    pub los: bool,
    /// Unit-mean fading power gain.
    pub fading: f64,
}

impl BaseStation {
    pub fn state(&self) -> LinkState {
        if self.los {
            LinkState::Los
        } else {
            LinkState::Nlos
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkRealization {
    pub bs_list: Vec<BaseStation>,
    pub serving_index: Option<usize>,
    pub sinr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    /// Sample standard deviation over `√n`.
    pub std_error: f64,
    pub n_realizations: usize,
    pub seed: u64,
}

impl McEstimate {
    fn from_samples(samples: impl Iterator<Item = f64> + Clone, n: usize, seed: u64) -> Self {
        if n == 0 {
            return McEstimate {
                value: f64::NAN,
                std_error: f64::NAN,
                n_realizations: 0,
                seed,
            };
        }
        let mean = samples.clone().sum::<f64>() / n as f64;
        let ss: f64 = samples.map(|x| (x - mean) * (x - mean)).sum();
        let var = if n > 1 { ss / (n - 1) as f64 } else { 0.0 };
        McEstimate {
            value: mean,
            std_error: (var / n as f64).sqrt(),
            n_realizations: n,
            seed,
        }
    }
}

/// SINR of every realization of one run, in realization order.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrEnsemble {
    pub sinr: Vec<f64>,
    pub seed: u64,
}

impl SinrEnsemble {
    /// Fraction of realizations with SINR above `t`.
    pub fn coverage(&self, t: f64) -> McEstimate {
        let it = self
            .sinr
            .iter()
            .map(move |&s| if s > t { 1.0 } else { 0.0 });
        McEstimate::from_samples(it, self.sinr.len(), self.seed)
    }

    pub fn ccdf(&self, thresholds: &[f64]) -> Vec<McEstimate> {
        thresholds.iter().map(|&t| self.coverage(t)).collect()
    }

    /// Mean of `log₂(1 + SINR)`, bit/s/Hz.
    pub fn throughput(&self) -> McEstimate {
        let it = self
            .sinr
            .iter()
            .map(|&s| s.ln_1p() / std::f64::consts::LN_2);
        McEstimate::from_samples(it, self.sinr.len(), self.seed)
    }
}

/// Region in which base stations are drawn: the footprint ellipse, or the
/// disk of the truncation radius for an omnidirectional antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Ellipse(AntennaFootprint),
    Disk(f64),
}

impl Region {
    pub fn area(&self) -> f64 {
        match self {
            Region::Ellipse(fp) => fp.area(),
            Region::Disk(r) => PI * r * r,
        }
    }

    pub fn outer_radius(&self) -> f64 {
        match self {
            Region::Ellipse(fp) => fp.outer_radius(),
            Region::Disk(r) => *r,
        }
    }

    /// Uniform point as `(r, azimuth)` about the UE ground projection.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let u: f64 = rng.random();
        let theta = 2.0 * PI * rng.random::<f64>();
        match self {
            Region::Disk(radius) => (radius * u.sqrt(), theta - PI),
            Region::Ellipse(fp) => {
                let rho = u.sqrt();
                let (s, c) = theta.sin_cos();
                let x = fp.center_offset + fp.semi_major * rho * c;
                let y = fp.semi_minor * rho * s;
                (x.hypot(y), y.atan2(x))
            }
        }
    }
}

/// `(r, azimuth)` of a Poisson field of density `lambda` (per m²) in `region`.
pub fn sample_bs_positions<R: Rng + ?Sized>(
    lambda: f64,
    region: &Region,
    rng: &mut R,
) -> Vec<(f64, f64)> {
    let n = poisson(lambda * region.area(), rng);
    (0..n).map(|_| region.sample(rng)).collect()
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if !(mean > 0.0) {
        return 0;
    }
    let d = Poisson::new(mean).expect("positive finite mean");
    d.sample(rng) as usize
}

/// Scenario prepared for repeated sampling.
#[derive(Debug, Clone)]
pub struct Deployment {
    pub ch: ChannelParams,
    pub region: Region,
    pub lambda: f64,
    pub delta_h: f64,
    los: LosStepFunction,
    association: AssociationRule,
}

impl Deployment {
    pub fn new(cfg: &ScenarioConfig, association: AssociationRule) -> Result<Self> {
        cfg.validate()?;
        let ch = cfg.channel();
        let fp = cfg.footprint()?;
        let region = if fp.is_omnidirectional() {
            Region::Disk(truncation_radius(cfg, &ch))
        } else {
            Region::Ellipse(fp)
        };
        let los = los_step_function(&cfg.env, cfg.h_u, cfg.h_b, region.outer_radius());
        Ok(Deployment {
            ch,
            region,
            lambda: cfg.lambda,
            delta_h: cfg.delta_h(),
            los,
            association,
        })
    }

    pub fn los_probability(&self, r: f64) -> f64 {
        self.los.value(r)
    }

    /// Mean received power `P G ζ_v(r)`.
    pub fn mean_power(&self, v: LinkState, r: f64) -> f64 {
        let d2 = r * r + self.delta_h * self.delta_h;
        self.ch.tx_gain() * self.ch.reference_gain(v) * d2.powf(-0.5 * self.ch.alpha(v))
    }

    fn draw_station<R: Rng + ?Sized>(&self, rng: &mut R) -> BaseStation {
        let (r, azimuth) = self.region.sample(rng);
        let los = rng.random::<f64>() < self.los.value(r);
        let m = if los { self.ch.m_los } else { self.ch.m_nlos };
        BaseStation {
            r,
            azimuth,
            los,
            fading: sample_fading(m, rng),
        }
    }

    /// SINR of one realization; the stations are passed to `keep` as drawn.
    fn run<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        mut keep: impl FnMut(BaseStation),
    ) -> (f64, Option<usize>) {
        let n = poisson(self.lambda * self.region.area(), rng);
        let mut total = 0.0;
        let mut best = (f64::NEG_INFINITY, 0.0, None);
        for i in 0..n {
            let bs = self.draw_station(rng);
            let mean = self.mean_power(bs.state(), bs.r);
            let rx = mean * bs.fading;
            total += rx;
            let score = match self.association {
                AssociationRule::StrongestMeanPower => mean,
                AssociationRule::MaxInstantaneousSinr => rx,
            };
            if score > best.0 {
                best = (score, rx, Some(i));
            }
            keep(bs);
        }
        match best.2 {
            None => (0.0, None),
            Some(i) => {
                let s = best.1;
                let interference = (total - s).max(0.0);
                (s / (interference + self.ch.n0), Some(i))
            }
        }
    }

    pub fn realize<R: Rng + ?Sized>(&self, rng: &mut R) -> NetworkRealization {
        let mut bs_list = Vec::new();
        let (sinr, serving_index) = self.run(rng, |bs| bs_list.push(bs));
        NetworkRealization {
            bs_list,
            serving_index,
            sinr,
        }
    }

    pub fn sinr<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.run(rng, |_| {}).0
    }
}

/// Generator of realization `index` in a run seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One realization with all of its base stations.
pub fn realize_and_measure<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> Result<NetworkRealization> {
    Ok(Deployment::new(cfg, AssociationRule::default())?.realize(rng))
}

/// Runs `f` on a pool sized by `AERIAL_LINK_THREADS` when it is set.
pub fn with_thread_limit<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    let limit = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0);
    match limit {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(f),
            Err(e) => {
                log::warn!("could not build a {n}-thread pool: {e}");
                f()
            }
        },
        None => f(),
    }
}

fn map_realizations<T: Send>(
    n: usize,
    seed: u64,
    f: impl Fn(&mut ChaCha8Rng) -> T + Sync + Send,
) -> Vec<T> {
    with_thread_limit(|| {
        (0..n as u64)
            .into_par_iter()
            .map(|i| f(&mut substream(seed, i)))
            .collect()
    })
}

/// SINR of `settings.realizations` independent realizations.
pub fn simulate(cfg: &ScenarioConfig, settings: &SimulationSettings) -> Result<SinrEnsemble> {
    let dep = Deployment::new(cfg, settings.association)?;
    Ok(SinrEnsemble {
        sinr: map_realizations(settings.realizations, settings.seed, |rng| dep.sinr(rng)),
        seed: settings.seed,
    })
}

pub fn estimate_coverage(cfg: &ScenarioConfig, n: usize, seed: u64) -> Result<McEstimate> {
    Ok(estimate_ccdf(cfg, &[cfg.sinr_threshold()], n, seed)?[0])
}

pub fn estimate_ccdf(
    cfg: &ScenarioConfig,
    thresholds: &[f64],
    n: usize,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    let settings = SimulationSettings {
        realizations: n,
        seed,
        ..SimulationSettings::default()
    };
    Ok(simulate(cfg, &settings)?.ccdf(thresholds))
}

pub fn estimate_throughput(cfg: &ScenarioConfig, n: usize, seed: u64) -> Result<McEstimate> {
    let settings = SimulationSettings {
        realizations: n,
        seed,
        ..SimulationSettings::default()
    };
    Ok(simulate(cfg, &settings)?.throughput())
}

/// Realizations conditioned on a serving base station of state `v` at
/// ground distance `r_s`: interferers of state `ξ` are kept only beyond the
/// exclusion radius `r_ξ^v`.
#[derive(Debug, Clone)]
pub struct ConditionalDeployment {
    dep: Deployment,
    v: LinkState,
    r_s: f64,
    exclusion: [f64; 2],
    los_only: bool,
}

impl ConditionalDeployment {
    /// With `los_only`, NLoS interferers and noise are removed.
    pub fn new(cfg: &ScenarioConfig, v: LinkState, r_s: f64, los_only: bool) -> Result<Self> {
        let dep = Deployment::new(cfg, AssociationRule::StrongestMeanPower)?;
        let fp = cfg.footprint()?;
        let hi = dep.region.outer_radius();
        if !(r_s >= fp.inner_radius && r_s <= hi) {
            return Err(Error::OutOfFootprint {
                r: r_s,
                lo: fp.inner_radius,
                hi,
            });
        }
        let radii = crate::geometry::boundary_radii(r_s, v, &dep.ch, &fp);
        Ok(ConditionalDeployment {
            dep,
            v,
            r_s,
            exclusion: [radii.los, radii.nlos],
            los_only,
        })
    }

    /// Aggregate interference of one realization, W.
    pub fn interference<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let n = poisson(self.dep.lambda * self.dep.region.area(), rng);
        let mut total = 0.0;
        for _ in 0..n {
            let bs = self.dep.draw_station(rng);
            let limit = if bs.los {
                self.exclusion[0]
            } else {
                self.exclusion[1]
            };
            if bs.r <= limit || (self.los_only && !bs.los) {
                continue;
            }
            total += self.dep.mean_power(bs.state(), bs.r) * bs.fading;
        }
        total
    }

    pub fn sinr<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let m = self.dep.ch.nakagami_m(self.v);
        let s = self.dep.mean_power(self.v, self.r_s) * sample_fading(m, rng);
        let i = self.interference(rng);
        let n0 = if self.los_only { 0.0 } else { self.dep.ch.n0 };
        s / (i + n0)
    }
}

/// Conditional coverage at each threshold from `n` realizations.
pub fn conditional_ccdf(
    cfg: &ScenarioConfig,
    v: LinkState,
    r_s: f64,
    thresholds: &[f64],
    n: usize,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    let cd = ConditionalDeployment::new(cfg, v, r_s, false)?;
    let ens = SinrEnsemble {
        sinr: map_realizations(n, seed, |rng| cd.sinr(rng)),
        seed,
    };
    Ok(ens.ccdf(thresholds))
}

/// Empirical mean and variance of the LoS interference beyond `r_s`.
pub fn conditional_interference_moments(
    cfg: &ScenarioConfig,
    r_s: f64,
    n: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let cd = ConditionalDeployment::new(cfg, LinkState::Los, r_s, true)?;
    let samples = map_realizations(n, seed, |rng| cd.interference(rng));
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0);
    Ok((mean, var))
}
