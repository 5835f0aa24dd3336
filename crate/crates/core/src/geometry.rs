//! Ground footprint of the UAV antenna and the exclusion radii of the
//! association rule.
//!
//! Distances are ground distances measured from the UE's projection `O`.
//! The footprint of a tilted cone is an ellipse with center `(r_e, 0)`,
//! semi-major axis `r_M` along the tilt direction and semi-minor axis `r_m`.
//! Everything in this module is expressed in the half plane `φ ∈ [0, π]`;
//! the footprint is symmetric about the tilt axis.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, LinkState};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AntennaMode {
    Directional,
    Omnidirectional,
}

/// UAV receive antenna. Angles are in degrees here and nowhere else.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AntennaConfig {
    pub beamwidth_deg: f64,
    pub tilt_deg: f64,
    pub mode: AntennaMode,
}

impl Default for AntennaConfig {
    fn default() -> Self {
        AntennaConfig::omnidirectional()
    }
}

impl AntennaConfig {
    pub fn omnidirectional() -> Self {
        AntennaConfig {
            beamwidth_deg: 180.0,
            tilt_deg: 0.0,
            mode: AntennaMode::Omnidirectional,
        }
    }

    pub fn directional(beamwidth_deg: f64, tilt_deg: f64) -> Result<Self> {
        let antenna = AntennaConfig {
            beamwidth_deg,
            tilt_deg,
            mode: AntennaMode::Directional,
        };
        antenna.validate()?;
        Ok(antenna)
    }

    pub fn is_directional(&self) -> bool {
        self.mode == AntennaMode::Directional
    }

    pub fn validate(&self) -> Result<()> {
        if !self.is_directional() {
            return Ok(());
        }
        let bw = self.beamwidth_deg;
        let tilt = self.tilt_deg;
        if !(bw > 0.0 && bw < 180.0) {
            return Err(Error::InvalidGeometry(format!(
                "beamwidth {bw}° must lie in (0, 180)"
            )));
        }
        if !(tilt >= 0.0) {
            return Err(Error::InvalidGeometry(format!(
                "tilt {tilt}° must be non-negative"
            )));
        }
        if tilt + bw / 2.0 >= 90.0 {
            return Err(Error::InvalidGeometry(format!(
                "tilt {tilt}° + half beamwidth {}° reaches the horizon",
                bw / 2.0
            )));
        }
        Ok(())
    }

    /// Main-lobe gain `29000 / φ_B²` (φ_B in degrees); 1 for the omni antenna.
    pub fn gain(&self) -> f64 {
        match self.mode {
            AntennaMode::Directional => 29000.0 / (self.beamwidth_deg * self.beamwidth_deg),
            AntennaMode::Omnidirectional => 1.0,
        }
    }
}

/// Elliptical ground region seen by the UAV antenna.
///
/// The omnidirectional footprint is the sentinel `r_e = r_0 = 0`,
/// `r_M = r_m = ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaFootprint {
    pub semi_major: f64,
    pub semi_minor: f64,
    pub center_offset: f64,
    pub inner_radius: f64,
    pub delta_h: f64,
}

/// Angular extent `(φ₁, φ₂)` at one ground radius. The part of the circle of
/// that radius inside the footprint is `[0, φ₁] ∪ [φ₂, π]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularExtent {
    pub phi1: f64,
    pub phi2: f64,
}

impl AngularExtent {
    pub const FULL: AngularExtent = AngularExtent {
        phi1: FRAC_PI_2,
        phi2: FRAC_PI_2,
    };

    /// Half-plane angular measure `π + φ₁ − φ₂` of the circle inside the footprint.
    pub fn weight(&self) -> f64 {
        (PI + self.phi1 - self.phi2).clamp(0.0, PI)
    }
}

/// Exclusion radii `(r_L, r_N)` for a serving BS at a given distance: a LoS
/// (resp. NLoS) BS closer than `r_L` (resp. `r_N`) would be the stronger one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExclusionRadii {
    pub los: f64,
    pub nlos: f64,
}

impl ExclusionRadii {
    pub fn get(&self, state: LinkState) -> f64 {
        match state {
            LinkState::Los => self.los,
            LinkState::Nlos => self.nlos,
        }
    }
}

/// Footprint ellipse of the cone `(φ_B, φ_t)` seen from `delta_h` above BS height.
pub fn compute_footprint(delta_h: f64, antenna: &AntennaConfig) -> Result<AntennaFootprint> {
    if !antenna.is_directional() {
        return Ok(AntennaFootprint::omnidirectional(delta_h));
    }
    antenna.validate()?;
    if !(delta_h > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "a tilted antenna needs the UE above BS height (Δh = {delta_h} m)"
        )));
    }
    let half_bw = antenna.beamwidth_deg.to_radians() / 2.0;
    let tilt = antenna.tilt_deg.to_radians();
    let denom = tilt.cos().powi(2) - half_bw.sin().powi(2);
    if !(denom > 0.0) {
        return Err(Error::InvalidGeometry(
            "cone does not intersect the ground in an ellipse".into(),
        ));
    }
    // The ground trace of the cone runs from Δh·tan(φ_t − φ_B/2) to
    // Δh·tan(φ_t + φ_B/2) along the tilt axis.
    let semi_major = delta_h * (2.0 * half_bw).sin() / (2.0 * denom);
    let semi_minor = delta_h * half_bw.sin() / denom.sqrt();
    let mut center_offset = delta_h * (tilt - half_bw).tan() + semi_major;
    if center_offset.abs() < 1e-12 * semi_major {
        center_offset = 0.0;
    }
    let inner_radius = (center_offset - semi_major).max(0.0);
    Ok(AntennaFootprint {
        semi_major,
        semi_minor,
        center_offset,
        inner_radius,
        delta_h,
    })
}

impl AntennaFootprint {
    pub fn omnidirectional(delta_h: f64) -> Self {
        AntennaFootprint {
            semi_major: f64::INFINITY,
            semi_minor: f64::INFINITY,
            center_offset: 0.0,
            inner_radius: 0.0,
            delta_h,
        }
    }

    pub fn is_omnidirectional(&self) -> bool {
        self.semi_major.is_infinite()
    }

    /// Farthest ground distance `r_e + r_M` inside the footprint.
    pub fn outer_radius(&self) -> f64 {
        self.center_offset + self.semi_major
    }

    pub fn area(&self) -> f64 {
        PI * self.semi_major * self.semi_minor
    }

    /// Whether the UE's ground projection lies strictly inside the ellipse.
    pub fn contains_origin(&self) -> bool {
        self.center_offset < self.semi_major
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        if self.is_omnidirectional() {
            return true;
        }
        let u = (x - self.center_offset) / self.semi_major;
        let v = y / self.semi_minor;
        u * u + v * v <= 1.0
    }

    /// Ground radius at which a circle about the origin first touches the
    /// ellipse boundary from inside. Below it the whole circle is inside.
    pub fn inscribed_radius(&self) -> f64 {
        if self.is_omnidirectional() {
            return f64::INFINITY;
        }
        if !self.contains_origin() {
            return 0.0;
        }
        let (a, b, e) = (self.semi_major, self.semi_minor, self.center_offset);
        let ecc2 = a * a - b * b;
        // Nearest boundary point has cos t = −e·a/(a² − b²) when that is ≥ −1.
        if ecc2 > 0.0 && e * a <= ecc2 {
            let r2 = b * b * (ecc2 - e * e) / ecc2;
            r2.max(0.0).sqrt()
        } else {
            a - e
        }
    }

    /// Radii inside `(r_0, r_e + r_M)` where the angular extent changes form.
    pub fn angular_breakpoints(&self) -> Vec<f64> {
        if self.is_omnidirectional() {
            return Vec::new();
        }
        let lo = self.inner_radius;
        let hi = self.outer_radius();
        let mut out = Vec::new();
        for r in [
            self.inscribed_radius(),
            self.semi_major - self.center_offset,
        ] {
            if r > lo && r < hi {
                out.push(r);
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Angular extent of the footprint on the circle of ground radius `r`.
    ///
    /// The boundary crossings solve the ellipse equation for `c = cos φ`:
    /// `r²(r_m² − r_M²)c² − 2 r r_e r_m² c + r_e² r_m² + r² r_M² − r_M² r_m² = 0`.
    /// The left side is negative exactly inside the ellipse.
    pub fn angular_extent(&self, r: f64) -> Result<AngularExtent> {
        if self.is_omnidirectional() {
            return Ok(AngularExtent::FULL);
        }
        let lo = self.inner_radius;
        let hi = self.outer_radius();
        let slack = 1e-9 * hi.max(1.0);
        if !(r >= lo - slack && r <= hi + slack) {
            return Err(Error::OutOfFootprint { r, lo, hi });
        }
        Ok(self.angular_extent_unchecked(r))
    }

    /// Angular extent without the domain check; zero weight outside the footprint.
    pub fn angular_extent_unchecked(&self, r: f64) -> AngularExtent {
        if self.is_omnidirectional() {
            return AngularExtent::FULL;
        }
        let (a, b, e) = (self.semi_major, self.semi_minor, self.center_offset);
        if r <= 0.0 {
            return if self.contains_origin() {
                AngularExtent::FULL
            } else {
                AngularExtent {
                    phi1: 0.0,
                    phi2: PI,
                }
            };
        }
        let (a2, b2) = (a * a, b * b);
        let quad = r * r * (b2 - a2);
        let lin = -2.0 * r * e * b2;
        let cons = e * e * b2 + r * r * a2 - a2 * b2;

        let (c_lo, c_hi) = if quad.abs() <= 1e-14 * a2 * r * r {
            // Circular footprint: the quadratic degenerates to a line in c.
            if lin == 0.0 {
                return if cons < 0.0 {
                    AngularExtent::FULL
                } else {
                    AngularExtent {
                        phi1: 0.0,
                        phi2: PI,
                    }
                };
            }
            let root = -cons / lin;
            if lin < 0.0 {
                (f64::NEG_INFINITY, root)
            } else {
                (root, f64::INFINITY)
            }
        } else {
            // Discriminant in cancellation-free form.
            let disc = 4.0 * r * r * a2 * ((a2 - b2) * (r * r - b2) + b2 * e * e);
            if disc <= 0.0 {
                // The concave quadratic never reaches zero: whole circle inside.
                return AngularExtent::FULL;
            }
            let sq = disc.sqrt();
            let q = -0.5 * (lin - sq);
            let (r1, r2) = if q != 0.0 {
                (q / quad, cons / q)
            } else {
                let half = 0.5 * sq / quad.abs();
                (-half, half)
            };
            (r1.min(r2), r1.max(r2))
        };
        AngularExtent {
            phi1: c_hi.clamp(-1.0, 1.0).acos(),
            phi2: c_lo.clamp(-1.0, 1.0).acos(),
        }
    }

    /// Half-plane weight `π + φ₁(r) − φ₂(r)`; zero outside the footprint.
    pub fn weight(&self, r: f64) -> f64 {
        if !self.is_omnidirectional() && (r < self.inner_radius || r > self.outer_radius()) {
            return 0.0;
        }
        self.angular_extent_unchecked(r).weight()
    }
}

/// Exclusion radii for a serving BS at ground distance `r_s` in state `serving`.
///
/// Clamps follow the footprint: the NLoS radius of a LoS link is floored at
/// `r_0` and the LoS radius of an NLoS link is capped at `r_e + r_M`.
pub fn boundary_radii(
    r_s: f64,
    serving: LinkState,
    channel: &ChannelParams,
    fp: &AntennaFootprint,
) -> ExclusionRadii {
    let dh2 = fp.delta_h * fp.delta_h;
    let d2 = r_s * r_s + dh2;
    let r0_sq = fp.inner_radius * fp.inner_radius;
    match serving {
        LinkState::Los => {
            // A_N d^{−α_N} > A_L d_S^{−α_L}  ⇔  d² < (A_N/A_L)^{2/α_N} d_S^{2α_L/α_N}
            let ratio = (channel.a_nlos / channel.a_los).powf(2.0 / channel.alpha_nlos);
            let reach = ratio * d2.powf(channel.alpha_los / channel.alpha_nlos) - dh2;
            ExclusionRadii {
                los: r_s,
                nlos: reach.max(r0_sq).sqrt(),
            }
        }
        LinkState::Nlos => {
            let ratio = (channel.a_los / channel.a_nlos).powf(2.0 / channel.alpha_los);
            let reach = ratio * d2.powf(channel.alpha_nlos / channel.alpha_los) - dh2;
            ExclusionRadii {
                los: reach.max(r0_sq).sqrt().min(fp.outer_radius()),
                nlos: r_s,
            }
        }
    }
}
