//! Scenario configuration: the JSON file form (dB, per-km² units) and the
//! resolved linear form consumed by the analysis and the simulator.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::channel::{ChannelParams, Environment};
use crate::error::{Error, Result};
use crate::geometry::{compute_footprint, AntennaConfig, AntennaFootprint};
use crate::units::{db_to_linear, dbm_to_watts, linear_to_db, thermal_noise_watts};

/// Height of a ground UE, m.
pub const GROUND_UE_HEIGHT: f64 = 1.5;

/// Either a target rate or an explicit SINR threshold; the other follows
/// from `T = 2^{R_t/BW} − 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SinrTarget {
    RateBps(f64),
    Threshold(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EnvironmentSpec {
    Preset(String),
    Custom(Environment),
}

/// On-disk scenario. Every field is optional and defaults to the urban
/// reference scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioFile {
    pub environment: EnvironmentSpec,
    pub lambda_per_km2: f64,
    pub h_b: f64,
    pub h_u: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    pub a_los_db: f64,
    pub a_nlos_db: f64,
    pub m_los: u32,
    pub m_nlos: u32,
    pub p_tx_dbm: f64,
    pub g_main: f64,
    pub g_side: f64,
    pub noise_density_dbm_per_hz: f64,
    pub noise_figure_db: f64,
    pub antenna: AntennaConfig,
    pub bandwidth_hz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_rate_bps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sinr_threshold_db: Option<f64>,
    pub rho: f64,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        ScenarioFile {
            environment: EnvironmentSpec::Preset("urban".into()),
            lambda_per_km2: 10.0,
            h_b: 25.0,
            h_u: 100.0,
            alpha_los: 2.09,
            alpha_nlos: 3.75,
            a_los_db: -41.1,
            a_nlos_db: -32.9,
            m_los: 3,
            m_nlos: 1,
            p_tx_dbm: 46.0,
            g_main: 10.0,
            g_side: 0.5,
            noise_density_dbm_per_hz: -174.0,
            noise_figure_db: 0.0,
            antenna: AntennaConfig::omnidirectional(),
            bandwidth_hz: 200e3,
            target_rate_bps: None,
            sinr_threshold_db: None,
            rho: 0.5,
        }
    }
}

/// Resolved scenario in linear SI units (λ per m²).
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    pub a_los: f64,
    pub a_nlos: f64,
    pub m_los: u32,
    pub m_nlos: u32,
    pub p_tx: f64,
    pub g_main: f64,
    pub g_side: f64,
    pub noise_density_dbm_per_hz: f64,
    pub noise_figure_db: f64,
    pub env: Environment,
    pub lambda: f64,
    pub h_b: f64,
    pub h_u: f64,
    pub antenna: AntennaConfig,
    pub bandwidth_hz: f64,
    pub target: SinrTarget,
    pub rho: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig::urban_default()
    }
}

impl ScenarioConfig {
    pub fn urban_default() -> Self {
        ScenarioFile::default()
            .resolve()
            .expect("built-in scenario is valid")
    }

    pub fn lambda_per_km2(&self) -> f64 {
        self.lambda * 1e6
    }

    pub fn set_lambda_per_km2(&mut self, per_km2: f64) {
        self.lambda = per_km2 * 1e-6;
    }

    pub fn delta_h(&self) -> f64 {
        self.h_u - self.h_b
    }

    /// SINR threshold `T` in linear units.
    pub fn sinr_threshold(&self) -> f64 {
        match self.target {
            SinrTarget::Threshold(t) => t,
            SinrTarget::RateBps(r) => (r / self.bandwidth_hz).exp2() - 1.0,
        }
    }

    pub fn set_threshold(&mut self, t: f64) {
        self.target = SinrTarget::Threshold(t);
    }

    pub fn noise_power(&self) -> f64 {
        thermal_noise_watts(
            self.noise_density_dbm_per_hz,
            self.bandwidth_hz,
            self.noise_figure_db,
        )
    }

    /// Effective link budget at the configured altitude: side-lobe BS gain
    /// above BS height, main lobe otherwise.
    pub fn channel(&self) -> ChannelParams {
        ChannelParams {
            alpha_los: self.alpha_los,
            alpha_nlos: self.alpha_nlos,
            a_los: self.a_los,
            a_nlos: self.a_nlos,
            m_los: self.m_los,
            m_nlos: self.m_nlos,
            p_tx: self.p_tx,
            g_b: if self.h_u > self.h_b {
                self.g_side
            } else {
                self.g_main
            },
            g_u: self.effective_antenna().gain(),
            n0: self.noise_power(),
        }
    }

    /// The configured antenna above BS height; an omnidirectional one at or
    /// below it, where a tilted beam cannot see the network.
    pub fn effective_antenna(&self) -> AntennaConfig {
        if self.h_u > self.h_b {
            self.antenna
        } else {
            AntennaConfig::omnidirectional()
        }
    }

    pub fn footprint(&self) -> Result<AntennaFootprint> {
        compute_footprint(self.delta_h(), &self.effective_antenna())
    }

    /// Same network seen by an omnidirectional ground UE.
    pub fn ground_counterpart(&self) -> ScenarioConfig {
        ScenarioConfig {
            h_u: GROUND_UE_HEIGHT,
            antenna: AntennaConfig::omnidirectional(),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda_per_km2", self.lambda_per_km2()),
            ("h_b", self.h_b),
            ("h_u", self.h_u),
            ("alpha_los", self.alpha_los),
            ("alpha_nlos", self.alpha_nlos),
            ("a_los", self.a_los),
            ("a_nlos", self.a_nlos),
            ("p_tx", self.p_tx),
            ("g_main", self.g_main),
            ("g_side", self.g_side),
            ("bandwidth_hz", self.bandwidth_hz),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if self.m_los == 0 || self.m_nlos == 0 {
            return Err(Error::Validation(
                "Nakagami parameters must be integers ≥ 1".into(),
            ));
        }
        if self.m_los < self.m_nlos {
            log::warn!(
                "m_los = {} is below m_nlos = {}; LoS links usually fade less",
                self.m_los,
                self.m_nlos
            );
        }
        let env = &self.env;
        if !(env.a > 0.0 && env.a < 1.0) {
            return Err(Error::Validation(format!(
                "building fraction a = {} must lie in (0, 1)",
                env.a
            )));
        }
        if !(env.b > 0.0 && env.c > 0.0) {
            return Err(Error::Validation(
                "building density b and height scale c must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::Validation(format!(
                "rho = {} must lie in [0, 1]",
                self.rho
            )));
        }
        match self.target {
            SinrTarget::RateBps(r) if !(r > 0.0 && r.is_finite()) => {
                return Err(Error::Validation(format!(
                    "target rate {r} must be positive"
                )));
            }
            SinrTarget::Threshold(t) if !(t >= 0.0 && t.is_finite()) => {
                return Err(Error::Validation(format!(
                    "SINR threshold {t} must be non-negative"
                )));
            }
            _ => {}
        }
        if !self.noise_density_dbm_per_hz.is_finite() || !self.noise_figure_db.is_finite() {
            return Err(Error::Validation("noise parameters must be finite".into()));
        }
        self.antenna.validate()?;
        if !self.effective_antenna().is_directional() && self.alpha_los <= 2.0 {
            return Err(Error::Validation(format!(
                "alpha_los = {} ≤ 2 makes the interference of an unbounded network diverge",
                self.alpha_los
            )));
        }
        if self.effective_antenna().is_directional() {
            self.footprint()?;
        }
        Ok(())
    }

    pub fn to_file(&self) -> ScenarioFile {
        let environment = match Environment::preset(&self.env.label) {
            Some(p) if p == self.env => EnvironmentSpec::Preset(self.env.label.clone()),
            _ => EnvironmentSpec::Custom(self.env.clone()),
        };
        let (target_rate_bps, sinr_threshold_db) = match self.target {
            SinrTarget::RateBps(r) => (Some(r), None),
            SinrTarget::Threshold(t) => (None, Some(linear_to_db(t))),
        };
        ScenarioFile {
            environment,
            lambda_per_km2: self.lambda_per_km2(),
            h_b: self.h_b,
            h_u: self.h_u,
            alpha_los: self.alpha_los,
            alpha_nlos: self.alpha_nlos,
            a_los_db: linear_to_db(self.a_los),
            a_nlos_db: linear_to_db(self.a_nlos),
            m_los: self.m_los,
            m_nlos: self.m_nlos,
            p_tx_dbm: linear_to_db(self.p_tx) + 30.0,
            g_main: self.g_main,
            g_side: self.g_side,
            noise_density_dbm_per_hz: self.noise_density_dbm_per_hz,
            noise_figure_db: self.noise_figure_db,
            antenna: self.antenna,
            bandwidth_hz: self.bandwidth_hz,
            target_rate_bps,
            sinr_threshold_db,
            rho: self.rho,
        }
    }
}

impl ScenarioFile {
    pub fn resolve(&self) -> Result<ScenarioConfig> {
        let env = match &self.environment {
            EnvironmentSpec::Preset(name) => Environment::preset(name)
                .ok_or_else(|| Error::Validation(format!("unknown environment preset `{name}`")))?,
            EnvironmentSpec::Custom(env) => env.clone(),
        };
        let target = match (self.target_rate_bps, self.sinr_threshold_db) {
            (Some(_), Some(_)) => {
                return Err(Error::Validation(
                    "give either target_rate_bps or sinr_threshold_db, not both".into(),
                ))
            }
            (Some(r), None) => SinrTarget::RateBps(r),
            (None, Some(db)) => SinrTarget::Threshold(db_to_linear(db)),
            (None, None) => SinrTarget::RateBps(100e3),
        };
        let cfg = ScenarioConfig {
            alpha_los: self.alpha_los,
            alpha_nlos: self.alpha_nlos,
            a_los: db_to_linear(self.a_los_db),
            a_nlos: db_to_linear(self.a_nlos_db),
            m_los: self.m_los,
            m_nlos: self.m_nlos,
            p_tx: dbm_to_watts(self.p_tx_dbm),
            g_main: self.g_main,
            g_side: self.g_side,
            noise_density_dbm_per_hz: self.noise_density_dbm_per_hz,
            noise_figure_db: self.noise_figure_db,
            env,
            lambda: self.lambda_per_km2 * 1e-6,
            h_b: self.h_b,
            h_u: self.h_u,
            antenna: self.antenna,
            bandwidth_hz: self.bandwidth_hz,
            target,
            rho: self.rho,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse(format!("line {} column {}: {e}", e.line(), e.column()))
}

/// Parses a JSON scenario document into its raw value form.
pub fn parse_document(text: &str) -> Result<Value> {
    let doc: Value = serde_json::from_str(text).map_err(parse_error)?;
    if !doc.is_object() {
        return Err(Error::Parse("scenario must be a JSON object".into()));
    }
    Ok(doc)
}

pub fn scenario_from_document(doc: &Value) -> Result<ScenarioConfig> {
    let file: ScenarioFile =
        serde_json::from_value(doc.clone()).map_err(|e| Error::Parse(e.to_string()))?;
    file.resolve()
}

pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(parse_error)?;
    file.resolve()
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    parse_scenario(&text)
}

/// Sets a dotted-path key (`antenna.tilt_deg`) in a scenario document.
/// The value is read as JSON when possible and as a bare string otherwise.
/// Setting one of the two rate keys clears the other.
pub fn apply_override(doc: &mut Value, key: &str, raw: &str) -> Result<()> {
    let value: Value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Parse(format!("malformed key `{key}`")));
    }
    let root = doc
        .as_object_mut()
        .ok_or_else(|| Error::Parse("scenario must be a JSON object".into()))?;
    match parts[0] {
        "sinr_threshold_db" => {
            root.remove("target_rate_bps");
        }
        "target_rate_bps" => {
            root.remove("sinr_threshold_db");
        }
        "environment" if parts.len() > 1 => {
            let current = root
                .get("environment")
                .cloned()
                .unwrap_or(Value::String("urban".into()));
            if let Value::String(name) = current {
                let env = Environment::preset(&name).ok_or_else(|| {
                    Error::Validation(format!("unknown environment preset `{name}`"))
                })?;
                root.insert(
                    "environment".into(),
                    serde_json::to_value(env).map_err(|e| Error::Parse(e.to_string()))?,
                );
            }
        }
        _ => {}
    }
    let mut node = doc;
    for part in &parts[..parts.len() - 1] {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| Error::Parse(format!("`{key}` descends into a non-object")))?;
        node = obj
            .entry(part.to_string())
            .or_insert_with(|| Value::Object(Default::default()));
    }
    let obj = node
        .as_object_mut()
        .ok_or_else(|| Error::Parse(format!("`{key}` descends into a non-object")))?;
    obj.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn empty_document_is_urban_default() {
        let cfg = parse_scenario("{}").unwrap();
        assert_eq!(cfg.env, Environment::urban());
        assert_relative_eq!(cfg.lambda, 1e-5, max_relative = 1e-15);
        assert_relative_eq!(
            cfg.sinr_threshold(),
            2f64.sqrt() - 1.0,
            max_relative = 1e-12
        );
        assert_eq!(
            (linear_to_db(cfg.sinr_threshold()) * 10.0).round() / 10.0,
            -3.8
        );
        assert_relative_eq!(cfg.p_tx, 39.810717055, max_relative = 1e-9);
        let ch = cfg.channel();
        assert_eq!(ch.g_b, 0.5);
        assert_eq!(ch.g_u, 1.0);
    }

    #[test]
    fn wider_band_lowers_threshold() {
        let cfg = parse_scenario(r#"{"bandwidth_hz": 400000}"#).unwrap();
        assert_relative_eq!(
            cfg.sinr_threshold(),
            2f64.powf(0.25) - 1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn suburban_preset_by_name() {
        let cfg = parse_scenario(r#"{"environment": "suburban"}"#).unwrap();
        assert_eq!(cfg.env, Environment::suburban());
    }

    #[test]
    fn negative_density_is_rejected() {
        let err = parse_scenario(r#"{"lambda_per_km2": -1}"#).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn malformed_json_reports_line() {
        let err = parse_scenario("{\n  \"h_u\": ,\n}").unwrap_err();
        match err {
            Error::Parse(msg) => assert!(msg.contains("line 2"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            parse_scenario(r#"{"hu": 3}"#).unwrap_err(),
            Error::Parse(_)
        ));
    }

    #[test]
    fn rate_and_threshold_are_exclusive() {
        let err =
            parse_scenario(r#"{"target_rate_bps": 1e5, "sinr_threshold_db": 0}"#).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn sub_quadratic_los_exponent_rejected_for_omni_only() {
        assert!(parse_scenario(r#"{"alpha_los": 2.0}"#).is_err());
        let ok = parse_scenario(
            r#"{"alpha_los": 2.0, "antenna": {"mode": "directional", "beamwidth_deg": 60, "tilt_deg": 10}}"#,
        );
        assert!(ok.is_ok());
    }

    #[test]
    fn ground_ue_gets_main_lobe() {
        let cfg = parse_scenario(r#"{"h_u": 1.5}"#).unwrap();
        assert_eq!(cfg.channel().g_b, 10.0);
    }

    #[test]
    fn overrides_follow_dotted_paths() {
        let mut doc = parse_document(r#"{"target_rate_bps": 2e5}"#).unwrap();
        apply_override(&mut doc, "antenna.mode", "directional").unwrap();
        apply_override(&mut doc, "antenna.beamwidth_deg", "60").unwrap();
        apply_override(&mut doc, "antenna.tilt_deg", "25").unwrap();
        apply_override(&mut doc, "environment.c", "20").unwrap();
        apply_override(&mut doc, "sinr_threshold_db", "3").unwrap();
        let cfg = scenario_from_document(&doc).unwrap();
        assert!(cfg.antenna.is_directional());
        assert_eq!(cfg.antenna.tilt_deg, 25.0);
        assert_eq!(cfg.env.c, 20.0);
        assert_eq!(cfg.env.a, 0.3);
        assert_relative_eq!(
            cfg.sinr_threshold(),
            db_to_linear(3.0),
            max_relative = 1e-12
        );
    }

    #[test]
    fn file_round_trip() {
        let mut cfg = ScenarioConfig::urban_default();
        cfg.h_u = 42.0;
        cfg.antenna = AntennaConfig::directional(45.0, 20.0).unwrap();
        let text = serde_json::to_string(&cfg.to_file()).unwrap();
        let back = parse_scenario(&text).unwrap();
        assert_eq!(back.antenna, cfg.antenna);
        assert_eq!(back.h_u, 42.0);
        assert_relative_eq!(back.a_los, cfg.a_los, max_relative = 1e-14);
        assert_relative_eq!(back.p_tx, cfg.p_tx, max_relative = 1e-14);
    }

    #[test]
    fn low_ue_falls_back_to_omni() {
        let mut cfg = ScenarioConfig::urban_default();
        cfg.h_u = 10.0;
        cfg.antenna = AntennaConfig::directional(60.0, 20.0).unwrap();
        assert!(!cfg.effective_antenna().is_directional());
        assert_eq!(cfg.channel().g_u, 1.0);
        assert!(cfg.footprint().unwrap().semi_major.is_infinite());
        cfg.h_u = 30.0;
        assert!(cfg.effective_antenna().is_directional());
    }
}
