//! Grid evaluation of scenario metrics over one or two document keys.

use std::str::FromStr;

use rayon::prelude::*;
use serde_json::Value;

use aerial_link::analysis::{area_spectral_efficiency_with, coverage_curve_with, throughput_with};
use aerial_link::scenario::{apply_override, scenario_from_document};
use aerial_link::simulator::with_thread_limit;
use aerial_link::{CoverageMethod, ScenarioConfig, SimulationSettings};

use crate::error::{CliError, Result};
use crate::table::SweepTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Coverage,
    Throughput,
    Ase,
}

impl Metric {
    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            Metric::Coverage => &["coverage", "coverage_err"],
            Metric::Throughput => &["throughput [b/s/Hz]", "throughput_err"],
            Metric::Ase => &["ase [b/s/Hz/km2]"],
        }
    }
}

impl FromStr for Metric {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "coverage" => Ok(Metric::Coverage),
            "throughput" => Ok(Metric::Throughput),
            "ase" => Ok(Metric::Ase),
            other => Err(CliError::Usage(format!(
                "unknown metric `{other}` (expected coverage, throughput or ase)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    /// Dotted scenario key.
    pub key: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axes: Vec<Axis>,
    pub metrics: Vec<Metric>,
    pub method: CoverageMethod,
    /// Required for Monte Carlo.
    pub mc: Option<SimulationSettings>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.axes.len() > 2 {
            return Err(CliError::Usage("at most two sweep axes".into()));
        }
        for axis in &self.axes {
            if axis.values.is_empty() {
                return Err(CliError::Usage(format!(
                    "axis `{}` has no values",
                    axis.key
                )));
            }
            if axis.values.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(CliError::Usage(format!(
                    "axis `{}` must be strictly increasing",
                    axis.key
                )));
            }
        }
        if self.metrics.is_empty() {
            return Err(CliError::Usage("no metric requested".into()));
        }
        if self.method == CoverageMethod::MonteCarlo && self.mc.is_none() {
            return Err(CliError::Usage("monte-carlo needs --mc-n".into()));
        }
        Ok(())
    }

    fn settings(&self) -> SimulationSettings {
        self.mc.unwrap_or_default()
    }

    /// Axis points in row order: the first axis varies slowest.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let mut points = vec![Vec::new()];
        for axis in &self.axes {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.values.iter().map(move |&v| {
                        let mut q = p.clone();
                        q.push(v);
                        q
                    })
                })
                .collect();
        }
        points
    }
}

/// Column label with units for the keys that have them.
pub fn axis_label(key: &str) -> String {
    let unit = match key {
        "h_u" | "h_b" => "m",
        "lambda_per_km2" => "1/km2",
        "antenna.tilt_deg" | "antenna.beamwidth_deg" => "deg",
        "bandwidth_hz" => "Hz",
        "target_rate_bps" => "bit/s",
        "sinr_threshold_db" => "dB",
        "p_tx_dbm" => "dBm",
        _ => return key.to_string(),
    };
    format!("{key} [{unit}]")
}

/// Applies `key = value` pairs to a copy of `doc` and resolves it.
pub fn scenario_at(
    doc: &Value,
    keys: &[&str],
    values: &[f64],
) -> aerial_link::Result<ScenarioConfig> {
    let mut d = doc.clone();
    for (k, v) in keys.iter().zip(values) {
        apply_override(&mut d, k, &format!("{v:?}"))?;
    }
    scenario_from_document(&d)
}

pub fn evaluate(
    cfg: &ScenarioConfig,
    metrics: &[Metric],
    method: CoverageMethod,
    settings: &SimulationSettings,
) -> aerial_link::Result<Vec<f64>> {
    let mut out = Vec::new();
    for m in metrics {
        match m {
            Metric::Coverage => {
                let c = coverage_curve_with(cfg, &[cfg.sinr_threshold()], method, settings)?[0];
                out.extend([c.p_cov, c.error_estimate]);
            }
            Metric::Throughput => {
                let r = throughput_with(cfg, method, settings)?;
                out.extend([r.value, r.error_estimate]);
            }
            Metric::Ase => out.push(area_spectral_efficiency_with(cfg, method, settings)?),
        }
    }
    Ok(out)
}

/// Header metadata shared by every table the CLI writes.
pub fn describe(
    table: &mut SweepTable,
    command: &str,
    cfg: &ScenarioConfig,
    method: CoverageMethod,
    mc: Option<&SimulationSettings>,
) {
    table.meta(
        "generator",
        format!("aerial-link {}", env!("CARGO_PKG_VERSION")),
    );
    table.meta("command", command);
    table.meta("method", method.name());
    if let Some(s) = mc {
        table.meta("mc_n", s.realizations);
        table.meta("seed", s.seed);
    }
    table.meta(
        "scenario",
        serde_json::to_string(&cfg.to_file()).expect("scenario serializes"),
    );
}

/// Evaluates every grid point. A point that fails gets `NaN` values and
/// the error text; the sweep itself carries on.
pub fn run_sweep(spec: &SweepSpec, doc: &Value) -> Result<SweepTable> {
    spec.validate()?;
    let keys: Vec<&str> = spec.axes.iter().map(|a| a.key.as_str()).collect();
    let points = spec.points();
    // The document may only become valid once an axis key is set.
    let base = match scenario_from_document(doc) {
        Ok(cfg) => cfg,
        Err(e) => points
            .iter()
            .find_map(|p| scenario_at(doc, &keys, p).ok())
            .ok_or(e)?,
    };
    let mut columns: Vec<String> = spec.axes.iter().map(|a| axis_label(&a.key)).collect();
    let width: usize = spec.metrics.iter().map(|m| m.columns().len()).sum();
    columns.extend(
        spec.metrics
            .iter()
            .flat_map(|m| m.columns().iter().map(|c| c.to_string())),
    );
    let mut table = SweepTable::new(columns, "error");
    describe(&mut table, "sweep", &base, spec.method, spec.mc.as_ref());
    for axis in &spec.axes {
        let values: Vec<String> = axis.values.iter().map(|v| format!("{v:?}")).collect();
        table.meta("axis", format!("{}={}", axis.key, values.join(",")));
    }

    let settings = spec.settings();
    let row = |p: &Vec<f64>| -> (Vec<f64>, String) {
        let result = scenario_at(doc, &keys, p)
            .and_then(|cfg| evaluate(&cfg, &spec.metrics, spec.method, &settings));
        let mut values = p.clone();
        match result {
            Ok(v) => {
                values.extend(v);
                (values, String::new())
            }
            Err(e) => {
                log::warn!("grid point {p:?}: {e}");
                values.extend(std::iter::repeat_n(f64::NAN, width));
                (values, e.to_string())
            }
        }
    };
    // The simulator parallelizes internally; analytic rows go to the pool.
    let rows: Vec<(Vec<f64>, String)> = if spec.method == CoverageMethod::MonteCarlo {
        points.iter().map(row).collect()
    } else {
        with_thread_limit(|| points.par_iter().map(row).collect())
    };
    for (values, note) in rows {
        table.push(values, note);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use aerial_link::coverage;

    fn doc() -> Value {
        serde_json::json!({})
    }

    #[test]
    fn rows_are_lexicographic() {
        let spec = SweepSpec {
            axes: vec![
                Axis {
                    key: "h_u".into(),
                    values: vec![1.5, 100.0],
                },
                Axis {
                    key: "bandwidth_hz".into(),
                    values: vec![2e5, 4e5],
                },
            ],
            metrics: vec![Metric::Coverage],
            method: CoverageMethod::Exact,
            mc: None,
        };
        let t = run_sweep(&spec, &doc()).unwrap();
        let axes: Vec<(f64, f64)> = t.rows.iter().map(|r| (r.values[0], r.values[1])).collect();
        assert_eq!(
            axes,
            vec![(1.5, 2e5), (1.5, 4e5), (100.0, 2e5), (100.0, 4e5)]
        );
        assert_eq!(
            t.columns,
            vec!["h_u [m]", "bandwidth_hz [Hz]", "coverage", "coverage_err"]
        );
    }

    #[test]
    fn single_point_matches_direct_call() {
        let spec = SweepSpec {
            axes: vec![Axis {
                key: "h_u".into(),
                values: vec![50.0],
            }],
            metrics: vec![Metric::Coverage],
            method: CoverageMethod::Exact,
            mc: None,
        };
        let t = run_sweep(&spec, &doc()).unwrap();
        let mut cfg = ScenarioConfig::urban_default();
        cfg.h_u = 50.0;
        assert_eq!(
            t.rows[0].values[1],
            coverage(&cfg, CoverageMethod::Exact).unwrap().p_cov
        );
    }

    #[test]
    fn invalid_point_keeps_the_sweep_going() {
        let doc = serde_json::json!({"antenna": {"mode": "directional", "beamwidth_deg": 60, "tilt_deg": 0}});
        let spec = SweepSpec {
            axes: vec![Axis {
                key: "antenna.tilt_deg".into(),
                values: vec![10.0, 70.0],
            }],
            metrics: vec![Metric::Coverage],
            method: CoverageMethod::Exact,
            mc: None,
        };
        let t = run_sweep(&spec, &doc).unwrap();
        assert!(t.rows[0].note.is_empty() && t.rows[0].values[1] > 0.0);
        assert!(t.rows[1].values[1].is_nan());
        assert!(t.rows[1].note.contains("geometry"));
    }

    #[test]
    fn base_may_need_an_axis_to_be_valid() {
        // directional with the default 180 degree beamwidth is invalid
        let doc = serde_json::json!({"antenna": {"mode": "directional"}});
        let spec = SweepSpec {
            axes: vec![Axis {
                key: "antenna.beamwidth_deg".into(),
                values: vec![30.0, 60.0],
            }],
            metrics: vec![Metric::Coverage],
            method: CoverageMethod::Exact,
            mc: None,
        };
        let t = run_sweep(&spec, &doc).unwrap();
        assert!(t.rows.iter().all(|r| r.note.is_empty()));
        let bad = serde_json::json!({"lambda_per_km2": -1});
        assert!(run_sweep(&spec, &bad).is_err());
    }

    #[test]
    fn monte_carlo_needs_sample_count() {
        let spec = SweepSpec {
            axes: vec![],
            metrics: vec![Metric::Coverage],
            method: CoverageMethod::MonteCarlo,
            mc: None,
        };
        assert!(matches!(spec.validate(), Err(CliError::Usage(_))));
    }
}
