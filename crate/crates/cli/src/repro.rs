//! Canned grids for the standard coverage, throughput and ASE studies.

use std::str::FromStr;

use rayon::prelude::*;
use serde_json::Value;

use aerial_link::analysis::area_spectral_efficiency_with;
use aerial_link::scenario::{apply_override, scenario_from_document};
use aerial_link::simulator::with_thread_limit;
use aerial_link::{
    optimize_parameter, CoverageMethod, Objective, Parameter, ScenarioConfig, SimulationSettings,
};

use crate::error::{CliError, Result};
use crate::svg::PlotSpec;
use crate::sweep::{describe, run_sweep, Axis, Metric, SweepSpec};
use crate::table::SweepTable;
use crate::validate::{validate, ValidationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Table2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig8,
    Fig9,
}

impl FromStr for Target {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "table2" => Target::Table2,
            "fig3" => Target::Fig3,
            "fig4" => Target::Fig4,
            "fig5" => Target::Fig5,
            "fig6" => Target::Fig6,
            "fig8" => Target::Fig8,
            "fig9" => Target::Fig9,
            other => return Err(CliError::Usage(format!("unknown repro target `{other}`"))),
        })
    }
}

pub struct Reproduction {
    pub table: SweepTable,
    pub plot: PlotSpec,
    /// Present for the validation target.
    pub report: Option<ValidationReport>,
}

/// Simulation size used when a Monte Carlo target gets no `--mc-n`.
pub const DEFAULT_MC: SimulationSettings = SimulationSettings {
    realizations: 100_000,
    seed: 2024,
    association: aerial_link::AssociationRule::StrongestMeanPower,
};

pub const TILT_GRID: [f64; 13] = [
    0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0, 55.0, 60.0,
];
pub const LAMBDA_GRID: [f64; 6] = [1.0, 3.0, 10.0, 30.0, 100.0, 300.0];

fn with(doc: &Value, pairs: &[(&str, &str)]) -> Result<Value> {
    let mut d = doc.clone();
    for (k, v) in pairs {
        apply_override(&mut d, k, v)?;
    }
    Ok(d)
}

fn range(start: f64, step: f64, stop: f64) -> Vec<f64> {
    let n = ((stop - start) / step).round() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

pub fn reproduce(
    target: Target,
    doc: &Value,
    method: CoverageMethod,
    mc: Option<SimulationSettings>,
) -> Result<Reproduction> {
    match target {
        Target::Table2 => table2(doc, method, mc),
        Target::Fig3 => {
            let d = with(doc, &[("antenna", r#"{"mode": "omnidirectional"}"#)])?;
            let cfg = scenario_from_document(&d)?;
            let report = validate(
                &cfg,
                &[1.5, 100.0],
                &range(-10.0, 2.5, 20.0),
                &mc.unwrap_or(DEFAULT_MC),
            )?;
            let mut table = report.table.clone();
            table.metadata.retain(|(k, _)| k != "command");
            table
                .metadata
                .insert(1, ("command".into(), "repro fig3".into()));
            let plot = PlotSpec {
                x: 1,
                y: vec![2, 3, 4, 5],
                series: Some(0),
                title: "coverage vs threshold".into(),
            };
            Ok(Reproduction {
                table,
                plot,
                report: Some(report),
            })
        }
        Target::Fig4 => {
            let d = with(doc, &[("antenna", r#"{"mode": "omnidirectional"}"#)])?;
            let axes = vec![Axis {
                key: "h_u".into(),
                values: vec![1.5, 5.0, 10.0, 20.0, 50.0, 100.0, 150.0, 200.0, 300.0],
            }];
            swept(
                &d,
                axes,
                vec![Metric::Throughput, Metric::Coverage],
                method,
                mc,
                "repro fig4",
                1,
            )
        }
        Target::Fig5 => {
            let d = with(
                doc,
                &[("antenna.mode", "directional"), ("antenna.tilt_deg", "0")],
            )?;
            let axes = vec![
                Axis {
                    key: "antenna.beamwidth_deg".into(),
                    values: range(10.0, 10.0, 170.0),
                },
                Axis {
                    key: "h_u".into(),
                    values: vec![50.0, 100.0, 200.0],
                },
            ];
            swept(
                &d,
                axes,
                vec![Metric::Coverage, Metric::Throughput],
                method,
                mc,
                "repro fig5",
                2,
            )
        }
        Target::Fig6 => {
            let d = with(
                doc,
                &[
                    ("antenna.mode", "directional"),
                    ("antenna.beamwidth_deg", "60"),
                    ("h_u", "100"),
                ],
            )?;
            let axes = vec![
                Axis {
                    key: "antenna.tilt_deg".into(),
                    values: TILT_GRID.to_vec(),
                },
                Axis {
                    key: "lambda_per_km2".into(),
                    values: vec![1.0, 5.0, 20.0],
                },
            ];
            swept(
                &d,
                axes,
                vec![Metric::Coverage, Metric::Throughput],
                method,
                mc,
                "repro fig6",
                2,
            )
        }
        Target::Fig8 => fig8(doc, method),
        Target::Fig9 => fig9(doc, method),
    }
}

fn swept(
    doc: &Value,
    axes: Vec<Axis>,
    metrics: Vec<Metric>,
    method: CoverageMethod,
    mc: Option<SimulationSettings>,
    command: &str,
    y: usize,
) -> Result<Reproduction> {
    let n_axes = axes.len();
    let spec = SweepSpec {
        axes,
        metrics,
        method,
        mc,
    };
    let mut table = run_sweep(&spec, doc)?;
    if let Some(entry) = table.metadata.iter_mut().find(|(k, _)| k == "command") {
        entry.1 = command.to_string();
    }
    let plot = PlotSpec::for_table(&table, n_axes, n_axes + y - 1);
    Ok(Reproduction {
        table,
        plot,
        report: None,
    })
}

fn table2(
    doc: &Value,
    method: CoverageMethod,
    mc: Option<SimulationSettings>,
) -> Result<Reproduction> {
    let d = with(doc, &[("antenna", r#"{"mode": "omnidirectional"}"#)])?;
    let mut table = SweepTable::new(
        vec![
            "h_u [m]".into(),
            "bandwidth [kHz]".into(),
            "coverage_suburban".into(),
            "coverage_urban".into(),
        ],
        "error",
    );
    describe(
        &mut table,
        "repro table2",
        &scenario_from_document(&d)?,
        method,
        mc.as_ref(),
    );
    let spec = SweepSpec {
        axes: vec![],
        metrics: vec![Metric::Coverage],
        method,
        mc,
    };
    spec.validate()?;
    let settings = mc.unwrap_or_default();
    let points: Vec<(f64, f64)> = [2e5, 4e5]
        .iter()
        .flat_map(|&bw| [1.5, 50.0, 100.0, 150.0].map(|h| (h, bw)))
        .collect();
    let rows: Vec<(Vec<f64>, String)> = with_thread_limit(|| {
        points
            .par_iter()
            .map(|&(h, bw)| {
                let mut values = vec![h, bw / 1e3];
                let mut notes = Vec::new();
                for env in ["suburban", "urban"] {
                    let r = with(&d, &[("environment", env)]).and_then(|e| {
                        let mut cfg = scenario_from_document(&e)?;
                        cfg.h_u = h;
                        cfg.bandwidth_hz = bw;
                        let c = aerial_link::analysis::coverage_curve_with(
                            &cfg,
                            &[cfg.sinr_threshold()],
                            method,
                            &settings,
                        )?;
                        Ok(c[0].p_cov)
                    });
                    match r {
                        Ok(p) => values.push(p),
                        Err(e) => {
                            values.push(f64::NAN);
                            notes.push(format!("{env}: {e}"));
                        }
                    }
                }
                (values, notes.join("; "))
            })
            .collect()
    });
    for (values, note) in rows {
        table.push(values, note);
    }
    let plot = PlotSpec {
        x: 0,
        y: vec![2, 3],
        series: Some(1),
        title: "coverage vs altitude".into(),
    };
    Ok(Reproduction {
        table,
        plot,
        report: None,
    })
}

/// Directional scenario at `h_u` with the tilt that maximizes its throughput.
fn best_tilt(
    base: &ScenarioConfig,
    h_u: f64,
    lambda: f64,
    method: CoverageMethod,
) -> aerial_link::Result<(f64, ScenarioConfig, f64)> {
    let mut cfg = base.clone();
    cfg.h_u = h_u;
    cfg.set_lambda_per_km2(lambda);
    let best = optimize_parameter(
        &cfg,
        Parameter::Tilt,
        &TILT_GRID,
        Objective::Throughput,
        method,
    )?;
    let tuned = Parameter::Tilt.apply(&cfg, best.argmax)?;
    Ok((best.argmax, tuned, best.max))
}

fn directional_base(doc: &Value) -> Result<ScenarioConfig> {
    let d = with(
        doc,
        &[
            ("antenna.mode", "directional"),
            ("antenna.beamwidth_deg", "120"),
            ("antenna.tilt_deg", "0"),
        ],
    )?;
    Ok(scenario_from_document(&d)?)
}

fn analytic_only(method: CoverageMethod) -> Result<()> {
    if method == CoverageMethod::MonteCarlo {
        return Err(CliError::Usage(
            "this target optimizes over a grid and needs an analytical method".into(),
        ));
    }
    Ok(())
}

/// Axis values of a point and its computed columns.
type PointResult = (Vec<f64>, Result<Vec<f64>>);

fn push_rows(table: &mut SweepTable, rows: Vec<PointResult>, width: usize) {
    for (mut values, r) in rows {
        match r {
            Ok(v) => {
                values.extend(v);
                table.push(values, "");
            }
            Err(e) => {
                values.extend(std::iter::repeat_n(f64::NAN, width));
                table.push(values, e.to_string());
            }
        }
    }
}

fn fig8(doc: &Value, method: CoverageMethod) -> Result<Reproduction> {
    analytic_only(method)?;
    let base = directional_base(doc)?;
    let mut table = SweepTable::new(
        vec![
            "h_u [m]".into(),
            "lambda_per_km2 [1/km2]".into(),
            "tilt_deg [deg]".into(),
            "throughput [b/s/Hz]".into(),
        ],
        "error",
    );
    describe(&mut table, "repro fig8", &base, method, None);
    let points: Vec<(f64, f64)> = [1.5, 50.0, 100.0]
        .iter()
        .flat_map(|&h| LAMBDA_GRID.map(|l| (h, l)))
        .collect();
    let rows = with_thread_limit(|| {
        points
            .par_iter()
            .map(|&(h, l)| {
                let r = if h <= base.h_b {
                    // ground reference: omnidirectional, no tilt
                    let mut g = base.ground_counterpart();
                    g.set_lambda_per_km2(l);
                    aerial_link::throughput(&g, method)
                        .map(|t| vec![f64::NAN, t.value])
                        .map_err(CliError::from)
                } else {
                    best_tilt(&base, h, l, method)
                        .map(|(tilt, _, v)| vec![tilt, v])
                        .map_err(CliError::from)
                };
                (vec![h, l], r)
            })
            .collect()
    });
    push_rows(&mut table, rows, 2);
    let plot = PlotSpec {
        x: 1,
        y: vec![3],
        series: Some(0),
        title: "throughput at the best tilt".into(),
    };
    Ok(Reproduction {
        table,
        plot,
        report: None,
    })
}

fn fig9(doc: &Value, method: CoverageMethod) -> Result<Reproduction> {
    analytic_only(method)?;
    let base = directional_base(doc)?;
    let mut table = SweepTable::new(
        vec![
            "rho".into(),
            "lambda_per_km2 [1/km2]".into(),
            "tilt_deg [deg]".into(),
            "ase [b/s/Hz/km2]".into(),
        ],
        "error",
    );
    describe(&mut table, "repro fig9", &base, method, None);
    let points: Vec<(f64, f64)> = [0.0, 0.5, 1.0]
        .iter()
        .flat_map(|&rho| LAMBDA_GRID.map(|l| (rho, l)))
        .collect();
    let settings = SimulationSettings::default();
    // The tilt depends on the density only, so each search serves every rho.
    let tuned: Vec<aerial_link::Result<(f64, ScenarioConfig, f64)>> = with_thread_limit(|| {
        LAMBDA_GRID
            .par_iter()
            .map(|&l| best_tilt(&base, base.h_u, l, method))
            .collect()
    });
    let rows = with_thread_limit(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(i, &(rho, l))| {
                let r = match &tuned[i % LAMBDA_GRID.len()] {
                    Ok((tilt, cfg, _)) => {
                        let mut cfg = cfg.clone();
                        cfg.rho = rho;
                        area_spectral_efficiency_with(&cfg, method, &settings)
                            .map(|ase| vec![*tilt, ase])
                            .map_err(CliError::from)
                    }
                    Err(e) => Err(CliError::from(e.clone())),
                };
                (vec![rho, l], r)
            })
            .collect()
    });
    push_rows(&mut table, rows, 2);
    let plot = PlotSpec {
        x: 1,
        y: vec![3],
        series: Some(0),
        title: "area spectral efficiency".into(),
    };
    Ok(Reproduction {
        table,
        plot,
        report: None,
    })
}
