//! Analytical coverage against the simulator on an altitude by threshold grid.

use aerial_link::analysis::coverage_curve_with;
use aerial_link::simulator::estimate_ccdf;
use aerial_link::units::db_to_linear;
use aerial_link::{CoverageMethod, ScenarioConfig, SimulationSettings};

use crate::error::Result;
use crate::sweep::describe;
use crate::table::SweepTable;

/// Allowed gap between an approximation and the simulation, on top of the
/// statistical bound.
pub const APPROX_TOLERANCE: f64 = 0.03;

const ANALYTIC: [CoverageMethod; 3] = [
    CoverageMethod::Exact,
    CoverageMethod::LosOnly,
    CoverageMethod::GammaMatch,
];

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub table: SweepTable,
    /// Largest |method - simulation| over the grid, per analytical method.
    pub max_deviation: Vec<(CoverageMethod, f64)>,
    /// Comparisons that broke their bound, as `h_u/T/method` strings.
    pub violations: Vec<String>,
    /// Out-of-bound approximations at or below BS height, reported only.
    pub expected: Vec<String>,
}

impl ValidationReport {
    pub fn flagged(&self) -> bool {
        !self.violations.is_empty()
    }
}

/// Runs the three analytical methods and the simulator at every
/// `(altitude, threshold)` pair. The exact expression must stay within
/// three standard errors of the simulation; the approximations get
/// [`APPROX_TOLERANCE`] on top, and only above BS height, where they apply.
pub fn validate(
    cfg: &ScenarioConfig,
    altitudes: &[f64],
    thresholds_db: &[f64],
    settings: &SimulationSettings,
) -> Result<ValidationReport> {
    let columns = [
        "h_u [m]",
        "T [dB]",
        "exact",
        "los-only",
        "gamma-match",
        "monte-carlo",
        "mc_se",
    ];
    let mut table = SweepTable::new(columns.iter().map(|c| c.to_string()).collect(), "flags");
    describe(
        &mut table,
        "validate",
        cfg,
        CoverageMethod::MonteCarlo,
        Some(settings),
    );
    let t: Vec<f64> = thresholds_db.iter().map(|&d| db_to_linear(d)).collect();
    let n = settings.realizations as f64;
    let mut max_deviation: Vec<(CoverageMethod, f64)> =
        ANALYTIC.iter().map(|&m| (m, 0.0)).collect();
    let mut violations = Vec::new();
    let mut expected = Vec::new();

    for &h in altitudes {
        let mut c = cfg.clone();
        c.h_u = h;
        c.validate()?;
        let curves = ANALYTIC
            .iter()
            .map(|&m| coverage_curve_with(&c, &t, m, settings))
            .collect::<aerial_link::Result<Vec<_>>>()?;
        let mc = estimate_ccdf(&c, &t, settings.realizations, settings.seed)?;
        let elevated = h > c.h_b;
        for (i, &t_db) in thresholds_db.iter().enumerate() {
            let sim = mc[i].value;
            let se = mc[i]
                .std_error
                .max((sim * (1.0 - sim) / n).sqrt())
                .max(1.0 / n);
            let mut flags = Vec::new();
            let mut values = vec![h, t_db];
            for (k, &m) in ANALYTIC.iter().enumerate() {
                let p = curves[k][i].p_cov;
                values.push(p);
                let dev = (p - sim).abs();
                max_deviation[k].1 = max_deviation[k].1.max(dev);
                let bound = if m == CoverageMethod::Exact {
                    3.0 * se
                } else {
                    3.0 * se + APPROX_TOLERANCE
                };
                if dev > bound {
                    let label = format!("h_u={h:?}/T={t_db:?}/{}", m.name());
                    if m == CoverageMethod::Exact || elevated {
                        flags.push(format!("{}-violation", m.name()));
                        violations.push(label);
                    } else {
                        flags.push(format!("{}-expected-deviation", m.name()));
                        expected.push(label);
                    }
                }
            }
            values.extend([sim, mc[i].std_error]);
            table.push(values, flags.join(" "));
        }
    }
    for (m, d) in &max_deviation {
        table.meta(&format!("max_abs_deviation.{}", m.name()), format!("{d:?}"));
    }
    table.meta("violations", violations.len());
    Ok(ValidationReport {
        table,
        max_deviation,
        violations,
        expected,
    })
}
