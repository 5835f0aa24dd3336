use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use aerial_link::scenario::{apply_override, parse_document, scenario_from_document};
use aerial_link::simulator::with_thread_limit;
use aerial_link::{tier_select, CoverageMethod, Objective, SimulationSettings, Tier};

use aerial_link_cli::grid::{parse_assignment, parse_axis, parse_grid};
use aerial_link_cli::repro::{reproduce, Target, DEFAULT_MC};
use aerial_link_cli::svg::{render, PlotSpec};
use aerial_link_cli::sweep::{describe, evaluate, run_sweep, Axis, Metric, SweepSpec};
use aerial_link_cli::validate::validate;
use aerial_link_cli::{CliError, Result, SweepTable};

#[derive(Parser)]
#[command(
    name = "aerial-link",
    version,
    about = "Downlink coverage, throughput and ASE of aerial and ground UEs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coverage probability of one scenario.
    Coverage(Common),
    /// Average throughput in b/s/Hz.
    Throughput(Common),
    /// Area spectral efficiency in b/s/Hz/km2.
    Ase(Common),
    /// Metrics over a grid of one or two scenario keys.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `key=grid`, where grid is `a,b,c` or `start:step:stop`. At most twice.
        #[arg(long, required = true)]
        axis: Vec<String>,
        /// Comma-separated subset of coverage, throughput, ase.
        #[arg(long, default_value = "coverage")]
        metrics: String,
    },
    /// Best of two tiers at each UE altitude.
    Tier {
        #[arg(long = "macro", value_name = "FILE")]
        macro_scenario: Option<PathBuf>,
        #[arg(long = "micro", value_name = "FILE")]
        micro_scenario: Option<PathBuf>,
        #[arg(long, value_name = "KEY=VALUE")]
        set_macro: Vec<String>,
        #[arg(long, value_name = "KEY=VALUE")]
        set_micro: Vec<String>,
        /// Altitudes in m; defaults to 1.5 then 10 to 300 in steps of 10.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::Coverage)]
        objective: ObjectiveArg,
        #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
        method: MethodArg,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Analytical coverage against the simulator.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "1.5,100")]
        altitudes: String,
        /// SINR thresholds in dB.
        #[arg(long, default_value = "-10:2.5:20")]
        thresholds: String,
    },
    /// Regenerate a standard study.
    Repro {
        #[arg(value_parser = ["table2", "fig3", "fig4", "fig5", "fig6", "fig8", "fig9"])]
        target: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// JSON scenario; missing fields take the urban defaults.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Dotted-path override such as `antenna.tilt_deg=20`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
    method: MethodArg,
    /// Simulation seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo realizations.
    #[arg(long)]
    mc_n: Option<usize>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    LosOnly,
    GammaMatch,
    MonteCarlo,
}

impl From<MethodArg> for CoverageMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Exact => CoverageMethod::Exact,
            MethodArg::LosOnly => CoverageMethod::LosOnly,
            MethodArg::GammaMatch => CoverageMethod::GammaMatch,
            MethodArg::MonteCarlo => CoverageMethod::MonteCarlo,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Coverage,
    Throughput,
}

impl Common {
    fn document(&self) -> Result<Value> {
        load_document(self.scenario.as_deref(), &self.set)
    }

    fn mc(&self) -> Option<SimulationSettings> {
        self.mc_n.map(|n| SimulationSettings {
            realizations: n,
            seed: self.seed.unwrap_or(DEFAULT_MC.seed),
            ..Default::default()
        })
    }

    fn method(&self) -> CoverageMethod {
        self.method.into()
    }
}

fn load_document(path: Option<&Path>, overrides: &[String]) -> Result<Value> {
    let mut doc = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p.display(), e))?;
            parse_document(&text).map_err(|e| match e {
                aerial_link::Error::Parse(m) => {
                    aerial_link::Error::Parse(format!("{}: {m}", p.display()))
                }
                other => other,
            })?
        }
        None => Value::Object(Default::default()),
    };
    for o in overrides {
        let (k, v) = parse_assignment(o)?;
        apply_override(&mut doc, &k, &v)?;
    }
    Ok(doc)
}

fn emit(table: &SweepTable, out: Option<&Path>, svg: Option<(&Path, &PlotSpec)>) -> Result<()> {
    match out {
        Some(p) => table.save(p)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            table.write_csv(&mut lock)?;
            lock.flush().map_err(|e| CliError::io("stdout", e))?;
        }
    }
    if let Some((path, spec)) = svg {
        std::fs::write(path, render(table, spec)).map_err(|e| CliError::io(path.display(), e))?;
    }
    Ok(())
}

fn single(common: &Common, metric: Metric, name: &str) -> Result<()> {
    let method = common.method();
    let spec = SweepSpec {
        axes: vec![],
        metrics: vec![metric],
        method,
        mc: common.mc(),
    };
    spec.validate()?;
    let cfg = scenario_from_document(&common.document()?)?;
    let settings = common.mc().unwrap_or_default();
    let values = with_thread_limit(|| evaluate(&cfg, &[metric], method, &settings))?;
    let mut table = SweepTable::new(
        metric.columns().iter().map(|c| c.to_string()).collect(),
        "error",
    );
    describe(&mut table, name, &cfg, method, common.mc().as_ref());
    table.push(values, "");
    let plot = PlotSpec::for_table(&table, 0, 0);
    emit(
        &table,
        common.out.as_deref(),
        common.svg.as_deref().map(|p| (p, &plot)),
    )
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Coverage(c) => single(&c, Metric::Coverage, "coverage"),
        Command::Throughput(c) => single(&c, Metric::Throughput, "throughput"),
        Command::Ase(c) => single(&c, Metric::Ase, "ase"),
        Command::Sweep {
            common,
            axis,
            metrics,
        } => {
            let axes = axis
                .iter()
                .map(|a| parse_axis(a).map(|(key, values)| Axis { key, values }))
                .collect::<Result<Vec<_>>>()?;
            let metrics = metrics
                .split(',')
                .map(str::parse)
                .collect::<Result<Vec<Metric>>>()?;
            let spec = SweepSpec {
                axes,
                metrics,
                method: common.method(),
                mc: common.mc(),
            };
            let table = run_sweep(&spec, &common.document()?)?;
            let plot = PlotSpec::for_table(&table, spec.axes.len(), spec.axes.len());
            emit(
                &table,
                common.out.as_deref(),
                common.svg.as_deref().map(|p| (p, &plot)),
            )
        }
        Command::Tier {
            macro_scenario,
            micro_scenario,
            set_macro,
            set_micro,
            grid,
            objective,
            method,
            out,
            svg,
        } => {
            let grid = match grid {
                Some(g) => parse_grid(&g)?,
                None => std::iter::once(1.5)
                    .chain((1..=30).map(|i| 10.0 * i as f64))
                    .collect(),
            };
            let cfg_macro =
                scenario_from_document(&load_document(macro_scenario.as_deref(), &set_macro)?)?;
            let cfg_micro =
                scenario_from_document(&load_document(micro_scenario.as_deref(), &set_micro)?)?;
            let (objective, label) = match objective {
                ObjectiveArg::Coverage => (Objective::Coverage, "coverage"),
                ObjectiveArg::Throughput => (Objective::Throughput, "throughput"),
            };
            let method = CoverageMethod::from(method);
            let sel = with_thread_limit(|| {
                tier_select(&cfg_macro, &cfg_micro, &grid, objective, method)
            })?;
            let mut table = SweepTable::new(
                vec![
                    "h_u [m]".into(),
                    format!("{label}_macro"),
                    format!("{label}_micro"),
                ],
                "best",
            );
            describe(&mut table, "tier", &cfg_macro, method, None);
            table.meta(
                "micro_scenario",
                serde_json::to_string(&cfg_micro.to_file()).expect("scenario serializes"),
            );
            let switches: Vec<String> = sel.switches.iter().map(|s| format!("{s:?}")).collect();
            table.meta("switches", switches.join(","));
            for i in 0..sel.altitudes.len() {
                let best = match sel.best[i] {
                    Tier::Macro => "macro",
                    Tier::Micro => "micro",
                };
                table.push(
                    vec![sel.altitudes[i], sel.macro_values[i], sel.micro_values[i]],
                    best,
                );
            }
            let plot = PlotSpec {
                x: 0,
                y: vec![1, 2],
                series: None,
                title: format!("tier {label}"),
            };
            emit(&table, out.as_deref(), svg.as_deref().map(|p| (p, &plot)))
        }
        Command::Validate {
            common,
            altitudes,
            thresholds,
        } => {
            let cfg = scenario_from_document(&common.document()?)?;
            let settings = common.mc().unwrap_or(SimulationSettings {
                seed: common.seed.unwrap_or(DEFAULT_MC.seed),
                ..DEFAULT_MC
            });
            let report = validate(
                &cfg,
                &parse_grid(&altitudes)?,
                &parse_grid(&thresholds)?,
                &settings,
            )?;
            let plot = PlotSpec {
                x: 1,
                y: vec![2, 5],
                series: Some(0),
                title: "validation".into(),
            };
            emit(
                &report.table,
                common.out.as_deref(),
                common.svg.as_deref().map(|p| (p, &plot)),
            )?;
            for e in &report.expected {
                log::info!("expected deviation: {e}");
            }
            if report.flagged() {
                return Err(CliError::Flagged(format!(
                    "{} comparison(s) outside the bound: {}",
                    report.violations.len(),
                    report.violations.join(", ")
                )));
            }
            Ok(())
        }
        Command::Repro { target, common } => {
            let target: Target = target.parse()?;
            let mc = match (target, common.mc()) {
                (Target::Fig3, None) => Some(SimulationSettings {
                    seed: common.seed.unwrap_or(DEFAULT_MC.seed),
                    ..DEFAULT_MC
                }),
                (_, mc) => mc,
            };
            let r = reproduce(target, &common.document()?, common.method(), mc)?;
            emit(
                &r.table,
                common.out.as_deref(),
                common.svg.as_deref().map(|p| (p, &r.plot)),
            )?;
            if let Some(report) = r.report.filter(|r| r.flagged()) {
                return Err(CliError::Flagged(format!(
                    "{} comparison(s) outside the bound: {}",
                    report.violations.len(),
                    report.violations.join(", ")
                )));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
