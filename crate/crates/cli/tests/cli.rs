use std::path::Path;
use std::process::{Command, Output};

use aerial_link_cli::SweepTable;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aerial-link"))
        .args(args)
        .current_dir(dir)
        .env("AERIAL_LINK_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn table(out: &Output) -> SweepTable {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    SweepTable::read_csv(&out.stdout[..]).unwrap()
}

#[test]
fn exit_codes_are_distinct() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("broken.json"), "{\"h_u\": ").unwrap();
    std::fs::write(
        dir.path().join("negative.json"),
        r#"{"lambda_per_km2": -1}"#,
    )
    .unwrap();

    assert_eq!(code(&run(&["coverage"], dir.path())), 0);
    assert_eq!(
        code(&run(&["coverage", "--scenario", "broken.json"], dir.path())),
        3
    );
    let out = run(&["coverage", "--scenario", "negative.json"], dir.path());
    assert_eq!(code(&out), 4);
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda_per_km2"));
    assert_eq!(code(&run(&["coverage", "--bogus"], dir.path())), 2);
    assert_eq!(
        code(&run(&["coverage", "--method", "monte-carlo"], dir.path())),
        2
    );
    assert_eq!(
        code(&run(
            &["coverage", "--scenario", "missing.json"],
            dir.path()
        )),
        1
    );
    let tilted_too_far = [
        "coverage",
        "--set",
        "antenna.mode=directional",
        "--set",
        "antenna.beamwidth_deg=60",
        "--set",
        "antenna.tilt_deg=80",
    ];
    assert_eq!(code(&run(&tilted_too_far, dir.path())), 4);
}

#[test]
fn set_matches_scenario_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("s.json"),
        r#"{"h_u": 50, "bandwidth_hz": 400000}"#,
    )
    .unwrap();
    let from_file = table(&run(&["coverage", "--scenario", "s.json"], dir.path()));
    let from_set = table(&run(
        &[
            "coverage",
            "--set",
            "h_u=50",
            "--set",
            "bandwidth_hz=400000",
        ],
        dir.path(),
    ));
    assert_eq!(from_file.rows, from_set.rows);
    let default = table(&run(&["coverage"], dir.path()));
    assert_ne!(default.rows, from_set.rows);
    // file first, then overrides
    let both = table(&run(
        &["coverage", "--scenario", "s.json", "--set", "h_u=100"],
        dir.path(),
    ));
    let only_bw = table(&run(
        &["coverage", "--set", "bandwidth_hz=400000"],
        dir.path(),
    ));
    assert_eq!(both.rows, only_bw.rows);
}

#[test]
fn sweep_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "sweep",
            "--axis",
            "h_u=1.5,50,100",
            "--axis",
            "bandwidth_hz=200000,400000",
            "--metrics",
            "coverage,throughput",
            "--out",
            "sweep.csv",
            "--svg",
            "sweep.svg",
        ],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let t = SweepTable::load(&dir.path().join("sweep.csv")).unwrap();
    assert_eq!(t.rows.len(), 6);
    assert_eq!(t.columns[..2], ["h_u [m]", "bandwidth_hz [Hz]"]);
    assert!(t.get_meta("scenario").unwrap().contains("\"h_b\":25.0"));
    let again = SweepTable::read_csv(t.to_csv_string().unwrap().as_bytes()).unwrap();
    assert_eq!(again, t);
    assert_eq!(
        t.to_csv_string().unwrap(),
        std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap()
    );
    let svg = std::fs::read_to_string(dir.path().join("sweep.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 2);
}

#[test]
fn seeded_simulation_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "sweep",
        "--axis",
        "h_u=1.5,100",
        "--method",
        "monte-carlo",
        "--mc-n",
        "500",
        "--seed",
        "17",
    ];
    let a = run(&args, dir.path());
    let b = run(&args, dir.path());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let mut other = args;
    other[8] = "18";
    assert_ne!(run(&other, dir.path()).stdout, a.stdout);
}

#[test]
fn table2_has_eight_rows() {
    let dir = tempfile::tempdir().unwrap();
    let t = table(&run(&["repro", "table2"], dir.path()));
    assert_eq!(t.rows.len(), 8);
    assert_eq!(
        t.columns,
        [
            "h_u [m]",
            "bandwidth [kHz]",
            "coverage_suburban",
            "coverage_urban"
        ]
    );
    let grid: Vec<(f64, f64)> = t.rows.iter().map(|r| (r.values[0], r.values[1])).collect();
    assert_eq!(grid[0], (1.5, 200.0));
    assert_eq!(grid[7], (150.0, 400.0));
}

#[test]
fn single_point_validation_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "validate",
            "--altitudes",
            "100",
            "--thresholds",
            "0",
            "--mc-n",
            "20000",
            "--seed",
            "3",
        ],
        dir.path(),
    );
    let t = table(&out);
    assert_eq!(t.rows.len(), 1);
    assert!(t.get_meta("max_abs_deviation.exact").is_some());
    assert_eq!(t.get_meta("violations"), Some("0"));
}

#[test]
fn tier_reports_switches() {
    let dir = tempfile::tempdir().unwrap();
    let t = table(&run(
        &[
            "tier",
            "--set-micro",
            "lambda_per_km2=30",
            "--set-micro",
            "h_b=10",
            "--set-micro",
            "p_tx_dbm=33",
            "--set-macro",
            "lambda_per_km2=4.6",
            "--grid",
            "1.5,50,100,150",
        ],
        dir.path(),
    ));
    assert_eq!(t.rows.len(), 4);
    assert!(t
        .rows
        .iter()
        .all(|r| r.note == "macro" || r.note == "micro"));
    assert!(t.get_meta("switches").is_some());
}
