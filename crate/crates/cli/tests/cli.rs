use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, cmd: &str, config: &str) -> Output {
    let cfg = dir.join(format!("{cmd}.json"));
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_ergolab"))
        .args([cmd, "--config", cfg.to_str().unwrap(), "--out"])
        .arg(dir.join("out"))
        .output()
        .unwrap()
}

fn code(dir: &Path, cmd: &str, config: &str) -> i32 {
    run(dir, cmd, config).status.code().unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join("out").join(name)).unwrap()
}

/// Masses from a `cell,left,right,mass` CSV.
fn masses(csv: &str) -> Vec<f64> {
    csv.lines()
        .skip(2)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn config_errors_exit_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cases = [
        ("simulate", r#"{"map": {"family": "linear", "degree": 1}}"#),
        (
            "simulate",
            r#"{"map": {"family": "quadratic", "degree": 2}}"#,
        ),
        (
            "simulate",
            r#"{"map": {"family": "linear", "degree": 2}, "extra": 1}"#,
        ),
        (
            "simulate",
            r#"{"map": {"family": "linear", "degree": 2}, "params": {"x0": 1.5}}"#,
        ),
        (
            "ulam",
            r#"{"map": {"family": "linear", "degree": 2}, "params": {"k": 8}}"#,
        ),
        (
            "decay",
            r#"{"map": {"family": "linear", "degree": 2}, "params": {"r": 0.2, "epsilon": 0.1}}"#,
        ),
        (
            "decay",
            r#"{"map": {"family": "linear", "degree": 2}, "params": {"n_list": []}}"#,
        ),
        ("report", r#"{"inputs": []}"#),
        ("entropy", "not json"),
    ];
    for (cmd, cfg) in cases {
        assert_eq!(code(d, cmd, cfg), 2, "{cmd} {cfg}");
    }
}

#[test]
fn numerical_failures_exit_with_3() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let not_expanding = r#"{"map": {"family": "smooth_perturbed", "degree": 2, "c": 1.5}}"#;
    assert_eq!(code(d, "simulate", not_expanding), 3);
    let under_sampled = r#"{"map": {"family": "linear", "degree": 2},
        "params": {"measure": {"kind": "orbit", "n": 1000}, "q_max": 10}}"#;
    let out = run(d, "entropy", under_sampled);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("1000"));
}

#[test]
fn missing_config_file_is_reported() {
    let out = Command::new(env!("CARGO_BIN_EXE_ergolab"))
        .args(["simulate", "--config", "/nonexistent/cfg.json"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/cfg.json"));
}

#[test]
fn doubling_histogram_is_uniform() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cfg = r#"{"map": {"family": "linear", "degree": 2}, "seed": 3,
        "params": {"n": 1000000, "grid_k": 64}}"#;
    assert_eq!(code(d, "simulate", cfg), 0);
    let m = masses(&read(d, "histogram.csv"));
    assert_eq!(m.len(), 64);
    assert!(m.iter().all(|&x| (x - 1.0 / 64.0).abs() < 0.1 / 64.0));
}

#[test]
fn fixed_point_histogram_is_a_single_cell() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cfg = r#"{"map": {"family": "linear", "degree": 2}, "params": {"x0": 0.0, "n": 1000}}"#;
    assert_eq!(code(d, "simulate", cfg), 0);
    let m = masses(&read(d, "histogram.csv"));
    assert_eq!(m[0], 1.0);
    assert!(m[1..].iter().all(|&x| x == 0.0));
}

#[test]
fn entropy_reports_for_dirac_and_orbit() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let dirac = r#"{"map": {"family": "linear", "degree": 2},
        "params": {"measure": {"kind": "dirac", "x": 0.0}}}"#;
    assert_eq!(code(d, "entropy", dirac), 0);
    let r: serde_json::Value = serde_json::from_str(&read(d, "pesin_report.json")).unwrap();
    assert!((r["residual"].as_f64().unwrap() - std::f64::consts::LN_2).abs() < 1e-9);
    assert_eq!(r["measure_provenance"]["kind"], "dirac");
    assert_eq!(r["config"]["map"]["family"], "linear");

    let tripling = r#"{"map": {"family": "linear", "degree": 3},
        "params": {"measure": {"kind": "orbit", "n": 1000000}}}"#;
    assert_eq!(code(d, "entropy", tripling), 0);
    let r: serde_json::Value = serde_json::from_str(&read(d, "pesin_report.json")).unwrap();
    let h = r["entropy_est"].as_f64().unwrap();
    assert!((h - 3f64.ln()).abs() < 0.05 * 3f64.ln(), "{h}");
    assert!(r["residual"].as_f64().unwrap().abs() < 0.05);
}

#[test]
fn ulam_writes_matrix_stationary_and_pressure() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cfg = r#"{"map": {"family": "linear", "degree": 2}, "params": {"k": 16}}"#;
    assert_eq!(code(d, "ulam", cfg), 0);
    let matrix = read(d, "matrix.csv");
    assert!(matrix.starts_with("# config="));
    assert_eq!(matrix.lines().nth(1), Some("i,j,p"));
    assert!(matrix.lines().skip(2).all(|l| l.ends_with(",0.5")));
    assert_eq!(matrix.lines().count(), 2 + 32);
    let pi = masses(&read(d, "stationary.csv"));
    assert!(pi.iter().all(|&x| (x - 1.0 / 16.0).abs() < 1e-12));
    let p: serde_json::Value = serde_json::from_str(&read(d, "pressure.json")).unwrap();
    assert!(p["pressure"][0]["pressure"].as_f64().unwrap().abs() < 1e-9);
}

#[test]
fn report_merges_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let cfg = r#"{"map": {"family": "linear", "degree": 2}, "params": {"n": 10000, "grid_k": 16}}"#;
    assert_eq!(code(d, "simulate", cfg), 0);
    let inputs = format!(r#"{{"inputs": [{:?}]}}"#, d.join("out").to_str().unwrap());
    let cfg = d.join("report.json");
    std::fs::write(&cfg, inputs).unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_ergolab"))
        .args(["report", "--config", cfg.to_str().unwrap(), "--out"])
        .arg(d.join("summary"))
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(d.join("summary").join("summary.csv")).unwrap();
    assert!(csv.lines().any(|l| l.contains("simulate.json,lyapunov,")));
    let json = std::fs::read_to_string(d.join("summary").join("summary.json")).unwrap();
    assert!(json.contains("\"runs\""));
}
