use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_layerpot"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn layerpot")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let idx = csv.lines().next().unwrap().split(',').position(|h| h == name).unwrap();
    rows(csv).into_iter().map(|r| r[idx].clone()).collect()
}

#[test]
fn classify_inverse_log_is_divergent() {
    let o = run(&["modulus", "classify", "--family", "inverse_log"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = String::from_utf8(o.stdout).unwrap();
    let partial: Vec<f64> = column(&csv, "partial_integral").iter().map(|v| v.parse().unwrap()).collect();
    assert!(partial.windows(2).all(|w| w[1] > w[0]));
    assert!(column(&csv, "verdict").iter().all(|v| v == "divergent"));
}

#[test]
fn classify_power_is_dini_and_writes_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("power.csv");
    let o = run(&[
        "modulus",
        "classify",
        "--family",
        "power",
        "--params",
        r#"{"alpha":0.5}"#,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(column(&csv, "verdict").iter().all(|v| v == "dini"));
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap()).unwrap();
    assert_eq!(side["tool"], "layerpot-cli");
    assert_eq!(side["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(side["command"], "modulus classify");
    assert_eq!(side["config"]["params"]["alpha"], 0.5);
    assert_eq!(side["summary"]["verdict"], "dini");
    let integral = side["summary"]["integral"].as_f64().unwrap();
    assert!((integral - 2.0).abs() < 1e-6);
}

#[test]
fn malformed_json_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"n\": 3,").unwrap();
    let out = dir.path().join("u.csv");
    let points = configs().join("points.csv");
    let o = run(&[
        "solve",
        "eval",
        "--problem",
        bad.to_str().unwrap(),
        "--points",
        points.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("problem"));
    assert!(!out.exists());
    assert!(!out.with_extension("json").exists());
}

#[test]
fn schema_errors_name_the_field() {
    let o = run(&["modulus", "classify", "--family", "power", "--params", r#"{"alpah":0.5}"#]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("alpah"));

    let o = run(&["modulus", "classify", "--family", "power"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("params.alpha"));

    let o = run(&["modulus", "classify"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("family"));

    let o = run(&["oracle", "radial", "--s", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn points_outside_the_ball_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("p.csv");
    std::fs::write(&pts, "0,0,0.5\n0,0,1.5\n").unwrap();
    let problem = configs().join("flat.json");
    let o = run(&["solve", "eval", "--problem", problem.to_str().unwrap(), "--points", pts.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("points[1]"));
}

#[test]
fn convergence_failure_exits_3_with_partial_csv() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("tight.json");
    std::fs::write(
        &problem,
        r#"{"interface": {"family": "holder", "params": {"alpha": 0.5}},
            "density": {"family": "holder", "params": {"alpha": 0.5}},
            "quadrature": {"target_tol": 1e-15, "max_depth": 1}}"#,
    )
    .unwrap();
    let out = dir.path().join("u.csv");
    let points = configs().join("points.csv");
    let o = run(&[
        "solve",
        "eval",
        "--problem",
        problem.to_str().unwrap(),
        "--points",
        points.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(rows(&csv).len(), 4);
    assert!(column(&csv, "failure").iter().any(|f| f == "not_converged"));
}

#[test]
fn flat_centre_value_from_cli() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("p.csv");
    std::fs::write(&pts, "0,0,0.3\n").unwrap();
    let problem = configs().join("flat.json");
    let o = run(&["solve", "eval", "--problem", problem.to_str().unwrap(), "--points", pts.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = String::from_utf8(o.stdout).unwrap();
    let u: f64 = column(&csv, "u")[0].parse().unwrap();
    // On the axis of the unit disk: free-space part minus the image part.
    let t: f64 = 0.3;
    let s = (1.0 + t * t).sqrt();
    let exact = -((s - t) / 2.0 - (s - 1.0) / (2.0 * t * t));
    assert!((u - exact).abs() < 1e-8, "{u} vs {exact}");
    assert!(column(&csv, "est_error")[0].parse::<f64>().unwrap() < 1e-6);
}

#[test]
fn jump_reports_extrapolated_row() {
    let problem = configs().join("flat.json");
    let o = run(&["solve", "jump", "--problem", problem.to_str().unwrap(), "--x0", "0,0,0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = String::from_utf8(o.stdout).unwrap();
    let jumps = column(&csv, "jump");
    assert_eq!(jumps.len(), 4);
    let j: f64 = jumps[3].parse().unwrap();
    assert!((j - 1.0).abs() < 1e-6);
}

#[test]
fn iterate_keeps_jump_invariant() {
    let cfg = configs().join("iterate_quick.json");
    let o = run(&["experiment", "iterate", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = String::from_utf8(o.stdout).unwrap();
    for d in column(&csv, "jump_defect") {
        assert!(d.parse::<f64>().unwrap() <= 1e-14);
    }
}
