//! End-to-end tests of the binary: flag handling, exit codes, and output
//! shapes.

use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ridgegap"));
    cmd.env("RIDGEGAP_LOG", "quiet");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

static TEMP_COUNTER: AtomicUsize = AtomicUsize::new(0);

fn temp_path(tag: &str) -> PathBuf {
    let n = TEMP_COUNTER.fetch_add(1, Ordering::Relaxed);
    std::env::temp_dir().join(format!(
        "ridgegap-cli-test-{}-{n}-{tag}",
        std::process::id()
    ))
}

#[test]
fn error_on_ridge_sum_reports_zeros() {
    let out = run(&[
        "error", "--f", "x1+x2", "--a", "1,0", "--b", "0,1", "--box", "0", "1", "0", "1", "--grid",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    assert!(report["lowerBound"]["value"].as_f64().unwrap() <= 1e-9);
    assert!(report["bestRidge"]["error"].as_f64().unwrap() <= 1e-9);
    assert!(report["closedForm"]["cornerValue"].as_f64().unwrap().abs() <= 1e-9);
    assert_eq!(report["agreement"]["dualityEquality"], true);
}

#[test]
fn parallel_directions_with_box_is_an_input_error() {
    let out = run(&[
        "error", "--f", "x1*x2", "--a", "1,2", "--b", "2,4", "--box", "0", "1", "0", "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    assert_eq!(err["error"]["kind"], "input");
}

#[test]
fn parallel_directions_with_points_still_reports() {
    // The closed-form leg is impossible, but the sup and LP still run.
    let points = temp_path("points.json");
    std::fs::write(&points, "[[0,0],[1,0],[0,1],[1,1]]").unwrap();
    let out = bin()
        .args([
            "error", "--f", "x1*x2", "--a", "1,0", "--b", "2,0", "--points",
        ])
        .arg(&points)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = stdout_json(&out);
    assert!(report["closedForm"].is_null());
    assert!(report["notes"]
        .as_array()
        .unwrap()
        .iter()
        .any(|n| n.as_str().unwrap().contains("parallel")));
    let _ = std::fs::remove_file(&points);
}

#[test]
fn missing_function_is_an_input_error() {
    let out = run(&[
        "error", "--a", "1,0", "--b", "0,1", "--box", "0", "1", "0", "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn domain_error_in_f_is_a_computation_error() {
    let points = temp_path("neg.json");
    std::fs::write(&points, "[[-1,0],[1,0],[1,1],[-1,1]]").unwrap();
    let out = bin()
        .args([
            "error", "--f", "log(x1)", "--a", "1,0", "--b", "0,1", "--points",
        ])
        .arg(&points)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "computation");
    let _ = std::fs::remove_file(&points);
}

#[test]
fn problem_object_file_round_trips() {
    let problem = temp_path("problem.json");
    std::fs::write(
        &problem,
        r#"{"dims": 2, "a": [1,0], "b": [0,1], "box": {"c1":0,"d1":1,"c2":0,"d2":1},
            "grid": 3, "f": "x1*x2", "options": {"quadOrder": 32}}"#,
    )
    .unwrap();
    let out = bin()
        .args(["error", "--points"])
        .arg(&problem)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = stdout_json(&out);
    assert!((report["bestRidge"]["error"].as_f64().unwrap() - 0.25).abs() <= 1e-9);
    let _ = std::fs::remove_file(&problem);
}

#[test]
fn unknown_problem_fields_are_rejected() {
    let problem = temp_path("bad-problem.json");
    std::fs::write(&problem, r#"{"a": [1,0], "b": [0,1], "boxx": {}}"#).unwrap();
    let out = bin()
        .args(["error", "--points"])
        .arg(&problem)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let _ = std::fs::remove_file(&problem);
}

#[test]
fn fit_network_pure_fit_error_when_target_is_ridge_sum() {
    let out = run(&[
        "fit-network",
        "--f",
        "x1+x2",
        "--a",
        "1,0",
        "--b",
        "0,1",
        "--box",
        "0",
        "1",
        "0",
        "1",
        "--grid",
        "5",
        "--activation",
        "sigmoid",
        "--epsilon",
        "0.01",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    let network_error = report["network"]["error"].as_f64().unwrap();
    assert!(network_error <= 0.01, "network error {network_error}");
}

#[test]
fn fit_network_rejects_mean_periodic_activation() {
    let out = run(&[
        "fit-network",
        "--f",
        "x1*x2",
        "--a",
        "1,0",
        "--b",
        "0,1",
        "--box",
        "0",
        "1",
        "0",
        "1",
        "--activation",
        "polynomial",
        "--epsilon",
        "0.05",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("mean periodic"), "stderr: {err}");
}

#[test]
fn fit_network_warns_on_unjustified_activation() {
    let out = run(&[
        "fit-network",
        "--f",
        "x1+x2",
        "--a",
        "1,0",
        "--b",
        "0,1",
        "--box",
        "0",
        "1",
        "0",
        "1",
        "--grid",
        "3",
        "--activation",
        "relu",
        "--epsilon",
        "0.05",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = stdout_json(&out);
    assert!(report["notes"]
        .as_array()
        .unwrap()
        .iter()
        .any(|n| n.as_str().unwrap().contains("relu")));
}

#[test]
fn fit_network_epsilon_unreachable_exits_4() {
    let out = run(&[
        "fit-network",
        "--f",
        "x1*x2",
        "--a",
        "1,0",
        "--b",
        "0,1",
        "--box",
        "0",
        "1",
        "0",
        "1",
        "--grid",
        "9",
        "--activation",
        "sigmoid",
        "--epsilon",
        "1e-12",
        "--fit-term-cap",
        "9",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn enumerate_corner_grid_single_line() {
    let out = run(&[
        "enumerate-paths",
        "--f",
        "x1*x2",
        "--a",
        "1,0",
        "--b",
        "0,1",
        "--box",
        "0",
        "1",
        "0",
        "1",
        "--grid",
        "2",
        "--max-len",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1);
    let line: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert!((line["g"].as_f64().unwrap().abs() - 0.25).abs() <= 1e-12);
}

#[test]
fn enumerate_sorted_by_magnitude() {
    let out = run(&[
        "enumerate-paths",
        "--f",
        "x1*x2",
        "--a",
        "1,0",
        "--b",
        "0,1",
        "--box",
        "0",
        "1",
        "0",
        "1",
        "--grid",
        "3",
        "--max-len",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let gs: Vec<f64> = text
        .lines()
        .map(|l| {
            serde_json::from_str::<serde_json::Value>(l).unwrap()["g"]
                .as_f64()
                .unwrap()
                .abs()
        })
        .collect();
    assert_eq!(gs.len(), 9);
    for pair in gs.windows(2) {
        assert!(pair[0] >= pair[1]);
    }
}

#[test]
fn enumerate_honors_problem_file_max_len() {
    // Problem file sets options.maxLen = 4: on a 3x3 grid only the 9
    // rectangles qualify (6-cycles would need length 6).
    let problem = temp_path("maxlen.json");
    std::fs::write(
        &problem,
        r#"{"a": [1,0], "b": [0,1], "box": {"c1":0,"d1":1,"c2":0,"d2":1},
            "grid": 3, "f": "x1*x2", "options": {"maxLen": 4}}"#,
    )
    .unwrap();
    let out = bin()
        .args(["enumerate-paths", "--points"])
        .arg(&problem)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 9);
    let _ = std::fs::remove_file(&problem);
}

#[test]
fn enumerate_empty_for_generic_points() {
    let points = temp_path("generic.json");
    std::fs::write(&points, "[[0,0],[1,2],[2,1]]").unwrap();
    let out = bin()
        .args([
            "enumerate-paths",
            "--f",
            "x1*x2",
            "--a",
            "1,0",
            "--b",
            "0,1",
            "--points",
        ])
        .arg(&points)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let _ = std::fs::remove_file(&points);
}

#[test]
fn enumerate_blowup_exits_5_with_partial_output() {
    let out = run(&[
        "enumerate-paths",
        "--f",
        "x1*x2",
        "--a",
        "1,0",
        "--b",
        "0,1",
        "--box",
        "0",
        "1",
        "0",
        "1",
        "--grid",
        "4",
        "--max-len",
        "8",
        "--cap",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(5));
    assert!(!out.stdout.is_empty(), "partial output expected");
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["truncated"], true);
}

#[test]
fn verify_small_run_passes() {
    let out = run(&["verify", "--seed", "42", "--trials", "5"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stdout: {} stderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    for suite in ["duality", "annihilation", "sandwich", "fubini"] {
        assert!(text.contains(suite), "missing suite {suite}");
    }
}

#[test]
fn verify_zero_trials_is_an_input_error() {
    let out = run(&["verify", "--trials", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn csv_sweep_is_deterministic_across_jobs() {
    let csv1 = temp_path("sweep1.csv");
    let csv2 = temp_path("sweep2.csv");
    for (csv, jobs) in [(&csv1, "1"), (&csv2, "4")] {
        let out = bin()
            .args([
                "error", "--f", "x1*x2", "--a", "1,0", "--b", "0,1", "--box", "0", "1", "0", "1",
                "--grid", "17", "--jobs", jobs, "--csv",
            ])
            .arg(csv)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
    }
    let c1 = std::fs::read(&csv1).unwrap();
    let c2 = std::fs::read(&csv2).unwrap();
    assert_eq!(c1, c2, "sweep output depends on job count");
    let text = String::from_utf8_lossy(&c1);
    assert!(text.starts_with("m,lowerBound,bestRidge\n"));
    // Resolutions 2, 3, 5, 9, 17 all report the exact corner value.
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        let lower: f64 = fields[1].parse().unwrap();
        let best: f64 = fields[2].parse().unwrap();
        assert!((lower - 0.25).abs() <= 1e-9 && (best - 0.25).abs() <= 1e-9);
    }
    assert_eq!(text.lines().count(), 6);
    let _ = std::fs::remove_file(&csv1);
    let _ = std::fs::remove_file(&csv2);
}

#[test]
fn out_of_class_function_reports_uncertified_not_disagreeing() {
    // The curvature condition fails for -x1*x2, so the corner rule makes no
    // claim: cornerFormula is absent and the exit code stays 0.
    let out = run(&[
        "error", "--f", "-x1*x2", "--a", "1,0", "--b", "0,1", "--box", "0", "1", "0", "1",
        "--grid", "5",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = stdout_json(&out);
    assert_eq!(report["closedForm"]["certified"], false);
    assert!(report["agreement"].get("cornerFormula").is_none());
    assert_eq!(report["agreement"]["dualityEquality"], true);
}

#[test]
fn non_finite_points_rejected() {
    let points = temp_path("inf.json");
    // serde_json parses an overflowing literal as infinity.
    std::fs::write(&points, "[[1e999,0],[0,1]]").unwrap();
    let out = bin()
        .args([
            "error", "--f", "x1*x2", "--a", "1,0", "--b", "0,1", "--points",
        ])
        .arg(&points)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let _ = std::fs::remove_file(&points);
}

#[test]
fn syntax_error_carries_offset() {
    let out = run(&[
        "error", "--f", "sin(x1*(", "--a", "1,0", "--b", "0,1", "--box", "0", "1", "0", "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("byte 8"), "stderr: {err}");
}
