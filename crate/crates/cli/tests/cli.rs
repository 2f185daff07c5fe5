//! End-to-end tests of the `hyrbf` binary: flag parsing, file outputs,
//! reproducibility of records, and exit-code classification.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hyrbf() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hyrbf"))
}

fn run(args: &[&str]) -> Output {
    hyrbf().args(args).output().expect("binary should spawn")
}

fn run_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {:?} failed\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn exit_code(args: &[&str]) -> i32 {
    run(args).status.code().expect("no exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Fast quadrature profile for tests that only exercise plumbing.
const FAST: [&str; 4] = ["--m", "6", "--L", "8"];

#[test]
fn solve_records_are_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        run_ok(&[
            "solve",
            "--problem",
            "ex1-log-interval",
            "--kernel",
            "GA+CU",
            "--epsilon",
            "0.43",
            "--rho",
            "3.96e-10",
            "--n",
            "8",
            "--m",
            "6",
            "--L",
            "8",
            "--out",
            path.to_str().unwrap(),
        ]);
    }
    let mut left = read_json(&a);
    let mut right = read_json(&b);
    // Only the volatile block may differ between identical runs.
    left.as_object_mut().unwrap().remove("metadata").unwrap();
    right.as_object_mut().unwrap().remove("metadata").unwrap();
    assert_eq!(left, right);
}

#[test]
fn rerunning_a_record_config_reproduces_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    run_ok(&[
        "solve",
        "--problem",
        "ex1-log-interval",
        "--kernel",
        "GA+CU",
        "--epsilon",
        "0.43",
        "--rho",
        "3.96e-10",
        "--n",
        "8",
        "--m",
        "6",
        "--L",
        "8",
        "--out",
        first.to_str().unwrap(),
    ]);
    let record = read_json(&first);
    let config = &record["config"];
    let field = |k: &str| config[k].to_string().trim_matches('"').to_string();

    let second = dir.path().join("second.json");
    run_ok(&[
        "solve",
        "--problem",
        &field("problem"),
        "--kernel",
        &field("kernel"),
        "--epsilon",
        &field("epsilon"),
        "--rho",
        &field("rho"),
        "--n",
        &field("n"),
        "--m",
        &field("m"),
        "--L",
        &field("levels"),
        "--sigma",
        &field("sigma"),
        "--nodes",
        &field("nodes"),
        "--seed",
        &field("seed"),
        "--resolution",
        &field("resolution"),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert_eq!(read_json(&second)["metrics"], record["metrics"]);
}

#[test]
fn points_csv_tabulates_the_evaluation_grid() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("points.csv");
    run_ok(&[
        "solve",
        "--problem",
        "ex1-log-interval",
        "--kernel",
        "CU",
        "--n",
        "6",
        "--m",
        "6",
        "--L",
        "8",
        "--resolution",
        "50",
        "--points-csv",
        csv.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x0,exact,approximate,abs_error");
    assert_eq!(lines.len(), 51);
    for line in &lines[1..] {
        let fields: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(fields.len(), 4);
        assert!((fields[1] - fields[2]).abs() - fields[3] <= f64::EPSILON);
    }
}

#[test]
fn converge_writes_one_row_per_node_count() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("table.csv");
    run_ok(&[
        "converge",
        "--problem",
        "ex1-log-interval",
        "--kernel",
        "GA+CU",
        "--n-list",
        "4,6,8,10",
        "--epsilon",
        "0.43",
        "--rho",
        "3.96e-10",
        "--m",
        "6",
        "--L",
        "8",
        "--out",
        csv.to_str().unwrap(),
    ]);
    let mut reader = csv::Reader::from_path(&csv).unwrap();
    assert_eq!(
        reader.headers().unwrap(),
        &csv::StringRecord::from(vec!["n", "h_fill", "mae", "rmse", "condition_number"])
    );
    let rows: Vec<(usize, f64, f64)> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[1].parse().unwrap(), r[2].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.iter().map(|r| r.0).collect::<Vec<_>>(), vec![4, 6, 8, 10]);
    // Fill distance shrinks with every refinement; the finest run beats
    // the coarsest.
    assert!(rows.windows(2).all(|w| w[1].1 < w[0].1));
    assert!(rows.iter().all(|r| r.2.is_finite()));
    assert!(rows.last().unwrap().2 < rows[0].2);
}

#[test]
fn sweep_rho_zero_reproduces_the_pure_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    run_ok(&[
        "sweep",
        "--problem",
        "ex1-log-interval",
        "--kernel",
        "GA+CU",
        "--n",
        "8",
        "--eps-grid",
        "0.2:0.8:2",
        "--rho-list",
        "0",
        "--m",
        "6",
        "--L",
        "8",
        "--out",
        csv.to_str().unwrap(),
    ]);
    let mut reader = csv::Reader::from_path(&csv).unwrap();
    let rows: Vec<(f64, f64, f64)> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].parse().unwrap(), r[2].parse().unwrap(), r[3].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 2);
    for (epsilon, mae, rmse) in rows {
        let record_path = dir.path().join(format!("pure-{epsilon}.json"));
        run_ok(&[
            "solve",
            "--problem",
            "ex1-log-interval",
            "--kernel",
            "GA",
            "--epsilon",
            &epsilon.to_string(),
            "--n",
            "8",
            "--m",
            "6",
            "--L",
            "8",
            "--out",
            record_path.to_str().unwrap(),
        ]);
        let record = read_json(&record_path);
        assert_eq!(record["metrics"]["mae"].as_f64().unwrap().to_bits(), mae.to_bits());
        assert_eq!(record["metrics"]["rmse"].as_f64().unwrap().to_bits(), rmse.to_bits());
    }
}

#[test]
fn sweep_survives_numerical_failures() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    // A nearly flat shape parameter makes the pure-column system exactly
    // singular; the sweep must record NaN and keep going.
    run_ok(&[
        "sweep",
        "--problem",
        "ex1-log-interval",
        "--kernel",
        "GA+CU",
        "--n",
        "6",
        "--eps-grid",
        "1e-9:0.5:2",
        "--rho-list",
        "0,1e-8",
        "--m",
        "6",
        "--L",
        "8",
        "--out",
        csv.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0][2].is_nan(), "flat pure cell should fail: {rows:?}");
    assert!(rows[3][2].is_finite(), "healthy cell should survive: {rows:?}");
}

#[test]
fn config_file_fills_unset_flags_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "[solve]\nproblem = \"ex1-log-interval\"\nkernel = \"GA\"\nepsilon = 0.9\nn = 4\nm = 6\nL = 8\n",
    )
    .unwrap();
    let out = dir.path().join("record.json");
    run_ok(&[
        "solve",
        "--config",
        config.to_str().unwrap(),
        "--epsilon",
        "0.43",
        "--out",
        out.to_str().unwrap(),
    ]);
    let record = read_json(&out);
    assert_eq!(record["config"]["kernel"], "GA");
    assert_eq!(record["config"]["epsilon"].as_f64(), Some(0.43));
    assert_eq!(record["config"]["n"].as_u64(), Some(4));
    assert_eq!(record["config"]["levels"].as_u64(), Some(8));
}

#[test]
fn misspelled_config_keys_are_configuration_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(&config, "[solve]\nepsilonn = 0.9\n").unwrap();
    let code = exit_code(&[
        "solve",
        "--config",
        config.to_str().unwrap(),
        "--problem",
        "ex1-log-interval",
        "--kernel",
        "CU",
        "--n",
        "4",
    ]);
    assert_eq!(code, 2);
}

#[test]
fn out_dir_variable_anchors_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    let out = hyrbf()
        .args([
            "solve",
            "--problem",
            "ex1-log-interval",
            "--kernel",
            "CU",
            "--n",
            "4",
            "--m",
            "6",
            "--L",
            "8",
            "--out",
            "runs/record.json",
        ])
        .env("HYRBF_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("runs/record.json").is_file());
}

#[test]
fn exit_codes_separate_config_from_numerical_failures() {
    assert_eq!(exit_code(&["solve", "--problem", "nope", "--kernel", "GA", "--n", "4"]), 2);
    assert_eq!(
        exit_code(&["solve", "--problem", "ex1-log-interval", "--kernel", "GA+CU", "--n", "1"]),
        2
    );
    // GA needs a shape parameter.
    assert_eq!(
        exit_code(&["solve", "--problem", "ex1-log-interval", "--kernel", "GA", "--n", "4"]),
        2
    );
    let both_row_modes = exit_code(&[
        "converge",
        "--problem",
        "ex1-log-interval",
        "--kernel",
        "CU",
        "--rows",
        "4:-:-",
        "--n-list",
        "4,6",
    ]);
    assert_eq!(both_row_modes, 2);
    // A flat shape parameter collapses the columns into an exactly
    // singular system.
    let flat = exit_code(&[
        "solve",
        "--problem",
        "ex1-log-interval",
        "--kernel",
        "GA",
        "--epsilon",
        "1e-9",
        "--n",
        "6",
        "--m",
        "6",
        "--L",
        "8",
    ]);
    assert_eq!(flat, 3);
}

#[test]
fn quad_test_passes_by_default_and_fails_under_weak_grading() {
    let stdout = run_ok(&["quad-test"]);
    assert!(stdout.contains("quad-test passed"));
    // Grading far below the singularity strength caps the observed order.
    let out = run(&["quad-test", "--oracle", "inverse-sqrt", "--sigma", "0.05"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn list_problems_covers_the_registry() {
    let stdout = run_ok(&["list-problems"]);
    for key in [
        "ex1-log-interval",
        "ex2-cos-log",
        "ex2-cos-log-pi",
        "ex3-blade-2d",
        "ex4-crescent-2d",
        "ex5-annulus-2d",
        "ex6-boxes-3d",
    ] {
        assert!(stdout.contains(key), "missing {key}\n{stdout}");
    }
}

#[test]
fn pso_tune_writes_a_monotone_history() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tune.json");
    run_ok(&[
        "pso-tune",
        "--problem",
        "ex1-log-interval",
        "--kernel",
        "GA+CU",
        "--n",
        "8",
        "--swarm",
        "6",
        "--iters",
        "6",
        "--eps-bounds",
        "0.05:1.5",
        "--rho-bounds",
        "1e-12:1e-7",
        "--m",
        "6",
        "--L",
        "8",
        "--out",
        out.to_str().unwrap(),
    ]);
    let record = read_json(&out);
    let history: Vec<f64> =
        record["result"]["history"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!(!history.is_empty());
    assert!(history.windows(2).all(|w| w[1] <= w[0]), "history must never worsen: {history:?}");
    let best = record["result"]["best_mae"].as_f64().unwrap();
    assert_eq!(best, *history.last().unwrap());
    assert!(best <= 1e-3, "tuned error should be small, got {best}");
    let eps = record["result"]["eps_opt"].as_f64().unwrap();
    let rho = record["result"]["rho_opt"].as_f64().unwrap();
    assert!((0.05..=1.5).contains(&eps));
    assert!((1e-12..=1e-7).contains(&rho));
}
