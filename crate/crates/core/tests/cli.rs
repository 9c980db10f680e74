mod common;

use std::process::{Command, Output};

use common::real;
use crypto_metric::cli::{read_matrix, write_matrix};
use crypto_metric::metric::kg_hamiltonian;

fn run_env(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_crypto-metric"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("CRYPTO_METRIC_THREADS", t),
        None => cmd.env_remove("CRYPTO_METRIC_THREADS"),
    };
    cmd.output().unwrap()
}

fn run(args: &[&str]) -> Output {
    run_env(args, None)
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn kg_scan_over_tau_is_real() {
    let out = run(&[
        "scan", "--family", "kg", "--tau", "0:2:21", "--lambda", "0", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 21);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 8);
        assert_eq!(cols[2], "true", "{row}");
        assert_eq!(cols[6], "true", "{row}");
    }
}

#[test]
fn linear_scan_leaves_tau_empty_and_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.json");
    let w = dir.path().join("w.json");
    write_matrix(&h, &real(&[&[0.0, 1.0], &[1.0, 0.0]]), None).unwrap();
    write_matrix(&w, &real(&[&[0.0, -1.0], &[0.0, 0.0]]), None).unwrap();
    let args = [
        "scan",
        "--family",
        "linear",
        "--h",
        h.to_str().unwrap(),
        "--w",
        w.to_str().unwrap(),
        "--lambda",
        "0:2:9",
        "--format",
        "csv",
    ];
    let one = run_env(&args, Some("1"));
    let four = run_env(&args, Some("4"));
    let auto = run_env(&args, Some("0"));
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(one.stdout, auto.stdout);
    let text = stdout(&one);
    let second = text.lines().nth(1).unwrap();
    assert!(second.starts_with("0,,true,"), "{second}");

    let bad = run_env(&args, Some("many"));
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn out_flag_writes_artifact_and_prints_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("report.json");
    let out = run(&[
        "diag",
        "--family",
        "kg",
        "--tau",
        "0.5",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stderr.is_empty());
    assert!(stdout(&out).contains("spectrum real"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let e = report["eigenvalues"][1][0].as_f64().unwrap();
    assert!((e - 0.5f64.exp()).abs() < 1e-13);
}

#[test]
fn metric_without_observables_reports_free_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.json");
    let h3 = real(&[&[1.0, 0.5, 0.0], &[0.0, 2.0, 0.3], &[0.1, 0.0, 4.0]]);
    write_matrix(&h, &h3, Some("h")).unwrap();
    let out = run(&["metric", "--h", h.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["warning"], "family has 2 free ratios");
    assert_eq!(report["unique"], false);
    assert!(report["quasi_hermiticity_residual"].as_f64().unwrap() < 1e-10);
}

#[test]
fn hermitize_output_is_a_matrix_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("small_h.json");
    let out = run(&[
        "hermitize",
        "--family",
        "kg",
        "--tau",
        "-0.7",
        "--beta",
        "-0.3",
        "--format",
        "csv",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let small_h = read_matrix(&out_path).unwrap();
    assert!(small_h.hermitian_defect() < 1e-12);
    let tr: f64 = (0..2).map(|i| small_h[(i, i)].re).sum();
    assert!(tr.abs() < 1e-12);
    let det = small_h[(0, 0)] * small_h[(1, 1)] - small_h[(0, 1)] * small_h[(1, 0)];
    assert!((det.re + (-1.4f64).exp()).abs() < 1e-12);
}

#[test]
fn perturb_reports_corrections_and_admissibility() {
    let dir = tempfile::tempdir().unwrap();
    let h = dir.path().join("h.json");
    let w = dir.path().join("w.json");
    write_matrix(&h, &kg_hamiltonian(0.2), None).unwrap();
    write_matrix(&w, &real(&[&[0.0, 1.0], &[1.0, 0.0]]), None).unwrap();
    let out = run(&[
        "perturb",
        "--h",
        h.to_str().unwrap(),
        "--w",
        w.to_str().unwrap(),
        "--order",
        "2",
        "--lambda",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["metric_corrections"].as_array().unwrap().len(), 2);
    assert_eq!(report["admissible"], true);
}

#[test]
fn boundary_line_for_kg_carries_tau() {
    let out = run(&[
        "scan",
        "--family",
        "kg",
        "--tau",
        "0,0.5",
        "--lambda",
        "0",
        "--find-boundary",
        "0:1",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let tail: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("lambda_max"))
        .collect();
    assert_eq!(tail, vec!["lambda_max,NaN,0", "lambda_max,NaN,0.5"]);
}
