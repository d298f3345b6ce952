use std::path::Path;
use std::process::Command;

fn lab(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_attractor-lab"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env("ATTRACTOR_LAB_THREADS", "2")
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn equilibria_writes_records() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _) = lab(dir.path(), &["equilibria", "--lambda", "5", "-K", "32"]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(dir.path().join("equilibria.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let records = v.as_array().unwrap();
    assert_eq!(records.len(), 5);
    assert_eq!(records[0]["profile"]["K"], 32);
    assert_eq!(records[0]["morse_index"], 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(lab(dir.path(), &["equilibria", "--lambda", "9", "-K", "16"]).0, 2);
    assert_eq!(lab(dir.path(), &["equilibria", "--lambda", "-1"]).0, 2);
    assert_eq!(lab(dir.path(), &["spectrum", "--branch", "3", "+", "--lambda", "5", "-K", "16"]).0, 2);
    assert_eq!(lab(dir.path(), &["verify-paper", "--lambda", "9", "-K", "16"]).0, 2);
    assert_eq!(lab(dir.path(), &["no-such-command"]).0, 2);
    let out = Command::new(env!("CARGO_BIN_EXE_attractor-lab"))
        .args(["equilibria", "-K", "16"])
        .arg("--out")
        .arg(dir.path())
        .env("ATTRACTOR_LAB_THREADS", "none")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[model]\nlambda = 10.0\n[discretization]\nK = 16\n").unwrap();
    let (code, _) = lab(dir.path(), &["sweep", "--config", cfg.to_str().unwrap(), "--grid", "0.5,2,5,10"]);
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 1 + 3 + 5 + 7);
    let (code, _) = lab(dir.path(), &["equilibria", "--config", cfg.to_str().unwrap(), "--lambda", "2"]);
    assert_eq!(code, 0);
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("equilibria.json")).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
}

#[test]
fn modelflow_graph_matches_pde_schema() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(lab(dir.path(), &["modelflow", "--n", "2"]).0, 0);
    assert_eq!(lab(dir.path(), &["connect", "--lambda", "5", "-K", "32"]).0, 0);
    let read = |name: &str| -> serde_json::Value {
        serde_json::from_str(&std::fs::read_to_string(dir.path().join(name)).unwrap()).unwrap()
    };
    let (model, pde) = (read("modelflow_graph.json"), read("graph.json"));
    assert_eq!(model, pde);
    let dot = std::fs::read_to_string(dir.path().join("modelflow.dot")).unwrap();
    assert!(dot.contains("\"zero\" -> \"phi_2^+\""));
    let csv = std::fs::read_to_string(dir.path().join("trajectory_zero.csv")).unwrap();
    assert!(csv.starts_with("t,energy,lap,distance\n"));
}

#[test]
fn trivial_verify_report() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout) = lab(dir.path(), &["verify-paper", "--lambda", "0.5", "-K", "16"]);
    assert_eq!(code, 0, "{stdout}");
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(v["N"], 0);
    assert_eq!(v["equilibria"].as_array().unwrap().len(), 1);
    assert_eq!(v["criteria"].as_array().unwrap().len(), 12);
    assert_eq!(v["passed"], true);
}
