use std::path::Path;
use std::process::{Command, Output};

const BELL: &str = r#"{
  "dims": [2, 2],
  "initial_state": [[0.7071067811865476, 0], [0, 0], [0, 0], [0.7071067811865476, 0]],
  "channels": [{"kind": "markov_amplitude_damping", "target": 0, "params": {"gamma": 1.0}}]
}"#;

const DEPHASING: &str = r#"{
  "dims": [2, 2],
  "initial_state": [[0.5, 0], [0.5, 0], [0.5, 0], [-0.5, 0]],
  "channels": [{"kind": "dephasing", "target": 1,
                "params": {"delta": 1.0, "density": {"shape": "superohmic", "omega_d": 10.0}}}]
}"#;

fn condent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_condent"))
        .args(args)
        .env_remove("CONDENT_OUT_DIR")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, content: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn tau_flags_weak_coupling() {
    let o = condent(&["tau", "--mu", "0.5,1,2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("0.5,,,none"), "{text}");
    assert!(text.contains("1,,,none"));
    let row = text.lines().find(|l| l.starts_with("2,")).unwrap();
    let gamma_tau: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((gamma_tau - 1.5 * std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn invalid_config_is_a_usage_error_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", &BELL.replace("\"gamma\": 1.0", "\"gamma\": -1.0"));
    let o = condent(&["distribution", "--config", &bad, "--samples", "100"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("channels[0].params.gamma"), "{}", stderr(&o));

    let malformed = write(dir.path(), "malformed.json", &BELL.replace("\"dims\": [2, 2]", "\"dims\": \"two\""));
    let o = condent(&["distribution", "--config", &malformed]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("dims"), "{}", stderr(&o));
}

#[test]
fn missing_config_and_bad_flags_are_usage_errors() {
    assert_eq!(condent(&["distribution"]).status.code(), Some(2));
    assert_eq!(condent(&["distribution", "--config", "/nonexistent/x.json"]).status.code(), Some(2));
    assert_eq!(condent(&["tau", "--bogus"]).status.code(), Some(2));
    assert_eq!(condent(&["nothing"]).status.code(), Some(2));
}

#[test]
fn verify_passes_and_detects_corruption() {
    let o = condent(&["verify", "--suite", "kernels"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS"));

    let o = condent(&["verify", "--suite", "oracle", "--f-scale", "1.01"]);
    assert_eq!(o.status.code(), Some(3));
    let line = stdout(&o).lines().find(|l| l.contains("scaling_law_amplitude_damping")).unwrap().to_owned();
    assert!(line.starts_with("FAIL"), "{line}");
    let residual: f64 = line.split_whitespace().nth(4).unwrap().parse().unwrap();
    assert!((residual - 0.01 / 1.01).abs() < 1e-4, "{residual}");
}

#[test]
fn verify_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report");
    let o = condent(&["verify", "--suite", "kernels", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("verify.json")).unwrap()).unwrap();
    assert!(!report["rows"].as_array().unwrap().is_empty());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["passed"], serde_json::json!(true));
}

#[test]
fn rerun_from_manifest_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bell.json", BELL);
    let first = dir.path().join("first");
    let o = condent(&[
        "distribution", "--config", &cfg, "--p", "0.2,0.6", "--bins", "20", "--samples", "20000", "--seed", "42",
        "--workers", "3", "--out", first.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // The rerun must not need the original config file.
    std::fs::remove_file(&cfg).unwrap();
    let second = dir.path().join("second");
    let o = condent(&["rerun", first.join("manifest.json").to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for file in ["distribution.csv", "boundary.csv"] {
        let a = std::fs::read(first.join(file)).unwrap();
        let b = std::fs::read(second.join(file)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{file} differs");
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(first.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "distribution");
    assert_eq!(manifest["parameters"]["sampling"]["seed"], 42);
    assert_eq!(manifest["parameters"]["sampling"]["workers"], 3);
    assert!(manifest["system"]["channels"].is_array());
}

#[test]
fn worker_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "deph.json", DEPHASING);
    let run = |w: &str| {
        let o = condent(&["mean", "--config", &cfg, "--points", "4", "--samples", "5000", "--workers", w]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        stdout(&o)
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_condent"))
        .args(["tau", "--format", "json", "--points", "5"])
        .env("CONDENT_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let table: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("tau.json")).unwrap()).unwrap();
    assert_eq!(table["rows"].as_array().unwrap().len(), 5);
    assert_eq!(table["columns"][1]["name"], "gamma_tau");
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn mean_follows_purely_ohmic_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "ohmic.json",
        &DEPHASING.replace(r#"{"shape": "superohmic", "omega_d": 10.0}"#, r#"{"shape": "purely_ohmic"}"#),
    );
    let o = condent(&["mean", "--config", &cfg, "--points", "5", "--t-max", "4", "--samples", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for line in stdout(&o).lines().skip(2) {
        let cols: Vec<&str> = line.split(',').collect();
        let scaled: f64 = cols[2].parse().unwrap();
        let log_x: f64 = cols[4].parse().unwrap();
        assert!((log_x + 0.5 * scaled).abs() < 1e-12, "{line}");
    }
}

#[test]
fn omega_bar_needs_a_cutoff_density() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bell.json", BELL);
    let o = condent(&["mean", "--config", &cfg, "--omega-bar", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_and_tomography_agree_with_the_scaling_law() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bell.json", BELL);
    let o = condent(&["oracle", "--config", &cfg, "--outcomes", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 5);
    let o = condent(&["tomography", "--config", &cfg, "--outcomes", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}
