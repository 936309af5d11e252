use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const EXAMPLE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/example.json");
const CLOSED_EXAMPLE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/closed-example.json");

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_assimdyn"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(out)))
}

/// Writes the example parameters with `overrides` applied.
fn params_file(dir: &Path, name: &str, overrides: &[(&str, Value)]) -> PathBuf {
    let mut doc: Value = serde_json::from_str(&fs::read_to_string(EXAMPLE).unwrap()).unwrap();
    for (k, v) in overrides {
        doc[*k] = v.clone();
    }
    let path = dir.join(name);
    fs::write(&path, doc.to_string()).unwrap();
    path
}

fn stable_states(result: &Value) -> Vec<(f64, f64)> {
    result["steady_states"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|s| s["stability"] == "stable" && s["in_domain"] == true)
        .map(|s| (s["state"]["p"].as_f64().unwrap(), s["state"]["q"].as_f64().unwrap()))
        .collect()
}

#[test]
fn validate_example_passes() {
    let out = run(&["validate", "--params", EXAMPLE]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("overall: pass"));
}

#[test]
fn validate_names_the_failed_check() {
    let dir = TempDir::new().unwrap();
    let path = params_file(dir.path(), "cheap.json", &[("c_HS", 0.3.into())]);
    let out = run(&["validate", "--params", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    let failed: Vec<&str> = text.lines().filter(|l| l.starts_with("FAIL")).collect();
    assert_eq!(failed.len(), 1, "{text}");
    assert!(failed[0].contains("Eq5"));

    let out = run(&["validate", "--params", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    assert_eq!(doc["result"]["overall"], false);
    let eq5 = doc["result"]["checks"].as_array().unwrap().iter().find(|c| c["name"] == "Eq5").unwrap();
    assert_eq!(eq5["passed"], false);
}

#[test]
fn malformed_input_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("broken.json");
    fs::write(&path, "{\"I_HS\": 1.0,").unwrap();
    let out = run(&["validate", "--params", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("malformed"));

    let path = params_file(dir.path(), "typo.json", &[("beta", "x".into())]);
    let out = run(&["equilibria", "--params", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("beta"));

    let out = run(&["validate", "--params", dir.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["simulate", "--params", EXAMPLE, "--q0", "0.5"]);
    assert_eq!(out.status.code(), Some(2), "open simulation needs --p0");
    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_key_is_named() {
    let dir = TempDir::new().unwrap();
    let mut doc: Value = serde_json::from_str(&fs::read_to_string(EXAMPLE).unwrap()).unwrap();
    doc.as_object_mut().unwrap().remove("beta");
    let path = dir.path().join("nobeta.json");
    fs::write(&path, doc.to_string()).unwrap();
    let out = run(&["welfare", "--params", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`beta`"));
}

#[test]
fn equilibria_of_the_example() {
    let out = run(&["equilibria", "--params", EXAMPLE]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = json(&out);
    let keys: Vec<&String> = doc.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["manifest", "result"]);
    let th = &doc["result"]["thresholds"];
    assert!((th["a_star"].as_f64().unwrap() - 263.0 / 2200.0).abs() < 1e-12);
    assert!((th["a_star2"].as_f64().unwrap() + 86.0 / 1425.0).abs() < 1e-12);

    let stable = stable_states(&doc["result"]);
    assert_eq!(stable.len(), 2);
    assert!(stable.iter().any(|&(p, q)| p == 0.0 && (q - 0.4).abs() < 1e-12));
    assert!(stable.iter().any(|&(p, q)| p == 1.0 && (q - 22.0 / 57.0).abs() < 1e-12));

    let saddle = doc["result"]["steady_states"]
        .as_array()
        .unwrap()
        .iter()
        .find(|s| s["case_label"].as_str().unwrap().starts_with('I') && s["in_domain"] == true)
        .unwrap();
    assert_eq!(saddle["stability"], "unstable");
    assert!((saddle["state"]["p"].as_f64().unwrap() - 0.6517).abs() < 1e-4);
    assert!((saddle["state"]["q"].as_f64().unwrap() - 0.3904).abs() < 1e-4);
}

#[test]
fn closed_equilibria() {
    let out = run(&["equilibria", "--params", CLOSED_EXAMPLE, "--closed"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = json(&out);
    let states = doc["result"]["steady_states"].as_array().unwrap();
    let by_q: Vec<(f64, &str)> = states
        .iter()
        .map(|s| (s["state"]["q"].as_f64().unwrap(), s["stability"].as_str().unwrap()))
        .collect();
    assert_eq!(by_q.len(), 3);
    assert_eq!(by_q[0], (0.0, "unstable"));
    assert_eq!(by_q[1], (1.0, "unstable"));
    assert!((by_q[2].0 - 0.4).abs() < 1e-12 && by_q[2].1 == "stable");
}

#[test]
fn invalid_parameters_are_refused_unless_forced() {
    let dir = TempDir::new().unwrap();
    let path = params_file(dir.path(), "strong.json", &[("I_E", 0.4.into())]);
    let path = path.to_str().unwrap();
    for cmd in ["equilibria", "welfare"] {
        let out = run(&[cmd, "--params", path]);
        assert_eq!(out.status.code(), Some(1), "{cmd}");
        assert!(stdout(&out).is_empty());
        let err = stderr(&out);
        assert!(err.contains("FAIL Eq8"), "{err}");
    }
    let out = run(&["equilibria", "--params", path, "--force"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(json(&out)["manifest"]["forced"], true);
    assert!(stderr(&out).contains("Eq8"));

    let out = run(&["equilibria", "--params", EXAMPLE, "--force"]);
    assert_eq!(json(&out)["manifest"]["forced"], false, "valid input is never marked forced");
}

#[test]
fn simulate_writes_csv_with_manifest() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("traj.csv");
    let out = run(&[
        "simulate", "--params", EXAMPLE, "--p0", "0.9", "--q0", "0.4", "--format", "csv", "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("converged to case H"));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,p,q\n0.0,0.90000000000000002,0.40000000000000002\n"));
    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("traj.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "simulate");
    assert_eq!(manifest["parameters"]["c_A"], 0.2);
    assert_eq!(manifest["timestamp"], 1_700_000_000u64);
}

#[test]
fn simulate_json_reports_attribution() {
    let out = run(&["simulate", "--params", EXAMPLE, "--p0", "0.05", "--q0", "0.4", "--stride", "1000"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc = json(&out);
    assert_eq!(doc["result"]["converged_to"]["case_label"], "G");
    assert!(stderr(&out).contains("converged to case G"));

    let out = run(&["simulate", "--params", CLOSED_EXAMPLE, "--closed", "--q0", "0.9"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let q = json(&out)["result"]["terminal"].as_f64().unwrap();
    assert!((q - 0.4).abs() < 1e-6);

    let out = run(&["simulate", "--params", EXAMPLE, "--p0", "1.5", "--q0", "0.4"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["simulate", "--params", EXAMPLE, "--p0", "0.5", "--q0", "0.4", "--dt", "-1"]);
    assert_eq!(out.status.code(), Some(1));
}

fn sweep_rows(args: &[&str]) -> Vec<(f64, String)> {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    json(&out)["result"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["allowance"].as_f64().unwrap(), r["regime"].as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn sweep_switches_regime_at_the_threshold() {
    let rows = sweep_rows(&["sweep", "--params", EXAMPLE, "--A-from", "0", "--A-to", "0.19", "--steps", "20"]);
    assert_eq!(rows.len(), 20);
    for (a, regime) in &rows {
        let expected = if *a < 263.0 / 2200.0 { "bistable" } else { "only-full-assim" };
        assert_eq!(regime, expected, "A = {a}");
    }

    let rows = sweep_rows(&["sweep", "--params", EXAMPLE, "--A-from", "0.125", "--A-to", "0.195", "--steps", "8"]);
    assert!(rows.iter().all(|(_, r)| r == "only-full-assim"));

    let rows = sweep_rows(&["sweep", "--params", EXAMPLE, "--A-from", "0.05", "--A-to", "0.19", "--steps", "1"]);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].0, 0.05);

    let out = run(&["sweep", "--params", EXAMPLE, "--A-from", "0", "--A-to", "0.3", "--steps", "4"]);
    assert_eq!(out.status.code(), Some(1), "allowances at or above c_A are inadmissible");
}

#[test]
fn sweep_csv() {
    let out = run(&["sweep", "--params", EXAMPLE, "--A-from", "0", "--A-to", "0.19", "--steps", "20", "--format", "csv"]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("A,no_assimilation_stable,full_assimilation_stable,regime"));
    assert_eq!(lines.next(), Some("0.0,true,true,bistable"));
    assert_eq!(lines.last(), Some("0.19000000000000000,false,true,only-full-assim"));
}

#[test]
fn welfare_verdict() {
    let out = run(&["welfare", "--params", EXAMPLE]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = &json(&out)["result"];
    assert_eq!(r["status"], "evaluated");
    assert!((r["ca_threshold_rhs"].as_f64().unwrap() - 0.22782).abs() < 1e-5);
    assert_eq!(r["natives_better_off"], true);
    assert_eq!(r["migrants_better_off"], true);
    assert_eq!(r["cost_condition_holds"], true);
}

#[test]
fn basins_csv() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("basins.csv");
    let out = run(&[
        "basins", "--params", EXAMPLE, "--resolution", "5", "--format", "csv", "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 26);
    assert!(text.starts_with("i,j,p,q,label\n0,0,0.10000000000000001,0.10000000000000001,"));
    assert!(text.contains(",G\n") && text.contains(",H\n"));
    assert!(dir.path().join("basins.csv.manifest.json").exists());
}

#[test]
fn phase_writes_plot_data() {
    let dir = TempDir::new().unwrap();
    let starts = dir.path().join("starts.csv");
    fs::write(&starts, "p0,q0\n0.05,0.4\n0.9,0.4\n").unwrap();
    let out_dir = dir.path().join("phase");
    let out = run(&[
        "phase", "--params", EXAMPLE, "--resolution", "11", "--trajectories", starts.to_str().unwrap(),
        "--out-dir", out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let field = fs::read_to_string(out_dir.join("field.csv")).unwrap();
    assert_eq!(field.lines().count(), 1 + 121);
    assert!(field.starts_with("p,q,dp,dq\n"));
    let traj = fs::read_to_string(out_dir.join("trajectories.csv")).unwrap();
    assert!(traj.starts_with("id,t,p,q\n0,0.0,"));
    assert!(traj.lines().any(|l| l.starts_with("1,")));
    assert!(out_dir.join("manifest.json").exists());
    let states: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("steady_states.json")).unwrap()).unwrap();
    assert!(states["result"].as_array().unwrap().len() >= 8);

    fs::write(&starts, "q0\n0.5\n").unwrap();
    let out = run(&[
        "phase", "--params", EXAMPLE, "--trajectories", starts.to_str().unwrap(), "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "open phase portrait needs p0");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    for args in [
        &["equilibria", "--params", EXAMPLE][..],
        &["welfare", "--params", EXAMPLE],
        &["sample", "--seed", "7", "--count", "3"],
        &["basins", "--params", EXAMPLE, "--resolution", "4"],
    ] {
        let (a, b) = (run(args), run(args));
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn sampling_depends_on_the_seed() {
    let default = run(&["sample", "--count", "2"]);
    let zero = run(&["sample", "--seed", "0", "--count", "2"]);
    let other = run(&["sample", "--seed", "1", "--count", "2"]);
    assert_eq!(default.stdout, zero.stdout);
    assert_ne!(zero.stdout, other.stdout);
    let doc = json(&other);
    assert_eq!(doc["manifest"]["seed"], 1);
    assert_eq!(doc["result"].as_array().unwrap().len(), 2);
}

#[test]
fn numbers_use_seventeen_significant_digits() {
    let out = run(&["welfare", "--params", EXAMPLE]);
    let text = stdout(&out);
    assert!(text.contains("\"c_A\": 0.20000000000000001"));
    assert!(text.contains("\"q_star2\": 0.38596491228070184"));
}
