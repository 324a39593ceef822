use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn randecho(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randecho")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path
}

fn run_in(dir: &TempDir, verb: &str, config: &str, extra: &[&str]) -> (Output, PathBuf) {
    let cfg = write_config(dir.path(), config);
    let out = dir.path().join("out");
    let mut args = vec![verb, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (randecho(&args), out)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn identity_estimate_is_exact() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"protocol": "motion_reversal", "dim": 4, "channel": {"type": "depolarizing", "p": 1.0}, "n_unitaries": 20}"#;
    let (o, out) = run_in(&dir, "estimate", cfg, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let est = json(&out.join("estimate.json"));
    assert!((est["f_hat"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((est["p_hat"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(est["manifest"], "manifest.json");
}

#[test]
fn dephasing_estimate_matches_closed_form() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"dim": 2, "channel": {"type": "dephasing", "q": 0.25}, "n_unitaries": 4000, "seed": 5}"#;
    let (o, out) = run_in(&dir, "estimate", cfg, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let est = json(&out.join("estimate.json"));
    let exact = est["analytic"]["average_gate_fidelity"].as_f64().unwrap();
    assert!((exact - 5.0 / 6.0).abs() < 1e-12);
    let f = est["f_hat"].as_f64().unwrap();
    let se = est["stderr"].as_f64().unwrap();
    assert!((f - 5.0 / 6.0).abs() <= 3.0 * se, "{f} ± {se}");
}

#[test]
fn missing_dim_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"protocol": "motion_reversal", "channel": {"type": "depolarizing", "p": 0.9}}"#;
    let (o, out) = run_in(&dir, "estimate", cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("dim"), "{}", stderr(&o));
    assert!(!out.join("estimate.json").exists());
}

#[test]
fn malformed_json_reports_position() {
    let dir = TempDir::new().unwrap();
    let (o, _) = run_in(&dir, "estimate", "{\"dim\": 2,\n \"channel\": }", &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn bad_field_names_its_path() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"dim": 2, "channel": {"type": "depolarizing", "p": "high"}}"#;
    let (o, _) = run_in(&dir, "estimate", cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("`channel`") && msg.contains("\"high\""), "{msg}");
}

#[test]
fn verb_and_protocol_must_agree() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"protocol": "echo", "dim": 2, "channel": {"type": "depolarizing", "p": 0.9}}"#;
    let (o, _) = run_in(&dir, "decay", cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn echo_fit_recovers_depolarizing_strength() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"protocol": "echo", "dim": 4, "channel": {"type": "depolarizing", "p": 0.9}, "n_unitaries": 30, "seed": 2}"#;
    let (o, out) = run_in(&dir, "echo", cfg, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let fit = json(&out.join("fit.json"));
    let p = fit["fit"]["p_hat"].as_f64().unwrap();
    let se = fit["fit"]["stderr"].as_f64().unwrap();
    assert!((p - 0.9).abs() <= 3.0 * se + 1e-9, "{p} ± {se}");
    let csv = fs::read_to_string(out.join("curve.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("n_or_t,mean,stderr,trials"));
    assert_eq!(csv.lines().count(), 22);
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["outputs"], serde_json::json!(["curve.csv", "fit.json"]));
    assert_eq!(manifest["config"]["n_max"], 20);
}

#[test]
fn identity_echo_has_no_signal() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"dim": 4, "channel": {"type": "depolarizing", "p": 1.0}, "n_unitaries": 5, "n_max": 8}"#;
    let (o, out) = run_in(&dir, "echo", cfg, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("insufficient signal"));
    let csv = fs::read_to_string(out.join("curve.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let mean: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((mean - 1.0).abs() < 1e-12, "{line}");
    }
    let fit = json(&out.join("fit.json"));
    assert!(fit["fit"].is_null());
    assert!(fit["fit_error"].as_str().unwrap().contains("insufficient signal"));
    assert!(out.join("manifest.json").exists());
}

#[test]
fn overrides_and_seed_flag_apply() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{"dim": 2, "channel": {"type": "depolarizing", "p": 0.9}, "n_unitaries": 10, "n_max": 3}"#;
    let (o, out) = run_in(&dir, "decay", cfg, &["--set", "channel.p=0.5", "--set", "n_max=4", "--seed", "77"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["config"]["channel"]["p"], 0.5);
    assert_eq!(manifest["config"]["n_max"], 4);
    assert_eq!(manifest["master_seed"], 77);
    let fit = json(&out.join("fit.json"));
    assert!((fit["fit"]["p_hat"].as_f64().unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn lindblad_curve_tracks_prediction() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{
        "dim": 2,
        "channel": {"type": "lindblad", "jumps": [[[[0, 0], [0.5477225575051661, 0]], [[0, 0], [0, 0]]]], "epsilon": 0.01},
        "n_unitaries": 8,
        "lindblad": {"t_max": 400, "samples": 21, "control_scale": 4}
    }"#;
    let (o, out) = run_in(&dir, "lindblad", cfg, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let fit = json(&out.join("fit.json"));
    assert!((fit["prediction"]["gamma"].as_f64().unwrap() - 0.002).abs() < 1e-12);
    assert!(fit["prediction"]["max_abs_deviation"].as_f64().unwrap() <= 0.02);
}

#[test]
fn verify_invariants_passes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("v");
    let o = randecho(&["verify", "invariants", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report = json(&out.join("report.json"));
    assert_eq!(report["passed"], true);
    let drift = report["checks"].as_array().unwrap().iter().find(|c| c["name"] == "invariant_drift").unwrap();
    assert!(drift["value"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn verify_parameters_accept_overrides() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("v");
    let o = randecho(&["verify", "invariants", "--set", "dims=[2]", "--set", "unitaries=2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(json(&out.join("report.json"))["parameters"]["dims"], serde_json::json!([2]));
    let o = randecho(&["verify", "invariants", "--set", "bogus=1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let o = randecho(&["verify", "everything"]);
    assert_eq!(o.status.code(), Some(2));
}
