use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nframes"))
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn machine(cmd: &str, cfg: &Path, extra: &[&str]) -> (i32, Value, String) {
    let out = bin()
        .args([cmd, "--config", cfg.to_str().unwrap(), "--format", "machine"])
        .args(extra)
        .output()
        .unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    let doc = serde_json::from_str(&stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), doc, String::from_utf8(out.stderr).unwrap())
}

const ZERO: &str = r#"
gamma = [["0", "0"]]
[bundle]
n = 2
r = 1
[domain]
lo = [-1.0, -1.0, -1.0]
hi = [1.0, 1.0, 1.0]
"#;

#[test]
fn flatness_of_zero_connection() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "zero.toml", ZERO);
    let (code, doc, _) = machine("flatness", &cfg, &[]);
    assert_eq!(code, 0);
    assert_eq!(doc["status"], "pass");
    assert_eq!(doc["residuals"]["curvature.max_abs"], 0.0);
    assert_eq!(doc["timing_ms"], Value::Null);
}

#[test]
fn twisted_map_is_obstructed() {
    let (code, doc, _) = machine("normal-map", &configs().join("twisted.toml"), &[]);
    assert_eq!(code, 1);
    assert_eq!(doc["status"], "obstructed");
    let r = doc["residuals"]["maps[0].integrability.curvature"].as_f64().unwrap();
    assert!((r - 1.0).abs() < 1e-9);
}

#[test]
fn missing_gamma_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", &ZERO.replace("gamma = [[\"0\", \"0\"]]", ""));
    let (code, doc, stderr) = machine("curvature", &cfg, &[]);
    assert_eq!(code, 2);
    assert_eq!(doc["status"], "input-error");
    assert_eq!(doc["constructed"]["field"], "gamma");
    assert!(stderr.contains("gamma"), "{stderr}");
}

#[test]
fn short_gamma_row_names_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", &ZERO.replace("[\"0\", \"0\"]", "[\"0\"]"));
    let (code, doc, _) = machine("curvature", &cfg, &[]);
    assert_eq!(code, 2);
    assert_eq!(doc["constructed"]["field"], "gamma[0]");
}

#[test]
fn toml_syntax_error_has_a_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[bundle\nn = 1\n");
    let (code, doc, _) = machine("curvature", &cfg, &[]);
    assert_eq!(code, 2);
    assert!(doc["constructed"]["message"].as_str().unwrap().contains("line 1"));
}

#[test]
fn unknown_command_and_bad_flags_exit_2() {
    let out = bin().args(["bogus", "--config", "x.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let cfg = configs().join("twisted.toml");
    let out = bin().args(["curvature", "--config", cfg.to_str().unwrap(), "--tol", "-1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_config_file_exit_2() {
    let (code, doc, _) = machine("curvature", Path::new("/nonexistent/cfg.toml"), &[]);
    assert_eq!(code, 2);
    assert_eq!(doc["constructed"]["field"], "--config");
}

#[test]
fn curvature_reports_component() {
    let (code, doc, _) = machine("curvature", &configs().join("twisted.toml"), &[]);
    assert_eq!(code, 0);
    let comp = &doc["constructed"]["components"][0];
    assert_eq!((comp["a"].as_u64(), comp["mu"].as_u64(), comp["nu"].as_u64()), (Some(3), Some(1), Some(2)));
    assert_eq!(comp["value"], 1.0);
}

#[test]
fn lift_around_circle_measures_enclosed_area() {
    let (code, doc, _) = machine("lift", &configs().join("twisted.toml"), &["--step", "1e-3"]);
    assert_eq!(code, 0);
    let d = doc["residuals"]["holonomy.defect"].as_f64().unwrap();
    assert!((d - std::f64::consts::FRAC_PI_4).abs() < 1e-9, "{d}");
}

#[test]
fn vb_normal_requires_three_index_section() {
    let (code, doc, _) = machine("vb-normal", &configs().join("twisted.toml"), &[]);
    assert_eq!(code, 2);
    assert_eq!(doc["constructed"]["field"], "gamma3");
}

#[test]
fn verify_rejects_tampered_change() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("linear_flat.toml");
    let (code, mut doc, _) = machine("normal-point", &cfg, &[]);
    assert_eq!(code, 0);
    doc["constructed"]["change"][2] = Value::String("u3".into());
    let report = write(dir.path(), "r.json", &doc.to_string());
    let (code, v, _) = machine("verify", &cfg, &["--report", report.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert_eq!(v["status"], "fail");
}

#[test]
fn verify_without_report_is_input_error() {
    let (code, doc, _) = machine("verify", &configs().join("twisted.toml"), &[]);
    assert_eq!(code, 2);
    assert_eq!(doc["constructed"]["field"], "--report");
}

#[test]
fn seed_changes_samples_not_structure() {
    let cfg = configs().join("twisted.toml");
    let (_, a, _) = machine("flatness", &cfg, &["--seed", "1"]);
    let (_, b, _) = machine("flatness", &cfg, &["--seed", "1"]);
    assert_eq!(a, b);
    let (_, c, _) = machine("flatness", &cfg, &["--seed", "2"]);
    assert_eq!(a["constructed"]["samples"], c["constructed"]["samples"]);
}

#[test]
fn text_output_lists_residuals() {
    let cfg = configs().join("twisted.toml");
    let out = bin().args(["flatness", "--config", cfg.to_str().unwrap()]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("command: flatness\nstatus: fail\n"), "{text}");
    assert!(text.contains("curvature.max_abs = 1.000000e0"));
}
