use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn liouville(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_liouville"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn spectrum_artifact_lists_the_chain() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let res = liouville(&["spectrum", "--a", "0.5", "--k-range", "2"], &out);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let v = read_json(&out.join("spectrum.json"));
    assert_eq!(v["config"]["command"], "spectrum");
    assert_eq!(v["config"]["a"], 0.5);
    let eigs = v["eigenvalues"].as_array().unwrap();
    assert_eq!(eigs.len(), 9);
    let values: Vec<f64> = eigs.iter().map(|e| e["lambda"].as_f64().unwrap()).collect();
    assert!(values.windows(2).all(|w| w[0] < w[1]));
    let l0 = eigs.iter().find(|e| e["problem"] == "P3" && e["k"] == 0).unwrap();
    assert!((l0["lambda"].as_f64().unwrap() + 0.5).abs() < 1e-9);
    assert!(v["interlacing"]["violations"].as_array().unwrap().is_empty());
}

#[test]
fn invalid_modulus_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let res = liouville(&["spectrum", "--a", "1.2"], &out);
    assert_eq!(res.status.code(), Some(2));
    assert!(!out.exists());
    let res = liouville(&["contours", "--a", "0.5"], &out);
    assert_eq!(res.status.code(), Some(2), "contours without an accessory parameter");
    let res = liouville(&["bogus"], &out);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn unreachable_cutoff_tolerance_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let res = liouville(&["action", "--a", "0.5", "--eps", "1e-2,1e-4", "--tol", "1e-12"], &out);
    assert_eq!(res.status.code(), Some(3));
    let diag = read_json(&out.join("diagnostic.json"));
    assert_eq!(diag["status"], "numerical-failure");
    assert_eq!(diag["config"]["tol"], 1e-12);
    assert!(diag["error"].as_str().unwrap().contains("spread"));
    assert!(!out.join("action.json").exists());
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let res = liouville(&["spectrum", "--a", "0.5", "--k-range", "1"], &blocker.join("run"));
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"command": "monodromy", "a": 0.3, "problem": "p3", "k": 0}"#).unwrap();
    let res = liouville(&["--config", cfg.to_str().unwrap(), "--a", "0.5"], &out);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let v = read_json(&out.join("monodromy.json"));
    assert_eq!(v["config"]["a"], 0.5);
    assert!((v["eigenvalue"]["lambda"].as_f64().unwrap() + 0.5).abs() < 1e-9);
    let m = &v["monodromy"];
    assert!(m["realness_defect"].as_f64().unwrap() < 1e-6);
    assert!(m["product_defect"].as_f64().unwrap() < 1e-8);
    assert_eq!(m["generators"].as_array().unwrap().len(), 4);
    assert!(m["real_generators"].is_array());
}

#[test]
fn field_and_contour_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let res = liouville(&["field", "--a", "0.5", "--lambda", "-0.5", "--grid", "40", "30"], &out);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = fs::read_to_string(out.join("field.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# config "));
    assert_eq!(lines.next().unwrap(), "x,y,chi,phi");
    assert_eq!(lines.count(), 40 * 30);
    let field = read_json(&out.join("field.json"));
    assert!(field["residuals"]["chi_ode"].as_f64().unwrap() < 1e-10);

    let res = liouville(&["contours", "--a", "0.5", "--problem", "p1", "--k", "1", "--grid", "200", "200"], &out);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let svg = fs::read_to_string(out.join("contours.svg")).unwrap();
    assert_eq!(svg.matches("class=\"contour\"").count(), 1);
    let c = read_json(&out.join("contours.json"));
    assert_eq!(c["classification"]["contour_count"], 1);
    assert!(c["classification_error"].is_null());
}
