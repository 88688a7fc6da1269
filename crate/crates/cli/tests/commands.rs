use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn sharpkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sharpkit"))
        .args(args)
        .env_remove("SHARPKIT_TOL")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.push("--json");
    let out = sharpkit(&all);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn path(name: &str) -> String {
    data(name).to_string_lossy().into_owned()
}

#[test]
fn validate_reports_invalid_files() {
    assert_eq!(sharpkit(&["validate", &path("qubit_basis.json")]).status.code(), Some(0));
    let bad = sharpkit(&["validate", &path("not_complete.json")]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("sum to the identity"));
    assert_eq!(sharpkit(&["validate", &path("missing.json")]).status.code(), Some(1));
}

#[test]
fn qubit_basis_is_sharp() {
    let c = json(&["classify", &path("qubit_basis.json")]);
    assert_eq!(c["sharp"], true);
    assert_eq!(c["trivial"], false);
    assert_eq!(c["unit_eigenvectors"].as_array().unwrap().len(), 2);
}

#[test]
fn sharp_basis_converts_to_the_noisy_basis() {
    let v = json(&["compare", &path("qubit_basis.json"), &path("noisy_basis_half.json")]);
    assert_eq!(v["status"], "convertible");
    assert!(v["residual"].as_f64().unwrap() < 1e-7);
    let mu = v["transformation"]["mu"].as_f64().unwrap();
    assert!((0.5 - 1e-6..=1.0 + 1e-9).contains(&mu), "mu = {mu}");

    let back = json(&["compare", &path("noisy_basis_half.json"), &path("qubit_basis.json")]);
    assert_eq!(back["status"], "not_convertible");
    assert!(back["witness"]["margin"].as_f64().unwrap() >= 1e-8);
    assert_eq!(back["witness"]["reference"]["elements"].as_array().unwrap().len(), 2);
}

#[test]
fn guessing_the_noisy_basis() {
    let g = json(&["guess", &path("noisy_basis_half.json")]);
    assert!((g["value"].as_f64().unwrap() - 0.75).abs() < 1e-6);
    assert!((g["certificate_trace"].as_f64().unwrap() / 2.0 - 0.75).abs() < 1e-6);
}

#[test]
fn correlation_and_tuning() {
    let p = path("noisy_basis_half.json");
    let z = path("qubit_basis.json");
    assert!((json(&["corr", &p, &z, "--uniform"])["value"].as_f64().unwrap() - 0.75).abs() < 1e-12);
    let state = json(&["corr", &p, &z, "--state", &path("plus_state.json")]);
    assert_eq!(state["kind"], "value");
    let t = json(&["tune", &p, &z]);
    assert!((t["value"].as_f64().unwrap() - 0.75).abs() < 1e-6);
    assert!(t["optimizer"]["mu"].is_number());
}

#[test]
fn robustness_interval_for_the_noisy_basis() {
    let r = json(&["robustness", &path("noisy_basis_half.json"), "--refs", "1", "--seed", "2"]);
    assert!((r["lower"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    assert!((r["upper"].as_f64().unwrap() - 0.5).abs() < 1e-6);
    assert!(r["lower_method"].is_string() && r["upper_method"].is_string());
}

#[test]
fn random_files_round_trip() {
    let dir = std::env::temp_dir().join(format!("sharpkit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("random.json");
    let f = file.to_string_lossy().into_owned();
    let out = sharpkit(&["random", "--dim", "3", "--outcomes", "4", "--seed", "9", "-o", &f]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&["validate", &f]);
    assert_eq!((v["dim"].as_u64(), v["outcomes"].as_u64()), (Some(3), Some(4)));
    let again = sharpkit(&["random", "--dim", "3", "--outcomes", "4", "--seed", "9"]);
    assert_eq!(std::fs::read(&file).unwrap(), again.stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn reports_are_reproducible() {
    let args = ["verify", "--suite", "corollary_bounds", "--trials", "3", "--seed", "5", "--json"];
    let a = sharpkit(&args);
    let b = sharpkit(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let report: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["suite"], "corollary_bounds");
}

#[test]
fn exit_codes() {
    assert_eq!(sharpkit(&["verify", "--suite", "nope"]).status.code(), Some(1));
    assert_eq!(sharpkit(&["random", "--dim", "0", "--outcomes", "2"]).status.code(), Some(1));
    let capped = Command::new(env!("CARGO_BIN_EXE_sharpkit"))
        .args(["guess", &path("noisy_basis_half.json")])
        .env("SHARPKIT_TOL", "max_iter=2")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(2));
    let bad_tol = Command::new(env!("CARGO_BIN_EXE_sharpkit"))
        .args(["guess", &path("noisy_basis_half.json")])
        .env("SHARPKIT_TOL", "bogus=1")
        .output()
        .unwrap();
    assert_eq!(bad_tol.status.code(), Some(1));
}

#[test]
fn json_errors_are_json() {
    let out = sharpkit(&["classify", &path("not_complete.json"), "--json"]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["error"].as_str().unwrap().contains("identity"));
}
