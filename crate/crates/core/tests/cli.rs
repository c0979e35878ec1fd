use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const FLIP: &str = r#"{"probs":[0.5,0.5],"states":[{"dim":2,"re":[[0.9,0],[0,0.1]]},{"dim":2,"re":[[0.1,0],[0,0.9]]}]}"#;
const STATE: &str = r#"{"dim":2,"re":[[0.75,0],[0,0.25]]}"#;

fn mixcomp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixcomp")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn fidelity_of_identical_files_is_one() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "a.json", STATE);
    let b = write(dir.path(), "b.json", STATE);
    let v = json(&mixcomp(&["fidelity", a.to_str().unwrap(), b.to_str().unwrap()]));
    assert_eq!(v["fidelity"], 1.0);
}

#[test]
fn entropy_and_holevo() {
    let dir = TempDir::new().unwrap();
    let s = write(dir.path(), "s.json", r#"{"dim":2,"re":[[0.5,0],[0,0.5]]}"#);
    assert_eq!(json(&mixcomp(&["entropy", s.to_str().unwrap()]))["entropy"], 1.0);
    let e = write(dir.path(), "e.json", FLIP);
    let v = json(&mixcomp(&["holevo", "--ensemble", e.to_str().unwrap()]));
    let chi = v["holevo"].as_f64().unwrap();
    assert!((chi - 0.531004406410719).abs() < 1e-9);
}

#[test]
fn rates_report_in_both_formats() {
    let dir = TempDir::new().unwrap();
    let e = write(dir.path(), "e.json", FLIP);
    let v = json(&mixcomp(&["rates", "report", "--ensemble", e.to_str().unwrap()]));
    let names: Vec<&str> = v["entries"].as_array().unwrap().iter().map(|x| x["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["S_rho_bar", "H_p", "Xi", "Upsilon", "chi"]);
    assert_eq!(v["qmin_bracket"][1], 1.0);
    let csv = stdout(&mixcomp(&["rates", "report", "--ensemble", e.to_str().unwrap(), "--csv"]));
    assert!(csv.starts_with("name,rate,kind,description\n"));
    assert!(csv.contains("Xi,1.52192809489,scheme_rate,"));
}

#[test]
fn purify_report_fields() {
    let v = json(&mixcomp(&["purify", "report", "--d", "3"]));
    assert_eq!(v["d"], 3);
    assert!((v["q"].as_f64().unwrap() - 1.2516291673878228).abs() < 1e-9);
    assert!((v["chi"].as_f64().unwrap() - 1.5f64.log2()).abs() < 1e-12);
    let many = json(&mixcomp(&["purify", "report", "--d", "3", "--d-max", "6"]));
    assert_eq!(many.as_array().unwrap().len(), 4);
}

#[test]
fn classical_compare_grid_csv() {
    let csv = stdout(&mixcomp(&["classical", "compare", "--grid"]));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "epsilon_or_params,S_rho_bar,H_p,Xi,Upsilon,chi,conjectured_MI");
    assert_eq!(lines.len(), 52);
    assert_eq!(lines[1], "0,1,1,1,1,1,1");
    assert!(lines[26].starts_with("0.25,1,1,1.5,0.354578902665,"));
}

#[test]
fn classical_simulate_is_reproducible() {
    let args = ["classical", "simulate", "--n", "20000", "--seed", "11"];
    let a = stdout(&mixcomp(&args));
    assert_eq!(a, stdout(&mixcomp(&args)));
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["summary"]["seed"], 11);
    assert_eq!(v["summary"]["n"], 20000);
}

#[test]
fn blocksim_run_json() {
    let dir = TempDir::new().unwrap();
    let e = write(dir.path(), "e.json", FLIP);
    let v = json(&mixcomp(&["blocksim", "run", "--ensemble", e.to_str().unwrap(), "--N", "6", "--rate", "0.7"]));
    for key in ["rate", "N", "global_fid", "local_fid", "ceiling", "eta"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["method"], "diagonal_exact");
    let eta = v["eta"].as_f64().unwrap();
    assert!((v["ceiling"].as_f64().unwrap() - (1.0 - eta)).abs() < 1e-12);
    let g = v["global_fid"].as_f64().unwrap();
    assert!(g >= 1.0 - 2.0 * eta - 1e-12 && g <= 1.0);
}

#[test]
fn blocksim_monte_carlo_depends_only_on_seed() {
    let dir = TempDir::new().unwrap();
    let e = write(dir.path(), "e.json", FLIP);
    let run = |workers: &str| {
        stdout(&mixcomp(&[
            "blocksim", "run", "--ensemble", e.to_str().unwrap(), "--N", "5", "--rate", "0.6", "--mode", "mc",
            "--samples", "300", "--seed", "5", "--workers", workers,
        ]))
    };
    let one = run("1");
    assert_eq!(one, run("4"));
    let v: Value = serde_json::from_str(&one).unwrap();
    assert_eq!(v["method"], "monte_carlo");
    assert!(v["global_std_error"].as_f64().unwrap() > 0.0);
}

#[test]
fn threshold_csv_records_seed() {
    let dir = TempDir::new().unwrap();
    let e = write(dir.path(), "e.json", FLIP);
    let out = dir.path().join("t.csv");
    let status = mixcomp(&["blocksim", "threshold", "--ensemble", e.to_str().unwrap(), "--n-list", "2,4", "--out", out.to_str().unwrap()]);
    assert!(status.status.success());
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("# seed=0\nN,"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn selftest_reports_counts() {
    let v = json(&mixcomp(&["selftest", "--cases", "10"]));
    assert_eq!(v["failed"], 0);
    assert!(v["passed"].as_u64().unwrap() > 100);
}

fn error_of(out: &Output) -> Value {
    assert!(!out.status.success());
    serde_json::from_slice(&out.stderr).unwrap()
}

#[test]
fn validation_errors_are_structured() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"dim":2,"re":[[1.2,0],[0,-0.2]]}"#);
    let out = mixcomp(&["entropy", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_of(&out)["error"], "NotPSD");

    let garbled = write(dir.path(), "g.json", "{ nope");
    let out = mixcomp(&["entropy", garbled.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["error"], "ParseError");

    let e = write(dir.path(), "e.json", FLIP);
    let out = mixcomp(&["blocksim", "run", "--ensemble", e.to_str().unwrap(), "--N", "13", "--rate", "1"]);
    let err = error_of(&out);
    assert_eq!(err["error"], "DimensionOverflow");
    assert!(err["message"].as_str().unwrap().contains("4096"));

    let out = mixcomp(&["blocksim", "run", "--ensemble", e.to_str().unwrap(), "--N", "13", "--rate", "1", "--dim-cap", "8192"]);
    assert!(out.status.success());

    assert_eq!(error_of(&mixcomp(&["no-such-command"]))["error"], "ParseError");
    assert_eq!(error_of(&mixcomp(&["classical", "compare", "--alpha1", "1.5"]))["error"], "DomainError");
}
