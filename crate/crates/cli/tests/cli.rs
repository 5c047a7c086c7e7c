use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn combmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_combmap")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn solve_single_slit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.json", r#"{"u": [0], "h": [1]}"#);
    let o = combmap(&["solve", &cfg]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let l = v["report"]["l"][0].as_f64().unwrap();
    assert!((l - 2.0).abs() < 1e-8, "{l}");
    assert!((v["report"]["Q0"].as_f64().unwrap() - 0.5).abs() < 1e-8);

    let o = combmap(&["solve", &cfg, "--csv"]);
    let text = stdout(&o);
    let mut rows = text.lines();
    assert_eq!(rows.next(), Some("n,u,h,l,A,J,mu+,mu-,nu,L,e,d"));
    let l: f64 = rows.next().unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!((l - 2.0).abs() < 1e-8);
}

#[test]
fn gaps_round_trip_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"u": [0, 1.5], "h": [1, 0.6]}"#);
    let out = dir.path().join("g.json");
    let o = combmap(&["solve", &cfg, "--gaps-only", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let o = combmap(&["gaps", out.to_str().unwrap(), "--csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let h: Vec<f64> = stdout(&o).lines().skip(1).map(|r| r.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!((h[0] - 1.0).abs() < 1e-8 && (h[1] - 0.6).abs() < 1e-8, "{h:?}");
    let pairs = write(dir.path(), "p.json", "[[-1, 1]]");
    assert_eq!(code(&combmap(&["gaps", &pairs])), 0);
    let overlap = write(dir.path(), "o.json", "[[0, 2], [1, 3]]");
    assert_eq!(code(&combmap(&["gaps", &overlap])), 2);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"u": [0, 1], "h": [1,"#);
    let o = combmap(&["solve", &bad]);
    assert_eq!(code(&o), 2);
    assert!(!o.stderr.is_empty());
    let unsorted = write(dir.path(), "u.json", r#"{"u": [1, 0], "h": [1, 1]}"#);
    assert_eq!(code(&combmap(&["solve", &unsorted])), 2);
    let unknown = write(dir.path(), "k.json", r#"{"u": [0], "h": [1], "x": 3}"#);
    assert_eq!(code(&combmap(&["solve", &unknown])), 2);
    assert_eq!(code(&combmap(&["solve", "/nonexistent/c.json"])), 2);
    assert_eq!(code(&combmap(&["example", "--id", "9"])), 2);
    assert_eq!(code(&combmap(&["frobnicate"])), 2);
}

#[test]
fn capacity_command() {
    let o = combmap(&["capacity", "--intervals", "0,1", "--json"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["capacity"].as_f64(), Some(0.25));
    assert!((v["ahlforsDerivative"].as_f64().unwrap() - 0.25).abs() < 1e-8);
    assert!(v["maxSampledModulus"].as_f64().unwrap() <= 1.0 + 1e-12);
    assert_eq!(code(&combmap(&["capacity", "--intervals", "0,2", "--intervals", "1,3"])), 2);
    assert_eq!(code(&combmap(&["capacity", "--intervals", "0,1,2"])), 2);
}

#[test]
fn verify_filters_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let flat = write(dir.path(), "z.json", r#"{"u": [0, 1], "h": [0, 0]}"#);
    let o = combmap(&["verify", &flat, "--filter", "2.16"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("2.16-lower"));
    assert!(!stdout(&o).contains("2.7-"));

    let cfg = write(dir.path(), "c.json", r#"{"u": [0, 1.3, 2.4], "h": [0.9, 1.6, 0.4]}"#);
    let o = combmap(&["verify", &cfg, "--json", "--no-local"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let results = v["results"].as_array().unwrap();
    assert!(results.iter().all(|r| r["passed"].as_bool() == Some(true)));
    assert!(results.iter().all(|r| !r["checkId"].as_str().unwrap().starts_with("3.10")));
}

#[test]
fn example_reports_its_honest_outcome() {
    let o = combmap(&["example", "--id", "1", "--size", "2"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("ex1-upper"));
    // the per-gap step fails at N = 4, so the command reports a violation
    let o = combmap(&["example", "--id", "2", "--size", "4", "--json"]);
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let failed: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"].as_bool() == Some(false))
        .map(|c| c["checkId"].as_str().unwrap())
        .collect();
    assert_eq!(failed, vec!["ex2-max"]);
}

#[test]
fn small_ensemble_is_reproducible() {
    let run = || stdout(&combmap(&["verify", "--ensemble", "--count", "3", "--seed", "5", "--no-local", "--json"]));
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["seed"].as_u64(), Some(5));
    assert_eq!(v["violations"].as_u64(), Some(0));
}
