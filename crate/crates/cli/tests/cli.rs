use std::path::Path;
use std::process::{Command, Output};

fn smlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smlab")).args(args).output().expect("smlab runs")
}

fn report(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn flags_land_in_the_written_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = smlab(&[
        "verify-geometry",
        "--grid",
        "100",
        "--seed",
        "4",
        "--frame",
        "flow-lift",
        "--fd-step",
        "0.002",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(&out);
    assert_eq!(r["command"], "verify-geometry");
    assert_eq!(r["config"]["samples"], 100);
    assert_eq!(r["config"]["seed"], 4);
    assert_eq!(r["config"]["frame"], "flow-lift");
    assert_eq!(r["config"]["fd_step"], 0.002);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("PASS") && l.contains("geometry.orthonormality")));
}

#[test]
fn csv_dumps_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let o = smlab(&["solve-potential", "--field", "constant_higgs", "--csv", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let body = std::fs::read_to_string(dir.path().join("potential.csv")).unwrap();
    assert!(body.lines().count() > 10);
}

#[test]
fn errors_exit_one() {
    let o = smlab(&["calibrate", "--config", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    assert_eq!(smlab(&["field-check", "--fd-step=-1"]).status.code(), Some(1));
    assert_eq!(smlab(&["field-check", "--fd-step", "-1"]).status.code(), Some(1));
    assert_eq!(smlab(&["field-check", "--field", "no_such_field"]).status.code(), Some(1));
}

#[test]
fn verdicts_map_to_exit_codes() {
    assert_eq!(smlab(&["field-check", "--field", "zero"]).status.code(), Some(0));
    assert_eq!(smlab(&["regularity", "--field", "singular_gauge"]).status.code(), Some(2));
    assert_eq!(smlab(&["regularity", "--field", "singular_higgs"]).status.code(), Some(3));
}

#[test]
fn usage_errors_are_reported_by_the_parser() {
    assert_eq!(smlab(&["--help"]).status.code(), Some(0));
    assert_eq!(smlab(&["--version"]).status.code(), Some(0));
    assert_eq!(smlab(&["no-such-command"]).status.code(), Some(1));
}
