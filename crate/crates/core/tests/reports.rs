use sasaki_monopole::commands::{run, Command};
use sasaki_monopole::config::{FieldChoice, ToolConfig};
use sasaki_monopole::regularity::Verdict;
use sasaki_monopole::report::{ResidualReport, EXIT_FAIL, EXIT_PASS};
use sasaki_monopole::Error;

fn small() -> ToolConfig {
    let mut cfg = ToolConfig::default();
    cfg.samples = 200;
    cfg.field_points = 40;
    cfg
}

#[test]
fn config_round_trips_through_json() {
    let cfg = small();
    let text = serde_json::to_string(&cfg).unwrap();
    let back: ToolConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn partial_config_keeps_defaults_and_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.json");
    std::fs::write(&p, r#"{"seed": 9, "field": "hopf_invariant_abelian", "holonomy": {"flow_eps": 2.0}}"#).unwrap();
    let cfg = ToolConfig::load(&p).unwrap();
    assert_eq!(cfg.seed, 9);
    assert_eq!(cfg.field, FieldChoice::Named("hopf_invariant_abelian".into()));
    assert_eq!(cfg.holonomy.flow_eps, 2.0);
    assert_eq!(cfg.holonomy.ode_step, ToolConfig::default().holonomy.ode_step);

    std::fs::write(&p, r#"{"seeed": 9}"#).unwrap();
    assert!(ToolConfig::load(&p).is_err());
}

#[test]
fn invalid_values_are_config_errors() {
    let mut cfg = small();
    cfg.fd_step = -1.0;
    assert!(matches!(run(Command::Calibrate, &cfg), Err(Error::ConfigInvalid(_))));
}

#[test]
fn reports_are_deterministic_and_seeded() {
    let json = |cfg: &ToolConfig| run(Command::VerifyGeometry, cfg).unwrap().report.to_json().unwrap();
    let cfg = small();
    assert_eq!(json(&cfg), json(&cfg));
    let mut other = small();
    other.seed = 1;
    let (a, b) = (json(&cfg), json(&other));
    assert_ne!(a, b);
    let parsed: ResidualReport = serde_json::from_str(&a).unwrap();
    assert_eq!(parsed.command, "verify-geometry");
    assert!(parsed.suites.iter().all(|s| s.n_samples > 0 && s.pass));
}

#[test]
fn exit_codes_follow_the_worst_verdict() {
    let mut cfg = small();
    let out = run(Command::FieldCheck, &cfg).unwrap();
    assert_eq!(out.exit_code(), EXIT_PASS);
    cfg.field = FieldChoice::Named("singular_gauge".into());
    let out = run(Command::Regularity, &cfg).unwrap();
    assert_eq!(out.report.verdict(), Verdict::Fail);
    assert_eq!(out.exit_code(), EXIT_FAIL);
}

#[test]
fn unknown_field_is_an_error_with_suite_context() {
    let mut cfg = small();
    cfg.field = FieldChoice::Named("no_such_field".into());
    let e = run(Command::FieldCheck, &cfg).unwrap_err();
    assert!(e.to_string().contains("no_such_field"), "{e}");
}
