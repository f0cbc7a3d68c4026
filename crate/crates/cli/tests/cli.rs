use std::fs;
use std::process::{Command, Output};

use mgtheta::hierarchy::BoundReport;

fn mgtheta(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mgtheta"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

#[test]
fn ingest_prints_event_table_in_reference_order() {
    let o = mgtheta(&["ingest", "chsh"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let events: Vec<&str> = text
        .lines()
        .skip(1)
        .take(8)
        .map(|l| l.split_whitespace().nth(1).unwrap())
        .collect();
    assert_eq!(events, ["00|00", "11|01", "10|11", "00|10", "11|00", "00|01", "01|11", "11|10"]);
    let pent2 = stdout(&mgtheta(&["ingest", "pent2"]));
    let row5: Vec<&str> = pent2.lines().nth(5).unwrap().split_whitespace().collect();
    assert_eq!(row5[..2], ["5", "_1|_0"]);
}

#[test]
fn ingest_writes_a_loadable_multigraph() {
    let dir = tempfile::tempdir().unwrap();
    let expr = dir.path().join("mine.json");
    fs::write(&expr, mgtheta::instances::source("pent1").unwrap()).unwrap();
    let mg = dir.path().join("pent1.mg.json");
    let o = mgtheta(&["ingest", expr.to_str().unwrap(), "--out", mg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = mgtheta(&["bounds", "alpha", mg.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["value"], 2.0);
    // Expression files are accepted directly as well.
    let o = mgtheta(&["bounds", "alpha", expr.to_str().unwrap(), "--format", "json"]);
    assert_eq!(json(&o)["value"], 2.0);
}

#[test]
fn input_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    fs::write(&empty, "").unwrap();
    let o = mgtheta(&["ingest", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    let negative = dir.path().join("neg.json");
    fs::write(
        &negative,
        r#"{"parties":["A","B"],"terms":[{"weight":-1,"parts":{"A":{"setting":"0","outcome":"0"},"B":null}}]}"#,
    )
    .unwrap();
    let o = mgtheta(&["ingest", negative.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("positive form"));
    assert_eq!(mgtheta(&["bounds", "alpha", "no-such-instance"]).status.code(), Some(2));
    assert_eq!(mgtheta(&["bounds", "mtheta", "chsh", "--level", "zero"]).status.code(), Some(2));
    assert_eq!(mgtheta(&["bounds", "mtheta", "chsh", "--level", "1.x"]).status.code(), Some(2));
    assert_eq!(mgtheta(&["bounds", "mtheta", "chsh", "--level", "1.9"]).status.code(), Some(2));
    assert_eq!(mgtheta(&["bounds", "nonsense", "chsh"]).status.code(), Some(2));
    assert_eq!(mgtheta(&["verify", "no-such-suite"]).status.code(), Some(2));
}

#[test]
fn solver_failure_exits_3() {
    let o = mgtheta(&["bounds", "theta", "pent1", "--max-iterations", "2"]);
    assert_eq!(o.status.code(), Some(3));
    let o = mgtheta(&["bounds", "mtheta", "pent1", "--max-iterations", "2"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn scalar_bounds() {
    let o = mgtheta(&["bounds", "theta", "pent1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!((v["value"].as_f64().unwrap() - 2.2360680).abs() < 1e-6);
    assert!((v["cross_check"].as_f64().unwrap() - 2.2360680).abs() < 1e-6);
    let o = mgtheta(&["bounds", "alpha", "i3322csw", "--format", "json"]);
    assert_eq!(json(&o)["value"], 6.0);
    let text = stdout(&mgtheta(&["bounds", "alpha", "chsh"]));
    assert!(text.starts_with("alpha 3 "), "{text}");
}

#[test]
fn mtheta_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("chsh.report.json");
    let o = mgtheta(&[
        "bounds",
        "mtheta",
        "chsh",
        "--level",
        "1+AB",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    let report = BoundReport::from_json(&text).unwrap();
    assert!((report.bound - 3.4142).abs() < 1e-3);
    assert_eq!(report.level, "1+AB");
    assert_eq!(report.per_trial.len(), 1);
    assert_eq!(BoundReport::from_json(&report.to_json()).unwrap(), report);
    let raw: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["instance", "level", "trials", "seed", "mode", "bound", "alpha", "theta_flatten", "per_trial", "tool_version"] {
        assert!(raw.get(key).is_some(), "missing {key}");
    }
    assert!(raw.get("x").is_none());
    for key in ["subsets", "value", "status", "wall_ms"] {
        assert!(raw["per_trial"][0].get(key).is_some(), "missing per_trial {key}");
    }
}

#[test]
fn randomized_level_flags() {
    let o = mgtheta(&[
        "bounds", "mtheta", "pent1", "--level", "1.x", "--x", "3", "--trials", "3", "--seed", "7", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["x"], 3);
    assert_eq!(v["level"], "1.3");
    assert_eq!(v["per_trial"].as_array().unwrap().len(), 3);
    let again = json(&mgtheta(&["bounds", "mtheta", "pent1", "--level", "1.3", "--trials", "3", "--seed", "7", "--format", "json"]));
    assert_eq!(again["bound"], v["bound"]);
    assert_eq!(again["per_trial"][1]["subsets"], v["per_trial"][1]["subsets"]);
}

#[test]
fn skeleton_dump_matches_golden_file() {
    let o = mgtheta(&["skeleton", "chsh", "--level", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let golden = include_str!("../../core/tests/golden/chsh_L1.skeleton");
    assert_eq!(stdout(&o), golden);
}

#[test]
fn verify_quick_passes() {
    let o = mgtheta(&["verify", "quick"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 16);
    assert!(text.trim_end().ends_with("16 passed, 0 failed"));
}

#[test]
fn verify_reports_wrong_expectation() {
    let dir = tempfile::tempdir().unwrap();
    let suite = dir.path().join("suite.json");
    fs::write(
        &suite,
        r#"[
          {"instance":"chsh","quantity":"alpha","comparison":{"kind":"equals","expected":3.0,"tolerance":1e-9}},
          {"instance":"pent1","quantity":"alpha","comparison":{"kind":"equals","expected":2.5,"tolerance":1e-9}}
        ]"#,
    )
    .unwrap();
    let o = mgtheta(&["verify", "--suite-file", suite.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    let text = stdout(&o);
    assert!(text.contains("PASS chsh alpha"), "{text}");
    assert!(text.contains("FAIL pent1 alpha"), "{text}");
    let o = mgtheta(&["verify", "--suite-file", suite.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(4));
    let v = json(&o);
    assert_eq!(v[1]["pass"], false);
    assert_eq!(v[1]["delta"], -0.5);
}
