//! End-to-end checks of the `commact` binary: output framing, exit codes,
//! determinism, and the fixture catalogue.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_commact"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("commact-cli-{}-{name}", std::process::id()));
    let mut f = std::fs::File::create(&path).unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    path
}

#[test]
fn selftest_passes_and_is_byte_deterministic() {
    let first = run(&["selftest"]);
    assert_eq!(first.status.code(), Some(0), "{first:?}");
    let text = String::from_utf8(first.stdout.clone()).unwrap();
    assert!(!text.is_empty());
    for line in text.lines() {
        let value: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(value["pass"], serde_json::json!(true), "{line}");
    }
    let second = run(&["selftest"]);
    assert_eq!(first.stdout, second.stdout);
    let parallel = run(&["selftest", "--parallel"]);
    assert_eq!(parallel.status.code(), Some(0));
    assert_eq!(first.stdout, parallel.stdout);
}

#[test]
fn result_fields_keep_a_stable_order() {
    let out = run(&["selftest"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let line = text.lines().next().unwrap();
    let keys: Vec<usize> = ["\"op\"", "\"inputs\"", "\"seed\"", "\"budget\"", "\"outputs\"", "\"pass\""]
        .iter()
        .map(|k| line.find(k).unwrap_or_else(|| panic!("{k} missing in {line}")))
        .collect();
    assert!(keys.windows(2).all(|w| w[0] < w[1]), "field order in {line}");
}

#[test]
fn fixture_catalogue_is_json_with_the_expected_names() {
    let out = run(&["list-fixtures"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let entries: Vec<serde_json::Value> = serde_json::from_str(&text).unwrap();
    assert!(entries.len() >= 10);
    assert!(text.contains("dihedral_inf"));
    assert!(text.contains("singer:2"));
}

#[test]
fn missing_scenario_file_is_a_config_error() {
    let out = run(&["run", "/nonexistent/scenarios.json"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr).unwrap().contains("error"));
}

#[test]
fn malformed_scenario_file_is_a_parse_error() {
    let path = temp_file("malformed.json", "this is not json");
    let out = run(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_scenario_list_succeeds_with_no_output() {
    let path = temp_file("empty.json", "[]");
    let out = run(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
}

#[test]
fn zero_budget_turns_into_a_budget_exit() {
    let out = run(&["selftest", "--budget", "power_set_orbit=0"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn malformed_budget_flag_is_a_parse_error() {
    let out = run(&["selftest", "--budget", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failed_expectation_exits_one_but_still_reports() {
    let path = temp_file(
        "mismatch.json",
        r#"[{"op": "ell", "args": {"gset": "zn:10", "subset": {"tokens": ["0", "1", "2", "5", "7"]}, "word": "t"}, "expect": {"ell": 7}}]"#,
    );
    let out = run(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    let value: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(value["pass"], serde_json::json!(false));
    assert_eq!(value["outputs"]["ell"], serde_json::json!(6));
}

#[test]
fn unknown_operation_is_a_validation_exit() {
    let path = temp_file("unknown-op.json", r#"[{"op": "frobnicate", "args": {}}]"#);
    let out = run(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn global_seed_is_recorded_and_reproducible() {
    let path = temp_file(
        "seeded.json",
        r#"[{"op": "decompose", "args": {"action": {"random": {"seed": 0, "k": 2}}, "bound": 10}}]"#,
    );
    let a = run(&["run", path.to_str().unwrap(), "--seed", "7"]);
    let b = run(&["run", path.to_str().unwrap(), "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let value: serde_json::Value =
        serde_json::from_str(String::from_utf8(a.stdout).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(value["seed"], serde_json::json!(7));
}

#[test]
fn timings_are_attached_only_on_request() {
    let path = temp_file(
        "timed.json",
        r#"[{"op": "ell", "args": {"gset": "zn:6", "subset": {"tokens": ["0"]}, "word": "t"}}]"#,
    );
    let plain = run(&["run", path.to_str().unwrap()]);
    assert!(!String::from_utf8(plain.stdout).unwrap().contains("timings"));
    let timed = run(&["run", path.to_str().unwrap(), "--timings"]);
    let value: serde_json::Value =
        serde_json::from_str(String::from_utf8(timed.stdout).unwrap().lines().next().unwrap())
            .unwrap();
    assert!(value["timings"]["millis"].is_u64());
}

#[test]
fn pretty_output_is_valid_json_per_result() {
    let out = run(&["list-fixtures", "--pretty"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let _: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(text.lines().count() > 3);
}
