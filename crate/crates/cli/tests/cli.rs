//! End-to-end tests of the `tg` binary: exit codes, JSON schemas and
//! byte-identical reruns.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn example(name: &str) -> String {
    root().join("examples").join(name).display().to_string()
}

fn tg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    tg(args).status.code().expect("exit code")
}

fn stdout_json(args: &[&str]) -> Value {
    let out = tg(args);
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn validator(schema: &str) -> jsonschema::Validator {
    let dir = root().join("schema");
    let load = |p: &Path| -> Value { serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap() };
    let common = load(&dir.join("common.schema.json"));
    let registry = Box::leak(Box::new(
        jsonschema::Registry::new()
            .add("https://tg.invalid/schema/common.schema.json", common)
            .unwrap()
            .prepare()
            .unwrap(),
    ));
    jsonschema::options()
        .with_registry(registry)
        .build(&load(&dir.join(schema)))
        .expect("schema compiles")
}

fn assert_valid(schema: &str, doc: &Value) {
    let v = validator(schema);
    let errors: Vec<String> = v.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema}: {errors:?}");
}

#[test]
fn check_exit_codes_follow_the_verdict() {
    assert_eq!(code(&["check", &example("sigma1.tgd"), "--class", "tg"]), 0);
    assert_eq!(code(&["check", &example("sigma2.tgd"), "--class", "tg"]), 1);
    assert_eq!(code(&["check", &example("sigma3.tgd")]), 1);
}

#[test]
fn tight_budgets_give_unknown() {
    assert_eq!(code(&["check", &example("sigma1.tgd"), "--max-rounds", "1"]), 2);
}

#[test]
fn baseline_classes_share_the_exit_scheme() {
    let s1 = example("sigma1.tgd");
    for class in ["wa", "guarded", "sticky"] {
        assert_eq!(code(&["check", &s1, "--class", class]), 1, "{class}");
    }
}

#[test]
fn ask_reports_no_for_the_reflexive_query() {
    assert_eq!(code(&["ask", &example("sigma2_q.tgd"), "--depth-limit", "6"]), 1);
    assert_eq!(
        code(&["ask", &example("sigma1.tgd"), "--depth-limit", "2", "--auto"]),
        1
    );
}

#[test]
fn input_errors_exit_with_three() {
    assert_eq!(code(&["check", "/definitely/not/here.tgd"]), 3);
    let dir = std::env::temp_dir().join(format!("tg-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.tgd");
    std::fs::write(&bad, "t(X,Y) -> \n").unwrap();
    let out = tg(&["check", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.tgd"));
    // A file without a query cannot be asked.
    assert_eq!(code(&["ask", &example("sigma2.tgd"), "--depth-limit", "1"]), 3);
    assert_eq!(code(&["check"]), 3);
}

#[test]
fn sigma2_json_witness_is_the_reflexive_triangle() {
    let v = stdout_json(&["check", &example("sigma2.tgd"), "--class", "tg", "--json"]);
    assert_eq!(v["outcome"], "non_member");
    let w = &v["witness"];
    assert_eq!(w["B"].as_array().unwrap().len(), 2);
    assert_eq!(w["c"], w["a_prime"]);
    assert_eq!(w["guarded"], false);
    assert_valid("verdict.schema.json", &v);
}

#[test]
fn every_json_output_matches_its_schema() {
    let s1 = example("sigma1.tgd");
    let s2q = example("sigma2_q.tgd");
    let s3 = example("sigma3.tgd");
    assert_valid("verdict.schema.json", &stdout_json(&["check", &s1, "--json"]));
    assert_valid("verdict.schema.json", &stdout_json(&["check", &s3, "--json"]));
    assert_valid(
        "verdict.schema.json",
        &stdout_json(&["check", &s1, "--class", "wa", "--json"]),
    );
    assert_valid(
        "verdict.schema.json",
        &stdout_json(&["check", &s1, "--max-rounds", "1", "--json"]),
    );
    assert_valid(
        "chase.schema.json",
        &stdout_json(&["chase", &s2q, "--depth", "3", "--json"]),
    );
    assert_valid(
        "answer.schema.json",
        &stdout_json(&["ask", &s2q, "--depth-limit", "3", "--json"]),
    );
    let yes = stdout_json(&["ask", &s2q, "--depth-limit", "0", "--query", "0", "--json"]);
    assert_valid("answer.schema.json", &yes);
    assert_valid("explain.schema.json", &stdout_json(&["explain", &s3, "--json"]));
    assert_valid("explain.schema.json", &stdout_json(&["explain", &s1, "--json"]));
    assert_valid("pairs.schema.json", &stdout_json(&["explain", &s3, "--pairs"]));
    assert_valid(
        "corpus.schema.json",
        &stdout_json(&["corpus", "--seed", "3", "--count", "10", "--json"]),
    );
}

#[test]
fn schemas_reject_malformed_documents() {
    let v = validator("verdict.schema.json");
    assert!(!v.is_valid(&serde_json::json!({ "format": 2, "kind": "verdict", "class": "tg", "outcome": "member" })));
    assert!(!v.is_valid(&serde_json::json!({ "format": 1, "kind": "verdict", "class": "tg", "outcome": "non_member" })));
}

#[test]
fn dot_output_is_a_digraph() {
    let out = tg(&["chase", &example("sigma2_q.tgd"), "--depth", "2", "--dot"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("digraph"));
    assert!(text.trim_end().ends_with('}'));
}

#[test]
fn explain_lists_every_section() {
    let out = tg(&["explain", &example("sigma3.tgd")]);
    let text = String::from_utf8(out.stdout).unwrap();
    for section in [
        "== extension ==",
        "== dependency graph ==",
        "== null-sets ==",
        "== var-hat ==",
        "== rtcs ==",
        "== verdict ==",
    ] {
        assert!(text.contains(section), "missing {section}");
    }
    assert!(text.contains("UNGUARDED"));
}

#[test]
fn reruns_are_byte_identical() {
    for file in ["sigma1.tgd", "sigma2.tgd", "sigma2_q.tgd", "sigma3.tgd"] {
        let f = example(file);
        let runs: Vec<Vec<&str>> = vec![
            vec!["check", &f, "--json"],
            vec!["check", &f],
            vec!["chase", &f, "--depth", "3"],
            vec!["chase", &f, "--depth", "3", "--json"],
            vec!["explain", &f],
            vec!["explain", &f, "--json"],
        ];
        for args in runs {
            let a = tg(&args);
            let b = tg(&args);
            assert_eq!(a.stdout, b.stdout, "{args:?}");
            assert_eq!(a.status.code(), b.status.code(), "{args:?}");
        }
    }
}
