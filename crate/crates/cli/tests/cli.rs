use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hodge(cache: Option<&Path>, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hodge"));
    cmd.env_remove("HODGE_SEED");
    match cache {
        Some(dir) => cmd.env("HODGE_CACHE_DIR", dir),
        None => cmd.env_remove("HODGE_CACHE_DIR").arg("--no-cache"),
    };
    cmd.args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = hodge(None, args);
    assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

#[test]
fn published_examples() {
    assert_eq!(ok(&["bernoulli", "4"]), "-1/30\n");
    assert_eq!(ok(&["hodge-number", "--genus", "2", "--lambda", "1,1,1"]), "1/2880\n");
    assert_eq!(ok(&["hodge-number", "--genus", "3", "--lambda", "1,2,3"]), "1/1451520\n");
}

#[test]
fn psi_insertions_and_dimension_zero() {
    assert_eq!(ok(&["hodge-number", "--genus", "1", "--lambda", "1", "--psi", "0"]), "1/24\n");
    let out = ok(&["hodge-number", "--genus", "2", "--lambda", "1"]);
    assert!(out.starts_with("0\n# degree"), "{out}");
}

#[test]
fn exit_codes() {
    assert_eq!(hodge(None, &["no-such-command"]).status.code(), Some(2));
    assert_eq!(hodge(None, &["bernoulli", "--bogus"]).status.code(), Some(2));
    assert_eq!(hodge(None, &["hodge-potential", "--genus", "0"]).status.code(), Some(2));
    assert_eq!(hodge(None, &["hierarchy", "--order", "3"]).status.code(), Some(2));
    assert_eq!(hodge(None, &["hodge-number", "--genus", "2", "--lambda", "x"]).status.code(), Some(2));
    assert_eq!(hodge(None, &["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(hodge(None, &["verify", "--criterion", "14"]).status.code(), Some(2));
    assert_eq!(hodge(None, &["--help"]).status.code(), Some(0));
}

#[test]
fn verify_core_suite_passes() {
    let out = ok(&["verify", "--suite", "core", "--cases", "50"]);
    assert!(out.contains("structural identities: ok"), "{out}");
    assert!(!out.contains("FAIL"));
}

fn schema() -> jsonschema::Validator {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/schema/output.schema.json")).unwrap();
    jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).expect("schema compiles")
}

#[test]
fn json_output_matches_the_schema() {
    let v = schema();
    let runs: &[&[&str]] = &[
        &["bernoulli", "10"],
        &["free-energy", "--genus", "2"],
        &["hodge-potential", "--genus", "2"],
        &["hodge-gf", "--genus", "2"],
        &["hodge-gf", "--genus", "2", "--lambda", "1,1"],
        &["hodge-number", "--genus", "2", "--lambda", "2,2"],
        &["hierarchy", "--order", "4", "--density", "-1", "--miura", "--check", "1"],
        &["ham-operator", "--order", "4"],
        &["specialize", "volterra", "--order", "2", "--check"],
        &["normal-form", "--order", "4"],
        &["verify", "--criterion", "1,2"],
    ];
    for args in runs {
        let mut full = vec!["--format", "json"];
        full.extend_from_slice(args);
        let doc: Value = serde_json::from_str(&ok(&full)).unwrap();
        let errors: Vec<String> = v.iter_errors(&doc).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
        assert_eq!(doc["status"], "ok");
    }
    let bad = serde_json::json!({ "schema_version": 1, "command": "bernoulli" });
    assert!(!v.is_valid(&bad));
}

#[test]
fn json_values_round_trip() {
    let doc: Value = serde_json::from_str(&ok(&["--format", "json", "hodge-potential", "--genus", "1"])).unwrap();
    let poly = &doc["sections"][0]["value"];
    assert_eq!(poly["text"], "(1/24)*L + (-1/2)*s1*v");
    assert_eq!(poly["terms"].as_array().unwrap().len(), 2);
}

#[test]
fn latex_is_a_standalone_document() {
    let out = ok(&["--format", "latex", "hodge-gf", "--genus", "3"]);
    assert!(out.starts_with("\\documentclass{article}\n"));
    assert!(out.ends_with("\\end{document}\n"));
    assert_eq!(out.matches("\\begin{align*}").count(), out.matches("\\end{align*}").count());
    assert!(out.contains("H_{3}(\\lambda_{1}\\lambda_{2}\\lambda_{3}; t) &= \\frac{v_{1}^{4}}{1451520}"));
    let mut depth = 0i32;
    for c in out.replace("\\{", "").replace("\\}", "").chars() {
        depth += match c {
            '{' => 1,
            '}' => -1,
            _ => 0,
        };
        assert!(depth >= 0);
    }
    assert_eq!(depth, 0);
    assert!(out.is_ascii());
}

#[test]
fn cache_hits_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let runs: &[&[&str]] = &[
        &["hodge-potential", "--genus", "3"],
        &["--format", "json", "free-energy", "--genus", "3"],
        &["--format", "latex", "hodge-gf", "--genus", "3"],
        &["hodge-number", "--genus", "3", "--lambda", "1,1,1,1,1,1"],
        &["hierarchy", "--order", "6", "--flow", "2"],
        &["ham-operator", "--order", "6"],
    ];
    for args in runs {
        let uncached = hodge(None, args);
        let cold = hodge(Some(dir.path()), args);
        let warm = hodge(Some(dir.path()), args);
        assert_eq!(cold.status.code(), Some(0), "{args:?}");
        assert_eq!(cold.stdout, uncached.stdout, "{args:?}");
        assert_eq!(warm.stdout, cold.stdout, "{args:?}");
    }
    let index: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("index.json")).unwrap()).unwrap();
    let kinds: std::collections::BTreeSet<&str> =
        index["entries"].as_object().unwrap().values().map(|e| e["kind"].as_str().unwrap()).collect();
    for k in ["free-energy", "hodge-stage", "gf", "flow", "operator"] {
        assert!(kinds.contains(k), "no {k} entry");
    }
    assert!(dir.path().join("oracle.json").exists());
}

#[test]
fn corrupted_cache_entries_are_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["hodge-potential", "--genus", "2"];
    let cold = hodge(Some(dir.path()), &args);
    for e in std::fs::read_dir(dir.path().join("objects")).unwrap() {
        std::fs::write(e.unwrap().path(), "(1)*v").unwrap();
    }
    let again = hodge(Some(dir.path()), &args);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(again.stdout, cold.stdout);
}

#[test]
fn seed_is_reported() {
    let doc: Value =
        serde_json::from_str(&ok(&["--format", "json", "--seed", "7", "verify", "--criterion", "13", "--cases", "20"]))
            .unwrap();
    assert_eq!(doc["input"]["seed"], 7);
    assert!(doc["sections"][0]["value"]["items"][0]["label"].as_str().unwrap().contains("seed 7"));
}
