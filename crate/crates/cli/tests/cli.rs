//! End-to-end tests against the compiled binary: exit codes, output bytes,
//! generator determinism, and report replay.

use std::path::PathBuf;
use std::process::{Command, Output};

use entcert_core::measures::builtin_measure;
use entcert_core::{CheckConfig, CHECK_SEQUENCE};

fn entcert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entcert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn fixture(name: &str) -> String {
    let mut path = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    path.push("fixtures");
    path.push(name);
    path.to_str().expect("utf-8 path").to_string()
}

fn stdout_lines(output: &Output) -> Vec<String> {
    String::from_utf8(output.stdout.clone())
        .expect("utf-8 stdout")
        .lines()
        .map(String::from)
        .collect()
}

#[test]
fn certify_passing_measure_exits_zero_with_full_report() {
    let out = entcert(&[
        "certify",
        "negativity",
        "--trials",
        "6",
        "--dims",
        "2,2",
        "--seed",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).expect("report JSON");
    assert_eq!(doc["version"], 1);
    assert_eq!(doc["measure"], "negativity");
    assert_eq!(doc["verdict"], "PREDICTED-MONOTONE");
    assert_eq!(doc["consistent"], true);
    assert_eq!(doc["checks"].as_array().expect("checks").len(), 7);
}

#[test]
fn certify_control_exits_zero_when_it_fails_as_declared() {
    let out = entcert(&[
        "certify",
        "control-purity",
        "--trials",
        "6",
        "--dims",
        "2,2",
        "--format",
        "summary",
    ]);
    assert_eq!(out.status.code(), Some(0), "expected failure is success");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("flags"));
    assert!(text.contains("NOT-MONOTONE"));
}

#[test]
fn unknown_names_and_bad_input_exit_two() {
    assert_eq!(entcert(&["certify", "no-such"]).status.code(), Some(2));
    assert_eq!(
        entcert(&["eval", "no-such", &fixture("max-entangled-2.json")])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(entcert(&["gen", "no-such"]).status.code(), Some(2));
    assert_eq!(
        entcert(&["gen", "isotropic", "--d", "2", "--fidelity", "1.5"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn eval_prints_twelve_decimal_values() {
    let out = entcert(&["eval", "negativity", &fixture("max-entangled-2.json")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_lines(&out)[0], "2.000000000000");

    let out = entcert(&["eval", "negativity", &fixture("product-2x2.json")]);
    assert_eq!(stdout_lines(&out)[0], "1.000000000000");
}

#[test]
fn eval_ree_reports_value_status_and_lower_bound() {
    let out = entcert(&["eval", "ree", &fixture("product-2x2.json")]);
    assert_eq!(out.status.code(), Some(0));
    let lines = stdout_lines(&out);
    let value: f64 = lines[0].parse().expect("numeric value");
    assert!(value.abs() <= 1e-5, "product state has no entanglement");
    assert!(lines[1].starts_with("status: "));
    assert!(lines[2].starts_with("lower-bound: "));
}

#[test]
fn eval_bits_flag_rescales_entropic_outputs() {
    let out = entcert(&["eval", "ree", &fixture("max-entangled-2.json"), "--bits"]);
    let lines = stdout_lines(&out);
    let lower: f64 = lines[2]
        .strip_prefix("lower-bound: ")
        .expect("lower bound line")
        .parse()
        .expect("numeric bound");
    assert!((lower - 1.0).abs() <= 1e-6, "one ebit, got {}", lower);
}

#[test]
fn eval_rejects_malformed_and_underpopulated_files() {
    let dir = std::env::temp_dir();
    let broken = dir.join("entcert-broken.json");
    std::fs::write(&broken, "{\"version\": 1}").unwrap();
    let out = entcert(&["eval", "negativity", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty(), "diagnostic goes to stderr");

    let single = dir.join("entcert-single.json");
    std::fs::write(
        &single,
        "{\"version\":1,\"registers\":[{\"label\":\"A\",\"dim\":2}],\
         \"entries\":[[1.0,0.0],[0.0,0.0],[0.0,0.0],[0.0,0.0]]}",
    )
    .unwrap();
    let out = entcert(&["eval", "negativity", single.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generators_are_deterministic_and_consistent() {
    let a = entcert(&["gen", "random", "--dims", "2,3", "--seed", "5"]);
    let b = entcert(&["gen", "random", "--dims", "2,3", "--seed", "5"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout, "same seed, same bytes");

    let me = entcert(&["gen", "max-entangled", "--d", "2"]);
    let iso = entcert(&["gen", "isotropic", "--d", "2", "--fidelity", "1"]);
    assert_eq!(me.stdout, iso.stdout, "unit fidelity collapses the family");
}

#[test]
fn reports_replay_from_their_own_config_echo() {
    let out = entcert(&[
        "certify",
        "negativity",
        "--trials",
        "5",
        "--dims",
        "2,2",
        "--seed",
        "11",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).expect("report JSON");

    let cfg = CheckConfig {
        trials: doc["config"]["trials"].as_u64().unwrap() as usize,
        tol: doc["config"]["tol"].as_f64().unwrap(),
        dims: doc["config"]["dims"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| {
                p.as_array()
                    .unwrap()
                    .iter()
                    .map(|d| d.as_u64().unwrap() as usize)
                    .collect()
            })
            .collect(),
        ensemble_size: doc["config"]["ensemble_size"].as_u64().unwrap() as usize,
        rounds: doc["config"]["rounds"].as_u64().unwrap() as usize,
        outcomes: doc["config"]["outcomes"].as_u64().unwrap() as usize,
        seed: doc["seed"].as_u64().unwrap(),
    };
    let handle = builtin_measure(doc["measure"].as_str().unwrap()).expect("built-in");
    for (k, (name, check)) in CHECK_SEQUENCE.iter().enumerate() {
        let replayed = check(&handle, &cfg).expect("check runs");
        let recorded = &doc["checks"][k];
        assert_eq!(recorded["name"], *name);
        let drift = (replayed.violation - recorded["violation"].as_f64().unwrap()).abs();
        assert!(drift <= 1e-12, "{} drifted by {}", name, drift);
        assert_eq!(recorded["passed"], replayed.passed);
    }
}
