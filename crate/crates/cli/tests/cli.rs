use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

const SEED: &str = "00000000000000000000000000000000000000000000000000000000000000ab";

fn lca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lca"))
        .args(args)
        .env_remove("LCA_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn schema() -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../schema/run_report.schema.json");
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lca-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn single_vertex_tree_has_one_bucket() {
    let r = json(&lca(&["tree-stats", "--model", "path", "--n", "1", "--queries", "1"]));
    assert_eq!(r["summary"]["histogram"], serde_json::json!([[1, 1]]));
}

#[test]
fn every_subcommand_report_matches_the_schema() {
    let v = schema();
    let runs: &[&[&str]] = &[
        &["tree-stats", "--n", "256", "--queries", "50", "--thresholds", "2,4"],
        &["tree-stats", "--model", "binomial", "--n", "256", "--queries", "50"],
        &["gw-sim", "--trials", "500", "--thresholds", "1,5"],
        &["gw-sim", "--law", "binomial", "--trials", "500"],
        &["matching", "--n", "200", "--trials", "2"],
        &["coloring", "--trials", "2", "--probe-queries", "5"],
        &["ksat", "--trials", "2", "--ordering", "kwise:4"],
        &["balls-bins", "--n", "500", "--m", "500", "--rule", "always-go-left"],
        &["oracle-compare", "--target", "max-chain", "--n", "200"],
        &["lower-bound", "--path-len", "3", "--trials", "200"],
    ];
    for args in runs {
        let mut full = args.to_vec();
        full.extend(["--seed", SEED]);
        let report = json(&lca(&full));
        if let Err(e) = v.validate(&report) {
            panic!("{args:?}: {e}");
        }
        assert_eq!(report["spec"]["seed"], SEED);
        assert_eq!(report["spec"]["experiment"]["kind"], args[0]);
    }
}

#[test]
fn reports_are_reproducible_and_thread_count_free() {
    let args = ["balls-bins", "--n", "3000", "--m", "3000", "--trials", "4", "--seed", SEED];
    let a = lca(&args);
    let b = lca(&[&args[..], &["--jobs", "1"]].concat());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn spec_file_replays_the_report() {
    let first = lca(&["matching", "--n", "300", "--trials", "3", "--seed", SEED]);
    let report = json(&first);
    let spec = scratch("spec.json");
    std::fs::write(&spec, report["spec"].to_string()).unwrap();
    let again = lca(&["run", spec.to_str().unwrap()]);
    assert_eq!(first.stdout, again.stdout);
}

#[test]
fn seed_from_environment_is_echoed() {
    let out = Command::new(env!("CARGO_BIN_EXE_lca"))
        .args(["lower-bound", "--path-len", "2", "--trials", "10"])
        .env("LCA_SEED", SEED)
        .output()
        .unwrap();
    assert_eq!(json(&out)["spec"]["seed"], SEED);
}

#[test]
fn exit_codes_distinguish_failure_kinds() {
    let code = |args: &[&str]| lca(args).status.code().unwrap();
    assert_eq!(code(&["matching", "--seed", "xyz"]), 2);
    assert_eq!(code(&["matching", "--d", "0"]), 2);
    assert_eq!(code(&["coloring", "--k", "20"]), 2);
    assert_eq!(code(&["lower-bound", "--path-len", "1"]), 2);
    assert_eq!(code(&["coloring", "--m", "300", "--n", "40", "--k", "15", "--lenient"]), 3);
    assert_eq!(code(&["matching", "--n", "300", "--cap-constant", "0.1", "--failure-budget", "0"]), 4);
}

#[test]
fn failed_runs_leave_no_output_file() {
    let out = scratch("failed.json");
    let r = lca(&["matching", "--n", "300", "--cap-constant", "0.1", "--failure-budget", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(4));
    assert!(!out.exists());

    let ok = scratch("ok.json");
    assert!(lca(&["lower-bound", "--trials", "10", "--out", ok.to_str().unwrap()]).status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&ok).unwrap()).unwrap();
    assert_eq!(v["summary"]["trials"], 10);
}

#[test]
fn csv_and_per_item_outputs() {
    let items = scratch("items.csv");
    let out = lca(&["balls-bins", "--n", "100", "--m", "100", "--format", "csv", "--per-item", items.to_str().unwrap()]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("balls,failures,"));
    let items = std::fs::read_to_string(items).unwrap();
    assert!(items.starts_with("ball,bin,failed,probes\n"));
    assert_eq!(items.lines().count(), 101);

    let summary_row = lca(&["lower-bound", "--trials", "10", "--format", "csv"]);
    let text = String::from_utf8(summary_row.stdout).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().next().unwrap().contains("frequency"));

    let multi = lca(&["coloring", "--trials", "2", "--per-item", scratch("x.csv").to_str().unwrap()]);
    assert_eq!(multi.status.code(), Some(2));
}

#[test]
fn matching_agrees_with_the_global_algorithm_on_100_seeds() {
    let r = json(&lca(&["oracle-compare", "--target", "matching", "--n", "1000", "--d", "5", "--trials", "100", "--seed", SEED]));
    assert_eq!(r["summary"]["mismatches"], 0);
    assert_eq!(r["summary"]["trials"], 100);
}

#[test]
fn accept_runs_selected_criteria() {
    let out = lca(&["accept", "--only", "9"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("PASS [ 9] kwise-exhaustive"));
}
