//! End-to-end tests of the `cks` binary: every subcommand, the JSON/CSV
//! output contracts, and the exit-code classification.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cks_core::fixtures::{bridged_clique, complete};
use cks_core::NodeIdMap;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cks"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn write_graph(dir: &Path, name: &str, g: &cks_core::Graph) -> PathBuf {
    let path = dir.join(name);
    let map = NodeIdMap::dense(g.node_count());
    std::fs::write(&path, g.to_edge_list(&map)).unwrap();
    path
}

fn member_labels(doc: &Value) -> Vec<String> {
    doc["members"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| {
            m.as_str()
                .map(str::to_string)
                .unwrap_or_else(|| m["node"].as_str().unwrap().to_string())
        })
        .collect()
}

const CLIQUE: [&str; 6] = ["0", "2", "3", "4", "5", "6"];

fn sorted(mut v: Vec<String>) -> Vec<String> {
    v.sort();
    v
}

#[test]
fn exact_reports_the_dense_clique() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_graph(dir.path(), "bridge.txt", &bridged_clique());
    for method in ["bottomup", "topdown", "tcp"] {
        let out = run(&[
            "exact",
            "--graph",
            graph.to_str().unwrap(),
            "--q",
            "1",
            "--method",
            method,
        ]);
        assert_eq!(code(&out), 0, "method {method}");
        let doc = stdout_json(&out);
        let result = &doc["results"][0];
        assert_eq!(result["query"], "1");
        assert_eq!(result["method"], method, "echoes the method token");
        assert_eq!(result["k"], 3);
        assert_eq!(result["k_hat"], 6);
        assert_eq!(result["community_size"], 15);
        assert_eq!(sorted(member_labels(result)), CLIQUE);
    }
}

#[test]
fn query_defaults_n_to_the_ground_truth_size() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_graph(dir.path(), "bridge.txt", &bridged_clique());
    let out = run(&[
        "query",
        "--graph",
        graph.to_str().unwrap(),
        "--q",
        "1",
        "--variant",
        "tb",
    ]);
    assert_eq!(code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(doc["n"], 6, "defaults to |exact members|");
    assert_eq!(doc["start"], "1");
    assert_eq!(doc["variant"], "tb");
    assert_eq!(doc["truncated"], false);
    assert_eq!(sorted(member_labels(&doc)), CLIQUE);
    for member in doc["members"].as_array().unwrap() {
        let p = member["probability"].as_f64().unwrap();
        assert!(p > 0.0 && p < 1.0);
    }
}

#[test]
fn refinement_walks_a_satellite_query_into_the_clique() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_graph(dir.path(), "bridge.txt", &bridged_clique());
    let out_path = dir.path().join("q.json");
    let out = run(&[
        "query",
        "--graph",
        graph.to_str().unwrap(),
        "--q",
        "7",
        "--variant",
        "basic",
        "--refine",
        "2",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(sorted(member_labels(&doc)), CLIQUE);
}

#[test]
fn usage_and_parameter_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_graph(dir.path(), "bridge.txt", &bridged_clique());
    let g = graph.to_str().unwrap();
    for args in [
        vec!["query", "--graph", g, "--q", "1", "--r", "0"],
        vec!["query", "--graph", g, "--q", "1", "--alpha", "3"],
        vec!["query", "--graph", g, "--q", "1", "--variant", "nope"],
        vec!["exact", "--graph", g, "--q", "1", "--method", "nope"],
        vec!["query", "--graph", g, "--q", "1", "--no-such-flag"],
        vec!["query", "--graph", g],
    ] {
        let out = run(&args);
        assert_eq!(code(&out), 2, "args {args:?}");
    }
}

#[test]
fn data_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_graph(dir.path(), "bridge.txt", &bridged_clique());
    let missing = dir.path().join("missing.txt");
    let out = run(&["query", "--graph", missing.to_str().unwrap(), "--q", "1"]);
    assert_eq!(code(&out), 3);
    let out = run(&["query", "--graph", graph.to_str().unwrap(), "--q", "zz"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("zz"));
}

#[test]
fn index_build_and_query_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_graph(dir.path(), "bridge.txt", &bridged_clique());
    let index = dir.path().join("bridge.tcp");
    let out = run(&[
        "index",
        "build",
        "--graph",
        graph.to_str().unwrap(),
        "--out",
        index.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(doc["nodes"], 15);
    assert_eq!(doc["edges"], 32);
    assert_eq!(doc["max_trussness"], 6);

    let out = run(&[
        "index",
        "query",
        "--graph",
        graph.to_str().unwrap(),
        "--index",
        index.to_str().unwrap(),
        "--q",
        "1,7",
    ]);
    assert_eq!(code(&out), 0);
    let doc = stdout_json(&out);
    let results = doc["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    for result in results {
        assert_eq!(result["k_hat"], 6);
        assert_eq!(sorted(member_labels(result)), CLIQUE);
    }

    // the exact subcommand accepts the same persisted index
    let out = run(&[
        "exact",
        "--graph",
        graph.to_str().unwrap(),
        "--q",
        "1",
        "--method",
        "tcp",
        "--index",
        index.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);

    // an index saved for another graph is rejected as data
    let other = write_graph(dir.path(), "k6.txt", &complete(6));
    let out = run(&[
        "index",
        "query",
        "--graph",
        other.to_str().unwrap(),
        "--index",
        index.to_str().unwrap(),
        "--q",
        "0",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn gen_is_deterministic_and_plants_the_clique() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    let args = |path: &Path| {
        vec![
            "gen".to_string(),
            "--out".into(),
            path.to_str().unwrap().into(),
            "--n".into(),
            "60".into(),
            "--p".into(),
            "0.05".into(),
            "--clique".into(),
            "6".into(),
            "--attach".into(),
            "4".into(),
            "--seed".into(),
            "11".into(),
        ]
    };
    let out = bin().args(args(&a)).output().unwrap();
    assert_eq!(code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(doc["nodes"], 66);
    let planted: Vec<String> = doc["planted"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert_eq!(planted, ["60", "61", "62", "63", "64", "65"]);

    let out = bin().args(args(&b)).output().unwrap();
    assert_eq!(code(&out), 0);
    assert_eq!(
        std::fs::read(&a).unwrap(),
        std::fs::read(&b).unwrap(),
        "same seed, same bytes"
    );

    // the planted clique is the exact answer at a planted node
    let out = run(&["exact", "--graph", a.to_str().unwrap(), "--q", "60"]);
    assert_eq!(code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(sorted(member_labels(&doc["results"][0])), planted);
}

fn strip_runtime_column(csv: &str) -> String {
    csv.lines()
        .map(|line| {
            let cells: Vec<&str> = line.split(',').collect();
            let mut kept: Vec<&str> = cells[..12].to_vec();
            kept.extend(&cells[13..]);
            kept.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn eval_csv_has_the_schema_and_is_deterministic_modulo_runtimes() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_graph(dir.path(), "bridge.txt", &bridged_clique());
    let config_path = dir.path().join("eval.json");
    std::fs::write(
        &config_path,
        serde_json::json!({
            "graph": graph,
            "queries": {"explicit": {"ids": ["1", "7", "3"]}},
            "algorithm": {"walk": {"variant": "tb"}}
        })
        .to_string(),
    )
    .unwrap();

    let rows_path = dir.path().join("rows.csv");
    let run_once = || {
        let out = run(&[
            "eval",
            config_path.to_str().unwrap(),
            "--out",
            rows_path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0);
        // summary lands on stdout when the rows go to a file
        let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(summary["queries"], 3);
        assert_eq!(summary["failed"], 0);
        assert_eq!(summary["mean_precision"], 1.0);
        assert_eq!(summary["density_formula"], "edges/nodes");
        std::fs::read_to_string(&rows_path).unwrap()
    };
    let first = run_once();
    let second = run_once();

    let mut lines = first.lines();
    assert_eq!(
        lines.next().unwrap(),
        "query_id,algo,variant,m,r,alpha,n,precision,recall,f1,diameter,density,runtime_ms,flags"
    );
    assert_eq!(first.lines().count(), 4);
    let row = lines.next().unwrap();
    assert!(row.starts_with("1,walk,tb,2,150,1.0,6,1.0,1.0,1.0,1,2.5,"));
    assert_eq!(strip_runtime_column(&first), strip_runtime_column(&second));
}

#[test]
fn eval_reports_partial_failure_with_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_graph(dir.path(), "bridge.txt", &bridged_clique());
    let config_path = dir.path().join("eval.json");
    std::fs::write(
        &config_path,
        serde_json::json!({
            "graph": graph,
            "queries": {"explicit": {"ids": ["0", "junk"]}},
            "algorithm": {"exact": {"method": "topdown"}},
            "format": "json"
        })
        .to_string(),
    )
    .unwrap();
    let out = run(&["eval", config_path.to_str().unwrap()]);
    assert_eq!(code(&out), 4);
    let doc = stdout_json(&out);
    assert_eq!(doc["summary"]["failed"], 1);
    assert_eq!(doc["rows"][0]["precision"], 1.0);
    assert_eq!(doc["rows"][1]["precision"], Value::Null);
    assert!(doc["rows"][1]["flags"]
        .as_str()
        .unwrap()
        .starts_with("error:"));
}

#[test]
fn eval_rejects_bad_configs_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_graph(dir.path(), "bridge.txt", &bridged_clique());
    let missing = dir.path().join("missing.json");
    assert_eq!(code(&run(&["eval", missing.to_str().unwrap()])), 2);

    let bad_field = dir.path().join("bad_field.json");
    std::fs::write(
        &bad_field,
        serde_json::json!({
            "graph": graph,
            "queries": {"explicit": {"ids": ["1"]}},
            "algorithm": {"walk": {"variant": "tb"}},
            "typo": true
        })
        .to_string(),
    )
    .unwrap();
    assert_eq!(code(&run(&["eval", bad_field.to_str().unwrap()])), 2);

    let oversampled = dir.path().join("oversampled.json");
    std::fs::write(
        &oversampled,
        serde_json::json!({
            "graph": graph,
            "queries": {"random": {"count": 1000, "seed": 1}},
            "algorithm": {"walk": {"variant": "tb"}}
        })
        .to_string(),
    )
    .unwrap();
    assert_eq!(code(&run(&["eval", oversampled.to_str().unwrap()])), 2);
}

#[test]
fn analyze_chain_matches_the_symmetric_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_graph(dir.path(), "bridge.txt", &bridged_clique());
    let out = run(&["analyze", "chain", "--graph", graph.to_str().unwrap(), "--q", "1"]);
    assert_eq!(code(&out), 0);
    let doc = stdout_json(&out);
    assert_eq!(doc["gamma"], 3.0);
    assert_eq!(doc["mu"], 3.0);
    assert_eq!(doc["beta"], 3.0);
    let eigen: Vec<f64> = doc["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert_eq!(eigen, [1.0, -0.5, -0.5]);
    for residual in doc["residuals"].as_array().unwrap() {
        assert!(residual.as_f64().unwrap() < 1e-9);
    }
    for mass in doc["stationary"].as_array().unwrap() {
        assert!((mass.as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-9);
    }

    // complete graph: everything is a key member, so K is empty
    let k6 = write_graph(dir.path(), "k6.txt", &complete(6));
    let out = run(&["analyze", "chain", "--graph", k6.to_str().unwrap(), "--q", "0"]);
    assert_eq!(code(&out), 3);
}

/// Generates the planted instance used by the bayes and pcc tests.
fn gen_planted(dir: &Path, n: &str, p: &str, clique: &str, attach: &str, seed: &str) -> PathBuf {
    let path = dir.join(format!("planted_{n}_{seed}.txt"));
    let out = run(&[
        "gen",
        "--out",
        path.to_str().unwrap(),
        "--n",
        n,
        "--p",
        p,
        "--clique",
        clique,
        "--attach",
        attach,
        "--seed",
        seed,
    ]);
    assert_eq!(code(&out), 0);
    path
}

#[test]
fn analyze_bayes_separates_key_members_on_a_planted_graph() {
    let dir = tempfile::tempdir().unwrap();
    let graph = gen_planted(dir.path(), "200", "0.06", "8", "5", "0");
    let out = run(&["analyze", "bayes", "--graph", graph.to_str().unwrap(), "--q", "0"]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    assert_eq!(doc["k"], 3);
    assert_eq!(doc["k_hat"], 4);
    assert_eq!(doc["community_size"], 191);
    assert_eq!(doc["key_members"], 15);
    let prior = doc["prior"].as_f64().unwrap();
    assert!((prior - 15.0 / 191.0).abs() < 1e-9);
    let key_mean = doc["mean_posterior"]["key_members"].as_f64().unwrap();
    let rest_mean = doc["mean_posterior"]["others"].as_f64().unwrap();
    assert!(
        key_mean > rest_mean + 0.2,
        "posterior should separate the classes: key {key_mean}, rest {rest_mean}"
    );
    assert_eq!(doc["nodes"].as_array().unwrap().len(), 191);
    for node in doc["nodes"].as_array().unwrap() {
        let p = node["posterior"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&p));
    }
}

#[test]
fn analyze_bayes_rejects_degenerate_communities_as_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let graph = write_graph(dir.path(), "bridge.txt", &bridged_clique());
    let out = run(&["analyze", "bayes", "--graph", graph.to_str().unwrap(), "--q", "1"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate"));

    // two query nodes are a usage error, not a data error
    let out = run(&["analyze", "bayes", "--graph", graph.to_str().unwrap(), "--q", "1,2"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn analyze_pcc_correlates_path_length_against_precision() {
    let dir = tempfile::tempdir().unwrap();
    let graph = gen_planted(dir.path(), "120", "0.04", "8", "5", "0");
    let out = run(&[
        "analyze",
        "pcc",
        "--graph",
        graph.to_str().unwrap(),
        "--random",
        "30",
        "--seed",
        "3",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    assert_eq!(doc["queries"], 30);
    let path = &doc["path_length_vs_precision"];
    assert!(path["pairs"].as_u64().unwrap() >= 3);
    assert!(
        path["r"].as_f64().unwrap() < -0.3,
        "longer paths should cost precision: {path}"
    );
    assert!(path["p_value"].as_f64().unwrap() < 0.01);
    let gamma = &doc["gamma_vs_precision"];
    let gamma_pairs = gamma["pairs"].as_u64().unwrap();
    let skipped = doc["skipped"]["no_crossing_edge"].as_u64().unwrap();
    assert_eq!(gamma_pairs + skipped, 30, "every query lands in exactly one bucket");
    assert!(gamma["r"].as_f64().unwrap().abs() <= 1.0);

    // exactly one query source must be chosen
    let g = graph.to_str().unwrap();
    let out = run(&["analyze", "pcc", "--graph", g]);
    assert_eq!(code(&out), 2);
    let out = run(&["analyze", "pcc", "--graph", g, "--q", "0", "--random", "5"]);
    assert_eq!(code(&out), 2);
}
