use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn coxsub(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coxsub")).args(args).output().unwrap()
}

fn write_spec(dir: &Path, name: &str, spec: &Value) -> String {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string(spec).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn a2_spec(expression: &[&str], target: Value) -> Value {
    json!({
        "coxeter_matrix": [[1, 3], [3, 1]],
        "generators": ["s", "t"],
        "expression": expression,
        "target": target,
    })
}

#[test]
fn empty_expression_gives_a_single_node() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "empty.json", &a2_spec(&[], json!([])));
    let out = coxsub(&["graph", "--spec", &spec, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dot = fs::read_to_string(dir.path().join("graph_0.dot")).unwrap();
    assert_eq!(dot.matches("[label=").count(), 1);
    assert!(!dot.contains("--"));
    let stats: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("stats.json")).unwrap()).unwrap();
    assert_eq!(stats["graphs"][0]["vertices"], 1);
    assert_eq!(stats["graphs"][0]["edges"], 0);
}

#[test]
fn alternating_word_counts() {
    // of the 16 subsequences of (s,t,s,t), exactly 0000, 1010 and 0101 multiply to e
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "stst.json", &a2_spec(&["s", "t", "s", "t"], json!([])));
    let out = coxsub(&["graph", "--spec", &spec, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report = stdout_json(&out);
    let g = &report["graphs"][0];
    assert_eq!((g["vertices"].as_u64(), g["edges"].as_u64(), g["dim"].as_u64()), (Some(3), Some(2), Some(0)));
    let dot = fs::read_to_string(dir.path().join("graph_0.dot")).unwrap();
    for bits in ["0000", "1010", "0101"] {
        assert!(dot.contains(&format!("label=\"{bits}\"")), "{dot}");
    }
    assert_eq!(dot.matches(" -- ").count(), 2);

    // every target class
    let spec = write_spec(dir.path(), "all.json", &a2_spec(&["s", "t", "s", "t"], json!("all")));
    let out = coxsub(&["graph", "--spec", &spec, "--out", dir.path().to_str().unwrap()]);
    let report = stdout_json(&out);
    let total: u64 = report["graphs"].as_array().unwrap().iter().map(|g| g["vertices"].as_u64().unwrap()).sum();
    assert_eq!(total, 16);
}

#[test]
fn pentagon_job() {
    let dir = tempfile::tempdir().unwrap();
    let word = ["a", "b", "c", "a", "c", "a", "b", "c", "b", "a", "c", "b", "a"];
    let spec = json!({
        "coxeter_matrix": [[1, 3, 3], [3, 1, 3], [3, 3, 1]],
        "generators": ["a", "b", "c"],
        "expression": word,
        "target": word,
    });
    let spec = write_spec(dir.path(), "pentagon.json", &spec);
    let out = coxsub(&["graph", "--spec", &spec, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let dot = fs::read_to_string(dir.path().join("graph_0.dot")).unwrap();
    // the whole class: 88 subexpressions, 277 double folds
    assert_eq!(dot.matches("[label=").count() - dot.matches(" -- ").count(), 88);
    assert_eq!(dot.matches(" -- ").count(), 277);
    for v in ["1111111111111", "0111111011111", "0111011011011", "1011111111011", "0011011111011"] {
        assert!(dot.contains(&format!("label=\"{v}\"")));
    }
}

#[test]
fn output_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let spec = json!({"coxeter_matrix": [[1, 4], [4, 1]], "expression": ["s1", "s2", "s1", "s2", "s1", "s2", "s1"]});
    let spec = write_spec(a.path(), "b2.json", &spec);
    let run = |dir: &Path| coxsub(&["graph", "--spec", &spec, "--out", dir.to_str().unwrap(), "--jobs", "2"]);
    let (oa, ob) = (run(a.path()), run(b.path()));
    assert_eq!(oa.stdout, ob.stdout);
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    for name in names.iter().filter(|n| n.to_str().unwrap() != "b2.json") {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name:?}");
    }
    let v1 = coxsub(&["verify", "decompose", "--spec", &spec]);
    let v2 = coxsub(&["verify", "decompose", "--spec", &spec]);
    assert_eq!(v1.stdout, v2.stdout);
}

#[test]
fn certificates_replay_and_corruption_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let spec = json!({"coxeter_matrix": [[1, 4], [4, 1]], "expression": ["s1", "s2", "s1", "s2", "s1", "s2", "s1", "s2"]});
    let spec = write_spec(dir.path(), "b2.json", &spec);
    let out_dir = dir.path().to_str().unwrap();
    let out = coxsub(&["verify", "decompose", "--spec", &spec, "--out", out_dir]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report_path = dir.path().join("report.json");
    let good = coxsub(&["verify", "decompose", "--spec", &spec, "--certificate", report_path.to_str().unwrap()]);
    assert_eq!(good.status.code(), Some(0), "{}", String::from_utf8_lossy(&good.stdout));

    let mut report: Value = serde_json::from_str(&fs::read_to_string(&report_path).unwrap()).unwrap();
    let graphs = report["certificate"]["graphs"].as_array_mut().unwrap();
    let entries = graphs
        .iter_mut()
        .flat_map(|g| g["cycles"].as_array_mut().unwrap().iter_mut())
        .map(|c| c["entries"].as_array_mut().unwrap())
        .find(|e| !e.is_empty())
        .expect("some cycle has a nonempty decomposition");
    entries.pop();
    let bad_path = dir.path().join("bad.json");
    fs::write(&bad_path, serde_json::to_string(&report).unwrap()).unwrap();
    let bad = coxsub(&["verify", "decompose", "--spec", &spec, "--certificate", bad_path.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
    let rep = stdout_json(&bad);
    assert_eq!(rep["passed"], false);
    assert!(rep["failure"].is_object());
}

#[test]
fn usage_and_parse_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(coxsub(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(coxsub(&["graph"]).status.code(), Some(2));
    assert_eq!(coxsub(&["verify", "span", "--type", "Q7"]).status.code(), Some(2));
    assert_eq!(coxsub(&["table1", "E9"]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(coxsub(&["graph", "--spec", missing.to_str().unwrap()]).status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(coxsub(&["graph", "--spec", bad.to_str().unwrap()]).status.code(), Some(2));
    let asym = write_spec(dir.path(), "asym.json", &json!({"coxeter_matrix": [[1, 3], [4, 1]], "expression": []}));
    assert_eq!(coxsub(&["graph", "--spec", &asym, "--out", dir.path().to_str().unwrap()]).status.code(), Some(2));
    let unknown = write_spec(dir.path(), "unknown.json", &a2_spec(&["s", "u"], json!("all")));
    assert_eq!(coxsub(&["graph", "--spec", &unknown, "--out", dir.path().to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(coxsub(&["--help"]).status.code(), Some(0));
}

#[test]
fn infinity_is_accepted_as_a_string() {
    let dir = tempfile::tempdir().unwrap();
    let spec = json!({"coxeter_matrix": [[1, "inf"], ["inf", 1]], "expression": ["s1", "s2", "s1", "s2", "s1", "s2"]});
    let spec = write_spec(dir.path(), "inf.json", &spec);
    let out = coxsub(&["verify", "connectivity", "--spec", &spec]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["passed"], true);
}

#[test]
fn table1_rank_one() {
    let out = coxsub(&["table1", "A1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let rep = stdout_json(&out);
    assert_eq!(rep["observed"], json!([3]));
    assert_eq!(rep["expected"], json!([3]));
}

#[test]
fn span_sweep_b2() {
    let out = coxsub(&["verify", "span", "--type", "B2", "--max-len", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let rep = stdout_json(&out);
    assert_eq!(rep["passed"], true);
    let lengths: Vec<u64> = rep["lengths"].as_object().unwrap().keys().map(|k| k.parse().unwrap()).collect();
    assert!(lengths.iter().all(|l| [3, 4, 6].contains(l)), "{lengths:?}");
}

#[test]
fn connectivity_sweep_a3() {
    let out = coxsub(&["verify", "connectivity", "--type", "A3", "--max-len", "7"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["passed"], true);
}
