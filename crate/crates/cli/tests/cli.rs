use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn reeb4(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reeb4")).args(args).output().expect("binary runs")
}

fn json_of(args: &[&str]) -> Value {
    let out = reeb4(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn input(name: &str) -> String {
    data(name).to_string_lossy().into_owned()
}

#[test]
fn analyze_reports_lattice_and_volume() {
    let v = json_of(&["analyze", "--input", &input("24-cell.json")]);
    assert_eq!(v["counts"], serde_json::json!([24, 96, 96, 24]));
    assert_eq!(v["symplectic"], true);
    assert_eq!(v["volume"], "2");
    assert_eq!(v["one_faces"]["good"], 96);

    let v = json_of(&["analyze", "--input", &input("standard-simplex.json")]);
    assert_eq!(v["symplectic"], false);
    assert!(!v["lagrangian_faces"].as_array().unwrap().is_empty());
    assert_eq!(v["translation"], serde_json::json!(["-1/5", "-1/5", "-1/5", "-1/5"]));

    let v = json_of(&["analyze", "--input", &input("hypercube.json")]);
    assert_eq!(v["symplectic"], false);
}

#[test]
fn capacities_of_the_24_cell() {
    assert_eq!(json_of(&["ehz", "--input", &input("24-cell.json")])["ehz"], "2");
    assert_eq!(json_of(&["sys", "--input", &input("24-cell.json")])["sys"], "1");
    assert_eq!(json_of(&["zoll", "--input", &input("24-cell.json")])["verdict"], "Certified");
    let v = json_of(&["ak", "--input", &input("24-cell.json"), "--action-max", "3", "--per-3face-cap", "1"]);
    assert_eq!(v["l_nondegenerate"]["holds"], false);
}

#[test]
fn lagrangian_faces_need_a_flag() {
    let out = reeb4(&["sys", "--input", &input("zoll-6.json")]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Lagrangian"));
    let v = json_of(&["sys", "--input", &input("zoll-6.json"), "--avoid-lagrangian"]);
    assert_eq!(v["sys"], "1");
    let v = json_of(&["zoll", "--input", &input("zoll-6.json"), "--avoid-lagrangian"]);
    assert_eq!(v["verdict"], "Certified");
}

#[test]
fn perturbation_is_deterministic() {
    let args = ["sys", "--input", &input("standard-simplex.json"), "--perturb", "1/1000", "--seed", "3"];
    let a = reeb4(&args);
    let b = reeb4(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(v["perturbed_vertices"].is_array());
}

#[test]
fn orbit_output_is_byte_identical_across_runs() {
    let args = ["orbits", "--input", &input("zoll-7.json"), "--avoid-lagrangian", "--action-max", "1"];
    let a = reeb4(&args);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, reeb4(&args).stdout);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(reeb4(&["analyze"]).status.code(), Some(2));
    assert_eq!(reeb4(&["orbits", "--input", &input("24-cell.json")]).status.code(), Some(2));
    assert_eq!(reeb4(&["ak", "--input", &input("24-cell.json")]).status.code(), Some(2));
    assert_eq!(reeb4(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(reeb4(&["ehz", "--input", &input("24-cell.json"), "--action-max", "x"]).status.code(), Some(2));
}

#[test]
fn parse_and_degenerate_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"vertices\": [[1, 2, 3]]}").unwrap();
    let out = reeb4(&["analyze", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("vertices[0]"));

    std::fs::write(&bad, "{\"vertices\": [[0,0,0,0], [1,0,0,0], [0,1,0,0], [0,0,1,0], [1,1,1,0]]}").unwrap();
    assert_eq!(reeb4(&["analyze", "--input", bad.to_str().unwrap()]).status.code(), Some(4));

    std::fs::write(&bad, "{\"vertices\": [[0,0,0,0],\n oops]}").unwrap();
    let out = reeb4(&["analyze", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn output_file_and_text_format() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ehz.txt");
    let out = reeb4(&["ehz", "--input", &input("24-cell.json"), "--format", "text", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.lines().any(|l| l == "ehz: 2"));
}

#[test]
fn graph_dump() {
    let v = json_of(&["graph", "--input", &input("24-cell.json")]);
    assert_eq!(v["edges"].as_array().unwrap().len(), 96);
    assert_eq!(v["nodes"].as_array().unwrap().len(), 96);
}

#[test]
fn search_from_a_perturbed_simplex_improves_monotonically() {
    let v = json_of(&[
        "search", "--input", &input("standard-simplex.json"), "--perturb", "1/100", "--iters", "20", "--seed", "1",
    ]);
    let trace = v["trace"].as_array().unwrap();
    let best: Vec<f64> = trace.iter().map(|t| t[2].as_f64().unwrap()).collect();
    assert!(best.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(*best.last().unwrap(), v["best_sys_float"].as_f64().unwrap());
}

#[test]
fn random_search_runs() {
    let v = json_of(&["search", "--vertices", "5", "--iters", "10", "--restarts", "2", "--seed", "4"]);
    assert_eq!(v["runs"].as_array().unwrap().len(), 2);
    assert!(v["best_sys_float"].as_f64().unwrap() <= 1.0);
}
