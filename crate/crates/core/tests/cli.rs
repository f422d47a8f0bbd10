use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use pdrcon::cli;
use pdrcon::nalgebra::DMatrix;
use pdrcon::sim::sample_gaussian;

fn run(args: &[&str]) -> anyhow::Result<String> {
    let mut out = Vec::new();
    cli::run(std::iter::once("pdrcon").chain(args.iter().copied()), &mut out)?;
    Ok(String::from_utf8(out).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const UNIT4: &str = r#"{"p":4,"edges":[[1,2],[1,3],[1,4],[2,3],[2,4],[3,4]],"LL":[1,2],"EE":[[1,2],[1,4]]}"#;

/// Data from a six-variable model with one asymmetric edge.
fn data_csv(dir: &Path) -> PathBuf {
    let mut theta = DMatrix::identity(6, 6) * 2.0;
    for (i, j, v) in [(0, 1, 0.6), (3, 4, 0.6), (0, 3, 0.5), (1, 2, -0.7)] {
        theta[(i, j)] = v;
        theta[(j, i)] = v;
    }
    let data = sample_gaussian(&theta, 150, 8).unwrap();
    let text = pdrcon::io::write_matrix_csv(&data, None).unwrap();
    write(dir, "data.csv", &text)
}

#[test]
fn count() {
    assert_eq!(run(&["count", "-p", "4"]).unwrap().trim(), "400");
    assert_eq!(run(&["count", "-p", "6"]).unwrap().trim(), "1000000");
    let err = run(&["count", "-p", "3"]).unwrap_err().to_string();
    assert!(err.contains("p must be even"), "{err}");
}

#[test]
fn neighbours_and_layers() {
    let dir = tempfile::tempdir().unwrap();
    let unit = write(dir.path(), "unit.json", UNIT4);
    let all = run(&["neighbours", s(&unit)]).unwrap();
    assert_eq!(all.lines().count(), 11, "{all}");
    assert_eq!(all.lines().filter(|l| l.contains("\tlower\t")).count(), 4);
    let upper = run(&["neighbours", s(&unit), "--layer", "upper"]).unwrap();
    assert_eq!(upper.lines().count(), 7);

    let zero = write(dir.path(), "zero.json", r#"{"p":4,"edges":[],"LL":[],"EE":[]}"#);
    assert_eq!(run(&["neighbours", s(&zero)]).unwrap().lines().count(), 1);

    let dot = dir.path().join("h.dot");
    run(&["neighbours", s(&unit), "--dot", s(&dot)]).unwrap();
    assert!(fs::read_to_string(&dot).unwrap().starts_with("digraph"));

    let broken = write(dir.path(), "broken.json", "{\"p\": 4,\n \"edges\": [[1,2],\n");
    let err = format!("{:#}", run(&["neighbours", s(&broken)]).unwrap_err());
    assert!(err.contains("line"), "{err}");
}

#[test]
fn convert_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let unit = write(dir.path(), "unit.json", UNIT4);
    let classes = run(&["convert", s(&unit), "--to", "classes"]).unwrap();
    let back = write(dir.path(), "classes.json", &classes);
    let quad = run(&["convert", s(&back)]).unwrap();
    let again = write(dir.path(), "again.json", &quad);
    assert_eq!(run(&["convert", s(&again)]).unwrap(), quad);
    assert!(run(&["convert", s(&unit), "--to", "dot"]).unwrap().contains("graph"));
}

#[test]
fn fit_reports() {
    let dir = tempfile::tempdir().unwrap();
    let unit = write(dir.path(), "unit.json", UNIT4);
    let cov = write(dir.path(), "cov.csv", "2,0.5,0.1,0\n0.5,2,0,0.1\n0.1,0,2,0.5\n0,0.1,0.5,2\n");
    let report = dir.path().join("fit.json");
    let out = run(&["fit", s(&unit), "--cov", s(&cov), "-n", "50", "--out", s(&report)]).unwrap();
    assert!(out.contains("df\t0"));
    assert!(out.contains("p_value\t1.000000"));
    assert!(out.contains("accepted\ttrue"));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["manifest"]["command"], "fit");
    assert_eq!(json["manifest"]["inputs"].as_array().unwrap().len(), 2);
    assert_eq!(json["result"]["fit"]["df"], 0);

    let bad = write(dir.path(), "bad.csv", "1,2,0,0\n2,1,0,0\n0,0,1,0\n0,0,0,1\n");
    let err = run(&["fit", s(&unit), "--cov", s(&bad), "-n", "50"]).unwrap_err().to_string();
    assert!(err.contains("positive definite"), "{err}");
}

#[test]
fn select_is_deterministic_across_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let data = data_csv(dir.path());
    let mut traces = Vec::new();
    let mut models = Vec::new();
    for jobs in ["1", "4"] {
        let trace = dir.path().join(format!("trace{jobs}.json"));
        let model = dir.path().join(format!("model{jobs}.json"));
        run(&["select", "--data", s(&data), "--jobs", jobs, "--trace", s(&trace), "--out", s(&model)]).unwrap();
        let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&trace).unwrap()).unwrap();
        traces.push(json["result"]["steps"].clone());
        models.push(fs::read_to_string(&model).unwrap());
    }
    assert_eq!(traces[0], traces[1]);
    assert_eq!(models[0], models[1]);

    let fitted = |procedure: &str| -> usize {
        let out = run(&["select", "--data", s(&data), "--procedure", procedure]).unwrap();
        let line = out.lines().find(|l| l.starts_with("fitted_models")).unwrap();
        line.split('\t').nth(1).unwrap().parse().unwrap()
    };
    assert!(fitted("coherent") <= fitted("naive"));

    let trace = dir.path().join("short.json");
    run(&["select", "--data", s(&data), "--max-steps", "1", "--trace", s(&trace)]).unwrap();
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&trace).unwrap()).unwrap();
    assert!(json["result"]["steps"].as_array().unwrap().len() <= 2);
}

#[test]
fn simulate_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let unit = write(dir.path(), "unit.json", UNIT4);
    let data = dir.path().join("sim.csv");
    let theta = dir.path().join("theta.csv");
    let out = run(&["simulate", "--model", s(&unit), "-n", "40", "--seed", "3", "--out", s(&data), "--theta", s(&theta)])
        .unwrap();
    assert!(out.contains("seed\t3"));
    let first = fs::read_to_string(&data).unwrap();
    assert_eq!(first.lines().count(), 41);
    run(&["simulate", "--model", s(&unit), "-n", "40", "--seed", "3", "--out", s(&data)]).unwrap();
    assert_eq!(fs::read_to_string(&data).unwrap(), first);
    assert!(run(&["fit", s(&unit), "--data", s(&data)]).unwrap().contains("accepted\ttrue"));
}

const SPEC: &str = r#"{"name": "small", "p": 4,
  "structure": {"kind": "counts", "edges": 3, "twin_links": 1, "twin_pairs": 1, "atomic_edge_pairs": 0, "atomic_vertices": 1},
  "n": 60, "replicates": 3, "seed": 5}"#;

#[test]
fn bench_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.json", SPEC);
    let csv = dir.path().join("a.csv");
    let out = run(&["bench", s(&spec), "--omit-timing", "--csv", s(&csv), "--jobs", "2"]).unwrap();
    let header = out.lines().next().unwrap();
    assert_eq!(header, "scenario,p,procedure,#edges,#edges_sd,ePPV%,eTPR%,eTNR%,#sym,#sym_sd,sPPV%,sTPR%,sTNR%,Time(s),#models");
    assert_eq!(out.lines().count(), 3);
    let again = run(&["bench", s(&spec), "--omit-timing", "--jobs", "1"]).unwrap();
    assert_eq!(out, again);
    assert_eq!(fs::read_to_string(&csv).unwrap(), out);

    let empty = write(dir.path(), "empty.json", &SPEC.replace("\"replicates\": 3", "\"replicates\": 0"));
    assert_eq!(run(&["bench", s(&empty)]).unwrap().trim(), header);

    let bad = write(dir.path(), "bad.json", &SPEC.replace("\"twin_pairs\": 1", "\"twin_pairs\": 9"));
    let err = format!("{:#}", run(&["bench", s(&bad)]).unwrap_err());
    assert!(err.contains("twin_pairs"), "{err}");
    let unknown = write(dir.path(), "unknown.json", &SPEC.replace("\"n\": 60", "\"samples\": 60"));
    let err = format!("{:#}", run(&["bench", s(&unknown)]).unwrap_err());
    assert!(err.contains("samples"), "{err}");
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_pdrcon");
    let ok = Command::new(bin).args(["count", "-p", "4"]).output().unwrap();
    assert!(ok.status.success());
    assert_eq!(String::from_utf8_lossy(&ok.stdout).trim(), "400");
    let bad = Command::new(bin).args(["count", "-p", "5"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("error"));
    let usage = Command::new(bin).arg("frobnicate").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
    let env_alpha = Command::new(bin).env("PDRCON_ALPHA", "2").args(["select", "--cov", "x.csv", "-n", "5"]).output().unwrap();
    assert_eq!(env_alpha.status.code(), Some(1));
}
