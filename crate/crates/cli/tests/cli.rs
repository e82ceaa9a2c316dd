use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hypergraphon::solver::SolveReport;
use hypergraphon::stepfn::aligned_l1;
use hypergraphon::{Mode, QuantumGraph, Signature, StepFunction};
use serde_json::Value;
use tempfile::TempDir;

const EDGE_TRIANGLE: &str = r#"{
  "signature": {"arities": [2]},
  "constraints": [
    {"label": "edge", "target": 0.3, "graph": {"n": 2, "edges": [[[0, 1]]]}},
    {"label": "triangle", "target": 0.02, "formula": "forall x,y,z : R1(x,y) and R1(y,z) and R1(z,x)"}
  ]
}"#;

const INFEASIBLE: &str = r#"{
  "signature": {"arities": [2]},
  "constraints": [
    {"target": 0.1, "graph": {"n": 2, "edges": [[[0, 1]]]}},
    {"target": 0.5, "graph": {"n": 3, "edges": [[[0, 1], [1, 2], [0, 2]]]}}
  ]
}"#;

fn hgon(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hgon"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("hgon runs")
}

fn json_file(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))).unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr_error(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    v["error"].clone()
}

fn setup() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("et.json"), EDGE_TRIANGLE).unwrap();
    fs::write(dir.path().join("inf.json"), INFEASIBLE).unwrap();
    dir
}

fn solve_edge_triangle(dir: &Path, out: &str) -> Output {
    hgon(dir, &["--seed", "7", "--out-dir", out, "solve", "--constraints", "et.json", "--restarts", "8"])
}

fn bipodal_z(rho: f64, tau: f64) -> f64 {
    let g = |z: f64| (rho - z) * ((rho - z).powi(2) + 3.0 * (rho + z).powi(2)) / 4.0 - tau;
    let (mut lo, mut hi) = (0.0, rho);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn solve_matches_bipodal_closed_form_and_feeds_consumers() {
    let dir = setup();
    let d = dir.path();
    let out = solve_edge_triangle(d, "run1");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout_json(&out)["status"], "converged");

    let report: SolveReport = serde_json::from_value(json_file(d.join("run1/report.json"))).unwrap();
    let best = report.best_solution().unwrap();
    let z = bipodal_z(0.3, 0.02);
    let target = StepFunction::new(
        Signature::new(vec![2]).unwrap(),
        vec![0.5, 0.5],
        vec![vec![0.3 - z, 0.3 + z, 0.3 + z, 0.3 - z]],
        Mode::GraphonUnit,
    )
    .unwrap();
    assert!(aligned_l1(&best.step, &target).unwrap() < 1e-6);

    let manifest = json_file(d.join("run1/manifest.json"));
    assert_eq!(manifest["command"], "solve");
    assert_eq!(manifest["seed"], 7);
    assert_eq!(manifest["exit_code"], 0);
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    assert!(manifest["input_hashes"]["et.json"].as_str().unwrap().len() == 64);

    let q = hgon(d, &["--out-dir", "q", "query", "--formula", "forall x,y : R1(x,y)", "--solutions", "run1/report.json"]);
    assert!(q.status.success(), "{}", String::from_utf8_lossy(&q.stderr));
    let p = json_file(d.join("q/query.json"))["probability"].as_f64().unwrap();
    assert!((p - 0.3).abs() < 1e-8);

    let fb = hgon(d, &["--out-dir", "fb", "fit-beta", "--stepfn", "run1/report.json", "--constraints", "et.json"]);
    assert!(fb.status.success(), "{}", String::from_utf8_lossy(&fb.stderr));
    let beta: Vec<f64> = serde_json::from_value(json_file(d.join("fb/beta.json"))["beta"].clone()).unwrap();
    for (a, b) in beta.iter().zip(&best.beta_fit) {
        assert!((a - b).abs() < 1e-9);
    }

    let ev = hgon(d, &["--out-dir", "ev", "eval", "--stepfn", "run1/report.json", "--graph", "et.json"]);
    assert!(ev.status.success());
    let t: Vec<f64> = serde_json::from_value(json_file(d.join("ev/density.json"))["densities"].clone()).unwrap();
    assert!((t[0] - 0.3).abs() < 1e-8 && (t[1] - 0.02).abs() < 1e-8);

    let sm = hgon(d, &["--seed", "1", "--out-dir", "sm", "sample", "--stepfn", "run1/report.json", "--n", "25"]);
    assert!(sm.status.success());
    let g = hgon(d, &["--out-dir", "ev2", "eval", "--stepfn", "run1/report.json", "--graph", "sm/graph.json"]);
    assert!(g.status.success(), "{}", String::from_utf8_lossy(&g.stderr));

    let cd = hgon(d, &["--out-dir", "cd", "cut-distance", "--a", "run1/report.json", "--b", "run1/report.json"]);
    assert!(cd.status.success());
    assert_eq!(json_file(d.join("cd/cut_distance.json"))["value"].as_f64(), Some(0.0));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = setup();
    let d = dir.path();
    for out in ["a", "b"] {
        let o = hgon(d, &["--seed", "5", "--out-dir", out, "solve", "--constraints", "et.json", "--restarts", "3"]);
        assert!(o.status.code().is_some_and(|c| c == 0 || c == 3), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(d.join("a/report.json")).unwrap(), fs::read(d.join("b/report.json")).unwrap());
    for out in ["s1", "s2"] {
        let o = hgon(d, &["--seed", "9", "--out-dir", out, "sample", "--stepfn", "a/report.json", "--n", "40"]);
        assert!(o.status.success());
    }
    assert_eq!(fs::read(d.join("s1/graph.json")).unwrap(), fs::read(d.join("s2/graph.json")).unwrap());
}

#[test]
fn compile_u4_gives_three_terms() {
    let dir = setup();
    let out = hgon(
        dir.path(),
        &[
            "compile",
            "--formula",
            "forall x,y : Friends(x,y) => (Sm(x) <=> Sm(y))",
            "--relations",
            "Friends:2,Sm:1",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let q: QuantumGraph = serde_json::from_value(json_file(dir.path().join("quantum_graph.json"))).unwrap();
    let mut shape: Vec<(i64, usize, usize)> = q
        .terms
        .iter()
        .map(|t| (t.coeff.round() as i64, t.graph.edges[0].len(), t.graph.edges[1].len()))
        .collect();
    shape.sort();
    assert_eq!(shape, vec![(-2, 1, 1), (1, 0, 0), (2, 1, 2)]);
    for t in &q.terms {
        assert_eq!(t.coeff, t.coeff.round());
    }
}

#[test]
fn grad_check_on_random_fixtures() {
    let dir = setup();
    let out = hgon(dir.path(), &["--seed", "11", "grad-check", "--random", "40"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["fixtures"], 40);
    assert!(v["max_rel_error"].as_f64().unwrap() < 1e-6, "{v}");
}

#[test]
fn exit_codes_and_error_json() {
    let dir = setup();
    let d = dir.path();

    let inf = hgon(d, &["--out-dir", "inf", "solve", "--constraints", "inf.json", "--m", "2", "--restarts", "2"]);
    assert_eq!(inf.status.code(), Some(2));
    assert_eq!(stderr_error(&inf)["kind"], "infeasible");
    assert!(d.join("inf/report.json").exists());
    assert_eq!(json_file(d.join("inf/manifest.json"))["exit_code"], 2);

    let usage = hgon(d, &["frobnicate"]);
    assert_eq!(usage.status.code(), Some(1));
    assert_eq!(stderr_error(&usage)["kind"], "usage");

    let missing = hgon(d, &["--out-dir", "miss", "solve", "--constraints", "nope.json"]);
    assert_eq!(missing.status.code(), Some(1));
    assert_eq!(stderr_error(&missing)["kind"], "io");
    assert!(d.join("miss/manifest.json").exists());

    let syntax = hgon(d, &["compile", "--formula", "forall x Sm(x)", "--relations", "Sm:1"]);
    assert_eq!(syntax.status.code(), Some(4));
    let err = stderr_error(&syntax);
    assert_eq!(err["kind"], "syntax_error");
    assert_eq!(err["position"], 9);

    fs::write(d.join("bad.json"), r#"{"signature": {"arities": [2]}, "constraints": [{"target": 0.5}]}"#).unwrap();
    let bad = hgon(d, &["solve", "--constraints", "bad.json"]);
    assert_eq!(bad.status.code(), Some(4));

    let help = hgon(d, &["--help"]);
    assert!(help.status.success());
}

#[test]
fn m0_reports_integer_or_infeasible() {
    let dir = setup();
    let d = dir.path();
    let ok = hgon(d, &["--out-dir", "m", "m0", "--constraints", "et.json"]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    assert_eq!(stdout_json(&ok)["m0"], 2);
    let witness = hgon(d, &["--out-dir", "w", "eval", "--stepfn", "m/m0.json", "--graph", "et.json"]);
    assert!(witness.status.success());

    let bad = hgon(d, &["m0", "--constraints", "inf.json", "--m-max", "2"]);
    assert_eq!(bad.status.code(), Some(2));
}
