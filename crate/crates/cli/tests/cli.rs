use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tree-cvrp")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn gen_solve_verify() {
    let dir = tempfile::tempdir().unwrap();
    let inst = path(dir.path(), "i.json");
    ok(&["gen", "--family", "random-binary", "--terminals", "7", "--k", "3", "--seed", "5", "-o", &inst]);
    let mut costs = Vec::new();
    for algo in ["exact", "itp", "greedy"] {
        let sol = path(dir.path(), &format!("{algo}.json"));
        ok(&["solve", &inst, "--algo", algo, "-o", &sol]);
        let v: Value = serde_json::from_str(&ok(&["verify", &inst, &sol])).unwrap();
        assert_eq!(v["feasible"], true);
        costs.push(v["cost"].as_str().unwrap().parse::<u64>().unwrap());
    }
    let sol = path(dir.path(), "ptas.json");
    ok(&["solve", &inst, "--algo", "ptas", "--exhaustive", "-o", &sol]);
    let v: Value = serde_json::from_str(&ok(&["verify", &inst, &sol])).unwrap();
    assert_eq!(v["cost"].as_str().unwrap().parse::<u64>().unwrap(), costs[0]);
    assert!(costs.iter().all(|&c| c >= costs[0]));
}

#[test]
fn star_example() {
    let dir = tempfile::tempdir().unwrap();
    let inst = path(dir.path(), "s.json");
    ok(&["gen", "--family", "star", "--weights", "1,1,4", "--k", "2", "-o", &inst]);
    let v: Value = serde_json::from_str(&ok(&["solve", &inst, "--algo", "exact"])).unwrap();
    assert_eq!(v["metadata"]["cost"], "12");
    let lb: Value = serde_json::from_str(&ok(&["lb", &inst])).unwrap();
    assert_eq!(lb["edge_ceiling"], "12");
    assert_eq!(lb["tree_tsp"], "12");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let inst = path(dir.path(), "i.json");
    ok(&["gen", "--family", "random-tree", "--n", "30", "--max-demand", "1", "--k", "2", "-o", &inst]);
    assert_eq!(run(&["solve", &inst, "--algo", "nope"]).status.code(), Some(1));
    assert_eq!(run(&["solve"]).status.code(), Some(2));
    assert_eq!(run(&["verify", &inst, &path(dir.path(), "missing.json")]).status.code(), Some(1));
    // the exact oracle gives up past its state budget
    let big = path(dir.path(), "big.json");
    ok(&["gen", "--family", "random-binary", "--terminals", "40", "--k", "3", "-o", &big]);
    let out = Command::new(env!("CARGO_BIN_EXE_tree-cvrp"))
        .args(["solve", &big, "--algo", "exact"])
        .env("TREE_CVRP_BUDGETS", "config_states=1000")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn infeasible_solution_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let inst = path(dir.path(), "s.json");
    ok(&["gen", "--family", "star", "--weights", "1,2", "--k", "1", "-o", &inst]);
    let full: Value = serde_json::from_str(&ok(&["solve", &inst, "--algo", "itp"])).unwrap();
    let mut partial = full.clone();
    partial["tours"].as_array_mut().unwrap().pop();
    partial["cost"] = "2".into();
    let sol = path(dir.path(), "bad.json");
    std::fs::write(&sol, partial.to_string()).unwrap();
    let out = run(&["verify", &inst, &sol]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["feasible"], false);
    // a stated cost that does not match is rejected before verification
    partial["cost"] = "6".into();
    std::fs::write(&sol, partial.to_string()).unwrap();
    let out = run(&["verify", &inst, &sol]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("stated cost"));
}

#[test]
fn byte_identical_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = path(dir.path(), "a.json");
    let b = path(dir.path(), "b.json");
    for p in [&a, &b] {
        ok(&["gen", "--family", "random-tree", "--n", "14", "--k", "3", "--seed", "8", "-o", p]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let args = ["solve", &a, "--algo", "itp", "--bands", "2", "--offset", "random:3"];
    assert_eq!(ok(&args), ok(&args));
    let bench = ["bench", "--count", "6", "--terminals", "6", "--algos", "exact,itp,greedy,ptas", "--exhaustive"];
    let first = ok(&bench);
    assert_eq!(first, ok(&bench));
    let ja = path(dir.path(), "ra.json");
    let jb = path(dir.path(), "rb.json");
    ok(&[&bench[..], &["--json", &ja]].concat());
    ok(&[&bench[..], &["--json", &jb]].concat());
    assert_eq!(std::fs::read(&ja).unwrap(), std::fs::read(&jb).unwrap());
}

#[test]
fn decompose_and_transform() {
    let dir = tempfile::tempdir().unwrap();
    let inst = path(dir.path(), "c.json");
    ok(&["gen", "--family", "caterpillar", "--len", "6", "--k", "2", "-o", &inst]);
    let d: Value = serde_json::from_str(&ok(&["decompose", &inst, "--gamma-k", "4"])).unwrap();
    assert!(d.to_string().contains("\"ok\":true"), "{d}");
    ok(&["transform", &inst, "hat", "--gamma-k", "4", "--d-tilde", "1"]);
    ok(&["transform", &inst, "bands", "--inv-eps", "2"]);
    assert_eq!(run(&["decompose", &inst, "--gamma-k", "1"]).status.code(), Some(1));
}
