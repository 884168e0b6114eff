use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dtangle(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtangle")).current_dir(dir).args(args).output().expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gen_wall_writes_a_valid_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dtangle(dir.path(), &["gen-wall", "--k", "4", "-o", "wall.json"]);
    assert!(out.status.success());
    let g = json(&dir.path().join("wall.graph.json"));
    assert_eq!(g["vertices"].as_array().unwrap().len(), 48);
    let w = json(&dir.path().join("wall.json"));
    assert_eq!(w["order"], 4);
    assert!(w["paths"]["P1"].is_array());
    let ok = dtangle(dir.path(), &["verify", "--what", "wall", "--graph", "wall.graph.json", "--cert", "wall.json"]);
    assert!(ok.status.success());
    assert_eq!(String::from_utf8_lossy(&ok.stdout).trim(), r#"{"ok":true}"#);
}

#[test]
fn broken_wall_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    dtangle(dir.path(), &["gen-wall", "--k", "3", "-o", "wall.json"]);
    let mut w = json(&dir.path().join("wall.json"));
    let c = w["cycles"][0].as_array_mut().unwrap();
    c.swap(0, 1);
    std::fs::write(dir.path().join("bad.json"), w.to_string()).unwrap();
    let out = dtangle(dir.path(), &["verify", "--what", "wall", "--graph", "wall.graph.json", "--cert", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"ok\":false"));
}

#[test]
fn generation_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("spec.json"), r#"{"sizes": [4, 5, 4], "random_edges": 6}"#).unwrap();
    for name in ["a.json", "b.json"] {
        let out = dtangle(dir.path(), &["--seed", "9", "gen-clusters", "--spec", "spec.json", "-o", name]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(dir.path().join("a.json")).unwrap(), std::fs::read(dir.path().join("b.json")).unwrap());
}

#[test]
fn five_clusters_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(dtangle(d, &["gen-clusters", "--preset", "five", "-o", "g.json", "--certs", "c.json"]).status.success());
    assert!(dtangle(d, &["label", "--graph", "g.json", "--certs", "c.json", "-o", "lab.json", "--dot", "lab.dot"]).status.success());
    assert!(dtangle(d, &["verify", "--what", "labelling", "--graph", "g.json", "--cert", "lab.json", "--certs", "c.json"]).status.success());
    assert!(dtangle(d, &["decompose", "--graph", "g.json", "--certs", "c.json", "--k", "3", "-o", "dec.json"]).status.success());
    assert!(dtangle(d, &["verify", "--what", "decomposition", "--graph", "g.json", "--cert", "dec.json", "--certs", "c.json"]).status.success());
    assert!(json(&d.join("dec.json"))["edge_width"].as_u64().unwrap() <= 15);
    let t = dtangle(d, &["tangles", "--graph", "g.json", "--order", "3"]);
    assert!(t.status.success());
    let found: Value = serde_json::from_slice(&t.stdout).unwrap();
    assert_eq!(found.as_array().unwrap().len(), 5);
}

#[test]
fn min_sep_on_a_path() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("g.txt"), "a b\nb c\n").unwrap();
    let out = dtangle(dir.path(), &["min-sep", "--graph", "g.txt", "--from", "a", "--to", "c"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["order"], 1);
    assert!(v["separation"]["in"].as_array().unwrap().iter().any(|x| x == "a"));
}

#[test]
fn hndp_verdicts_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("g.json"), r#"{"vertices": ["s1","s2","x","t1","t2"], "edges": [["s1","x"],["s2","x"],["x","t1"],["x","t2"]]}"#).unwrap();
    std::fs::write(d.join("one.json"), r#"[["s1","t1"]]"#).unwrap();
    std::fs::write(d.join("two.json"), r#"[["s1","t1"],["s2","t2"]]"#).unwrap();
    let out = dtangle(d, &["hndp", "--graph", "g.json", "--pairs", "one.json", "-o", "h.json"]);
    assert!(out.status.success());
    assert_eq!(json(&d.join("h.json"))["verdict"], "half-integral");
    assert!(dtangle(d, &["verify", "--what", "paths", "--graph", "g.json", "--cert", "h.json", "--pairs", "one.json"]).status.success());
    let out = dtangle(d, &["hndp", "--graph", "g.json", "--pairs", "two.json"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "no-integral");

    std::fs::write(d.join("bad.json"), r#"{"vertices": ["a"], "edges": [["a","b"]]}"#).unwrap();
    let out = dtangle(d, &["hndp", "--graph", "bad.json", "--pairs", "one.json"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["message"].as_str().unwrap().contains("dangling endpoint b"));
}

#[test]
fn hndp_budget_abort_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // Too large for the exact fallback once the guesses run out.
    std::fs::write(d.join("spec.json"), r#"{"sizes": [7, 7, 7, 7, 7, 7, 7], "random_edges": 30}"#).unwrap();
    assert!(dtangle(d, &["gen-clusters", "--spec", "spec.json", "-o", "g.json"]).status.success());
    std::fs::write(d.join("p.json"), r#"[["a2","b2"],["c3","d3"],["e4","f4"]]"#).unwrap();
    let out = dtangle(d, &["hndp", "--graph", "g.json", "--pairs", "p.json", "--tangle-order", "1", "--budget", "0"]);
    assert_eq!(out.status.code(), Some(3));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "aborted");
}

#[test]
fn route_in_generated_wall() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(dtangle(d, &["gen-wall", "--k", "9", "-o", "w.json"]).status.success());
    let w = json(&d.join("w.json"));
    let p1 = &w["paths"]["P1"];
    let p2 = &w["paths"]["P2"];
    let first = |r: &Value| r.as_array().unwrap().first().unwrap().clone();
    let last = |r: &Value| r.as_array().unwrap().last().unwrap().clone();
    let pairs = serde_json::json!([[first(&p1[0]), last(&p2[1])], [first(&p2[3]), last(&p1[4])], [first(&p1[2]), last(&p1[5])]]);
    std::fs::write(d.join("p.json"), pairs.to_string()).unwrap();
    let out = dtangle(d, &["route", "--graph", "w.graph.json", "--wall", "w.json", "--pairs", "p.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["congestion"].as_u64().unwrap() <= 2);
}
