use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn twistcyl(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twistcyl"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("failed to launch twistcyl")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_headline_run_passes_with_the_chain_in_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = twistcyl(dir.path(), &["verify", "--pattern", "P1", "--epsilon", "0.1", "--report", "v.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&dir.path().join("v.json"));
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["passed"], true);
    let p = &v["projection"]["value"];
    let chain = p["c1_plus_c2"].as_f64().unwrap();
    assert!(chain >= 2.0 - 0.02 && chain <= p["lambda"].as_f64().unwrap() + 1e-6);
    assert!(v["isometry"]["value"]["max_gram_defect"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn coincident_layers_fail_the_embedding_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let out = twistcyl(dir.path(), &["verify", "--layer-gap", "0", "--report", "v.json"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&dir.path().join("v.json"));
    assert_eq!(v["embedded"]["passed"], false);
    assert_eq!(v["embedded"]["value"]["intersects"], true);
}

#[test]
fn invalid_configuration_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.cfg"), "no_such_key = 1\n").unwrap();
    for args in [
        &["verify", "--epsilon", "0.6"][..],
        &["build", "--epsilon", "0"],
        &["verify", "--pattern", "P7"],
        &["verify", "--layer-gap", "-1"],
        &["verify", "--layer-gap", "5"],
        &["sweep", "--epsilons", "0.1,0.2"],
        &["verify", "--config", "bad.cfg"],
        &["verify", "--config", "missing.cfg"],
    ] {
        let out = twistcyl(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn build_exports_mesh_and_mirror_flips_the_linking_sign() {
    let dir = tempfile::tempdir().unwrap();
    let mut signs = Vec::new();
    for p in ["P1", "P1m"] {
        let obj = format!("{p}.obj");
        let rep = format!("{p}.json");
        let out = twistcyl(dir.path(), &["build", "--pattern", p, "--epsilon", "0.1", "--out", &obj, "--report", &rep]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let text = std::fs::read_to_string(dir.path().join(&obj)).unwrap();
        assert!(text.lines().any(|l| l.starts_with("f ")));
        let v = json(&dir.path().join(&rep));
        assert_eq!(v["pattern"], p);
        assert!(v["max_gram_defect"].as_f64().unwrap() <= 1e-8);
        signs.push(v["linking"]["crossings"].as_i64().unwrap());
    }
    assert_eq!(signs[0].abs(), 1);
    assert_eq!(signs[0], -signs[1]);
    // Only the requested files remain; temp files were renamed away.
    let mut names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names, ["P1.json", "P1.obj", "P1m.json", "P1m.obj"]);
}

#[test]
fn single_epsilon_sweep_is_one_deterministic_row() {
    let dir = tempfile::tempdir().unwrap();
    let args = |csv: &'static str| ["sweep", "--pattern", "P2m", "--epsilons", "0.1", "--seed", "7", "--out", csv];
    let a = twistcyl(dir.path(), &args("a.csv"));
    let b = twistcyl(dir.path(), &args("b.csv"));
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(b.status.code(), Some(0));
    let ta = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(ta, std::fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(ta).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("pattern,epsilon,lambda,passed"));
    assert!(lines[1].starts_with("P2m,0.1,2.1,true"));
    let summary: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(summary["runs"], 1);
    assert_eq!(summary["passed"], true);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "# two-step sweep\npattern = P1\nepsilons = 0.5, 0.2\nout = file.csv\n").unwrap();
    let out = twistcyl(dir.path(), &["sweep", "--config", "run.cfg", "--out", "flag.csv", "--report", "s.json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path().join("file.csv").exists());
    let text = std::fs::read_to_string(dir.path().join("flag.csv")).unwrap();
    assert_eq!(text.lines().count(), 3);
    let s = json(&dir.path().join("s.json"));
    assert_eq!(s["convergence"][0]["pattern_id"], "P1");
    assert_eq!(s["convergence"][0]["passed"], true);
}

#[test]
fn randomized_suites() {
    let dir = tempfile::tempdir().unwrap();
    let empty = twistcyl(dir.path(), &["lemmas", "--trials", "0"]);
    assert_eq!(empty.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&empty.stdout).unwrap();
    assert!(v["suites"].as_array().unwrap().iter().all(|s| s["trials"] == 0));

    let full = twistcyl(dir.path(), &["lemmas", "--trials", "1000", "--seed", "42", "--report", "l.json"]);
    assert_eq!(full.status.code(), Some(0));
    let v = json(&dir.path().join("l.json"));
    assert_eq!(v["passed"], true);
    let trials: Vec<_> = v["suites"].as_array().unwrap().iter().map(|s| s["trials"].as_u64().unwrap()).collect();
    assert_eq!(trials, [1000, 1000, 500]);
    assert!(v["suites"].as_array().unwrap().iter().all(|s| s["violations"] == 0));
}
