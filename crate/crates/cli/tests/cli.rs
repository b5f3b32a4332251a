use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dgw(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dgw")).current_dir(dir).args(args).output().expect("runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn build_q5(dir: &Path) {
    let o =
        dgw(dir, &["build", "--q", "5", "--n", "2", "--zeta", "2", "--alpha", "2", "--alphas", "1", "--betas", "0"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn build_writes_module_and_instance() {
    let dir = tempfile::tempdir().unwrap();
    let o = dgw(
        dir.path(),
        &["build", "--q", "5", "--n", "2", "--zeta", "2", "--alpha", "2", "--alphas", "1", "--betas", "0"],
    );
    assert_eq!(code(&o), 0);
    assert!(stderr(&o).contains("D ≡ D₀ mod t: ok"));
    let inst = read_json(&dir.path().join("instance.json"));
    assert_eq!(inst["g0"], serde_json::json!([[2, 0], [0, 3]]));
    assert_eq!(inst["d0bar"], serde_json::json!([[0, 4], [1, 0]]));
    assert_eq!(read_json(&dir.path().join("module.json"))["schema"], "dgw/module");
}

#[test]
fn missing_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = dgw(dir.path(), &["build", "--q", "5", "--n", "2", "--alpha", "2", "--alphas", "1", "--betas", "0"]);
    assert_eq!(code(&o), 64);
}

#[test]
fn q4_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let o = dgw(
        dir.path(),
        &["build", "--q", "4", "--n", "2", "--zeta", "2", "--alpha", "2", "--alphas", "1", "--betas", "0"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn non_primitive_zeta_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = dgw(
        dir.path(),
        &["build", "--q", "5", "--n", "2", "--zeta", "4", "--alpha", "2", "--alphas", "1", "--betas", "0"],
    );
    assert_eq!(code(&o), 64);
}

#[test]
fn check_reports_valuations() {
    let dir = tempfile::tempdir().unwrap();
    build_q5(dir.path());
    let o = dgw(dir.path(), &["check", "--module", "module.json"]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["ok"], true);
    assert_eq!(r["valuations"], serde_json::json!([0, 1, 2, 3, 4, 5, 6, 7]));
}

fn write_module(dir: &Path, name: &str, d: Value) {
    let m =
        serde_json::json!({"schema": "dgw/module", "version": 1, "p": 5, "e": 1, "q": 5, "n": 2, "level": 1, "D": d});
    fs::write(dir.join(name), m.to_string()).unwrap();
}

fn entry(num: &str, den: &str) -> Value {
    serde_json::json!({"num": num, "den": den})
}

#[test]
fn check_finds_first_failure() {
    let dir = tempfile::tempdir().unwrap();
    write_module(
        dir.path(),
        "m.json",
        serde_json::json!([[entry("1+t", "1"), entry("0", "1")], [entry("0", "1"), entry("1", "1")]]),
    );
    let o = dgw(dir.path(), &["check", "--module", "m.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["ok"], false);
    assert_eq!(r["first_failure"], 1);
}

#[test]
fn check_pole_is_integrality_error() {
    let dir = tempfile::tempdir().unwrap();
    write_module(
        dir.path(),
        "m.json",
        serde_json::json!([[entry("1", "1"), entry("1", "s")], [entry("0", "1"), entry("1", "1")]]),
    );
    let o = dgw(dir.path(), &["check", "--module", "m.json"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn empty_module_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("empty.json"), "").unwrap();
    let o = dgw(dir.path(), &["check", "--module", "empty.json"]);
    assert_eq!(code(&o), 65);
}

#[test]
fn solve_at_degree_two_place() {
    let dir = tempfile::tempdir().unwrap();
    build_q5(dir.path());
    let o = dgw(dir.path(), &["solve", "--module", "module.json", "--place", "s^2+s+2", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["ok"] == true));
    assert_eq!(r["place"]["d"], 2);
}

#[test]
fn extract_nowhere_integral_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    write_module(
        dir.path(),
        "m.json",
        serde_json::json!([[entry("1", "1"), entry("1", "s^5+4*s")], [entry("0", "1"), entry("1", "1")]]),
    );
    let o = dgw(dir.path(), &["extract", "--module", "m.json", "--d-max", "1"]);
    assert_eq!(code(&o), 4);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["witnesses"].as_array().unwrap().len(), 0);
    assert_eq!(r["failures"].as_array().unwrap().len(), 5);
}

#[test]
fn extract_is_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    build_q5(dir.path());
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_dgw"))
            .current_dir(dir.path())
            .env("DGW_THREADS", threads)
            .args(["extract", "--module", "module.json", "--d-max", "2"])
            .output()
            .unwrap()
    };
    let a = run("1");
    let b = run("3");
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let r: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(r["witnesses"].as_array().unwrap().len(), 15);
}

fn subset(dir: &Path, keep: impl Fn(&Value) -> bool) {
    let mut set = read_json(&dir.join("w.json"));
    let kept: Vec<Value> = set["witnesses"].as_array().unwrap().iter().filter(|w| keep(w)).cloned().collect();
    set["witnesses"] = Value::Array(kept);
    fs::write(dir.join("sub.json"), set.to_string()).unwrap();
}

#[test]
fn certify_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    build_q5(dir.path());
    let o = dgw(
        dir.path(),
        &["extract", "--module", "module.json", "--instance", "instance.json", "--d-max", "1", "--out", "w.json"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    subset(dir.path(), |w| w["place"]["pi"] == serde_json::json!([3, 1]));
    let o = dgw(dir.path(), &["certify", "--witnesses", "sub.json", "--strict"]);
    assert_eq!(code(&o), 5);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["verdict"], "proper");
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["ok"] == true));

    subset(dir.path(), |_| false);
    let o = dgw(dir.path(), &["certify", "--witnesses", "sub.json"]);
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["verdict"], "proper");
    let o = dgw(dir.path(), &["certify", "--witnesses", "sub.json", "--strict"]);
    assert_eq!(code(&o), 5);
}

#[test]
fn motive_export() {
    let dir = tempfile::tempdir().unwrap();
    build_q5(dir.path());
    let o = dgw(dir.path(), &["export-motive", "--module", "module.json", "--alpha", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["convention"]["substitution"], "s = 1/theta + 2");
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["ok"] == true));
}
