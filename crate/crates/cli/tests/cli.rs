use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tspkern"))
        .args(args)
        .env_remove("TSPKERN_ORACLE_CAPS")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const TRIANGLE: &str = "p tsp 3 3\nb 3\ne 1 2 1\ne 2 3 1\ne 1 3 1\n";

#[test]
fn solve_triangle_and_bridge() {
    let dir = TempDir::new().unwrap();
    let tri = write(dir.path(), "tri.tsp", TRIANGLE);
    let out = run(&["solve", s(&tri)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("yes 3\n"));

    let bridge = write(dir.path(), "bridge.wrp", "p wrp 2 1\nb 100\nw 1 2\ne 1 2 1 1\n");
    let out = run(&["solve", s(&bridge)]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout(&out).lines().next(), Some("no"));
}

#[test]
fn solve_cross_check_prints_equal_optima() {
    let dir = TempDir::new().unwrap();
    let tri = write(dir.path(), "tri.tsp", TRIANGLE);
    let out = run(&["solve", "--cross-check", s(&tri)]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let optima: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("engine "))
        .map(|l| l.rsplit(' ').next().unwrap())
        .collect();
    assert_eq!(optima, vec!["3", "3", "3"]);
}

#[test]
fn solve_scale_exceeded_exits_three() {
    let dir = TempDir::new().unwrap();
    let tri = write(dir.path(), "tri.tsp", TRIANGLE);
    let out = run(&["solve", "--engine", "multiplicity", "--caps", "edges=2", s(&tri)]);
    assert_eq!(code(&out), 3);
}

#[test]
fn kernelize_tree_is_decided() {
    let dir = TempDir::new().unwrap();
    let tree = write(
        dir.path(),
        "tree.wrp",
        "p wrp 4 3\nb 6\nw 1 3 4\ne 1 2 1\ne 2 3 1\ne 2 4 1\n",
    );
    let kernel = dir.path().join("out.wrp");
    let out = run(&["kernelize", "--regime", "fes", s(&tree), s(&kernel)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("DECIDED yes"));
    assert!(!kernel.exists());
}

#[test]
fn kernelize_vc_reports_bounds_and_stays_equivalent() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("p.tsp");
    let out = run(&["generate", "planted", "--regime", "vc", "--k", "2", "--n", "14", "--out", s(&inst)]);
    assert_eq!(code(&out), 0);
    assert!(fs::read_to_string(&inst).unwrap().lines().any(|l| l.starts_with("m ")));
    let kernel = dir.path().join("k.tsp");
    let out = run(&["kernelize", "--regime", "vc-tsp", "--format", "json", s(&inst), s(&kernel)]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let bounds = report["bounds"].as_array().unwrap();
    assert!(bounds.iter().any(|b| b["quantity"] == "r"));
    assert!(bounds.iter().all(|b| b["holds"] == true));
    let out = run(&["verify", s(&inst), s(&kernel)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("equivalent"));
}

#[test]
fn paths_on_wrp_is_usage_error() {
    let dir = TempDir::new().unwrap();
    let f = write(dir.path(), "a.wrp", "p wrp 3 2\nb 4\nw 1 3\ne 1 2 1\ne 2 3 1\n");
    let out = run(&["kernelize", "--regime", "paths", s(&f)]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("open problem"));
}

#[test]
fn verify_tight_budget_and_malformed_input() {
    let dir = TempDir::new().unwrap();
    let tri = write(dir.path(), "tri.tsp", TRIANGLE);
    let tight = write(dir.path(), "tight.tsp", &TRIANGLE.replace("b 3", "b 2"));
    assert_eq!(code(&run(&["verify", s(&tri), s(&tri)])), 0);
    assert_eq!(code(&run(&["verify", s(&tri), s(&tight)])), 1);
    let bad = write(dir.path(), "bad.tsp", "p tsp 3 2\nb 3\ne 1 2 x\n");
    assert_eq!(code(&run(&["verify", s(&tri), s(&bad)])), 2);
}

#[test]
fn unknown_flag_is_usage_error() {
    assert_eq!(code(&run(&["solve", "--nope", "x"])), 2);
    assert_eq!(code(&run(&["kernelize", "--regime", "vc", "x"])), 2);
}

#[test]
fn generators() {
    let out = run(&["generate", "selection", "--l", "3"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("p stsp 9 12"));
    assert_eq!(code(&run(&["generate", "selection", "--l", "2"])), 2);

    let a = run(&["generate", "mcc", "--k", "3", "--n", "2", "--seed", "1"]);
    let b = run(&["generate", "mcc", "--k", "3", "--n", "2", "--seed", "1"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("c mcc k=3 n=2"));

    let out = run(&["generate", "compose-fn", "--t", "2", "--k", "4", "--seed", "3"]);
    assert!(stdout(&out).contains("p tsp 9 "));
    assert!(stdout(&out).contains("b 10"));
}
