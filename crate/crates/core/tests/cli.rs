use std::path::PathBuf;
use std::process::{Command, Output};

use cdmos::cli::RunReport;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cdmos"))
        .args(args)
        .env_remove("CDMOS_THREADS")
        .output()
        .expect("binary runs")
}

fn scratch(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cdmos-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn solve_to_stdout() {
    let f = scratch("lin.txt", "variables = x\nobjective = x\nconstraint = 1 - x^2 >= 0\nmeasure = uniform_box\nt = 1..2\n");
    let out = bin(&["solve", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = RunReport::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.rows.len(), 2);
    for row in &report.rows {
        assert!((row.rho.unwrap() + 1.0).abs() < 1e-6);
        assert!(row.u.unwrap() > -1.0);
    }
}

#[test]
fn density_grid_and_files() {
    let f = scratch("grid.txt", "objective = x1\nconstraint = 1 - x1^2 >= 0\nmeasure = uniform_box\nt = 1\n");
    let json = f.with_extension("json");
    let csv = f.with_extension("csv");
    let out = bin(&[
        "solve",
        f.to_str().unwrap(),
        "--json",
        json.to_str().unwrap(),
        "--density-grid",
        "5",
        "--density-out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let table = std::fs::read_to_string(&csv).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("x1,sigma,kernel"));
    assert_eq!(lines.count(), 5);
    assert!(RunReport::from_json(&std::fs::read_to_string(&json).unwrap()).is_ok());
}

#[test]
fn parse_errors_exit_one_with_location() {
    let f = scratch("bad.txt", "variables = x1, x2\nobjective = x1 + x3\n");
    let out = bin(&["solve", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("x3"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn usage_errors_exit_one() {
    let f = scratch("ok.txt", "objective = x1\nconstraint = 1 - x1^2 >= 0\n");
    assert_eq!(bin(&["solve", f.to_str().unwrap(), "--density-grid", "3"]).status.code(), Some(1));
    assert_eq!(bin(&["solve"]).status.code(), Some(1));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(bin(&["solve", "/nonexistent/problem.txt"]).status.code(), Some(1));
    assert_eq!(bin(&["--help"]).status.code(), Some(0));
}

#[test]
fn basis_subcommand() {
    let out = bin(&["basis", "uniform_box:1", "2", "--points", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("basis,1,x1,x1^2\n"));
    // K_2(-1, -1) = 1 + 3 + 5
    let edge = text.lines().find(|l| l.starts_with("-1e0,")).unwrap();
    let k: f64 = edge.split(',').nth(1).unwrap().parse().unwrap();
    assert!((k - 9.0).abs() < 1e-10);
    let out = bin(&["basis", "counting_hypercube:2", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["monomials"].as_array().unwrap().len(), 3);
    assert_eq!(bin(&["basis", "gaussian:1", "2"]).status.code(), Some(1));
}
