use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cantor-waring"));
    c.env_remove("CANTOR_WARING_BUDGET").env_remove("CANTOR_WARING_MAX_DEPTH");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bounds_auto_row() {
    let o = run(&["bounds", "--r", "1/3", "--m", "4", "--k", "auto"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let row = text.lines().nth(1).unwrap();
    let cells: Vec<&str> = row.split_whitespace().collect();
    assert_eq!(&cells[..3], ["4", "16", "13"]);
    assert!(cells[7..].iter().all(|c| *c == "yes"), "{row}");
}

#[test]
fn decompose_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let o = run(&["decompose", "--k", "16", "--m", "4", "--target", "22/7", "--out", path(&cert)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(run(&["verify", path(&cert)]).status.code(), Some(0));

    let text = std::fs::read_to_string(&cert).unwrap();
    let tampered = text.replacen("\"target\": \"22/7\"", "\"target\": \"23/7\"", 1);
    assert_ne!(tampered, text);
    std::fs::write(&cert, tampered).unwrap();
    assert_eq!(run(&["verify", path(&cert)]).status.code(), Some(2));

    std::fs::write(&cert, text.replacen("\"schema_version\": \"1\"", "\"schema_version\": \"2\"", 1)).unwrap();
    assert_eq!(run(&["verify", path(&cert)]).status.code(), Some(2));
}

#[test]
fn padic_example() {
    let o = run(&["padic", "--p", "3", "--gamma", "3", "--m", "2", "--target", "7", "--digits", "30"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["kind"], "padic");
    assert_eq!(v["replay_status"], "verified");
    assert_eq!(v["payload"]["summands"].as_array().unwrap().len(), 4);
    let lb = run(&["padic", "--p", "3", "--gamma", "3", "--m", "2", "--lower-bound", "--j", "2"]);
    assert_eq!(stdout(&lb).trim(), "4");
}

#[test]
fn exit_codes() {
    // usage
    assert_eq!(run(&["decompose", "--k", "2", "--m", "1", "--target", "3"]).status.code(), Some(1));
    assert_eq!(run(&["bounds", "--r", "3/4", "--m", "2"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    // budget, from the flag and from the environment
    assert_eq!(run(&["coverage", "--k", "3", "--m", "2", "--n", "4", "--budget", "10"]).status.code(), Some(3));
    let o = bin()
        .env("CANTOR_WARING_BUDGET", "10")
        .args(["coverage", "--k", "3", "--m", "2", "--n", "4", "--json-errors"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "budget");
    assert_eq!(err["exit_code"], 3);
    assert_eq!(run(&["window", "--m", "2", "--max-n", "30"]).status.code(), Some(3));
}

#[test]
fn payloads_are_deterministic() {
    let args = ["dust", "--m", "4", "--target", "1/3-1/4i", "--digits", "12"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["coverage", "--k", "2", "--m", "2", "--n", "3", "--threads", "1"]);
    let d = run(&["coverage", "--k", "2", "--m", "2", "--n", "3", "--threads", "4"]);
    assert_eq!(c.stdout, d.stdout);
}

#[test]
fn coverage_csv_and_gap() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("img.csv");
    let json = dir.path().join("img.json");
    let o = run(&["coverage", "--k", "2", "--m", "2", "--n", "2", "--csv", path(&csv), "--out", path(&json)]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("kind,lo,hi\n"));
    assert!(text.lines().any(|l| l == "gap,98/81,100/81"));
    assert!(!text.contains('.'), "cells must be exact rationals");
    assert_eq!(run(&["verify", path(&json)]).status.code(), Some(0));
}

#[test]
fn window_and_epsilon_tables() {
    let w = run(&["window", "--m", "2", "--max-n", "4", "--check", "--json"]);
    assert_eq!(w.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&w.stdout).unwrap();
    assert_eq!(v[0]["lo"], "98/81");
    assert_eq!(v[0]["hi"], "100/81");
    let e = run(&["epsilon", "--m-max", "32", "--json"]);
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&e.stdout).unwrap();
    assert_eq!(rows.len(), 32);
    assert_eq!(rows[1]["epsilon"], "17/27");
}

#[test]
fn dust_budget_check() {
    let o = run(&["dust", "--m", "6", "--budget-check"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("at most 16384 summands"));
    assert_eq!(run(&["dust", "--m", "3", "--target", "1+i"]).status.code(), Some(1));
}

#[test]
fn fixtures_write_and_check() {
    let dir = tempfile::tempdir().unwrap();
    let d = path(dir.path());
    assert_eq!(run(&["fixtures", "write", d]).status.code(), Some(0));
    for name in ["quartic_conditions_m4.json", "steinhaus.json", "gap_98_100_over_81.json"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let o = run(&["fixtures", "check", d]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let f = dir.path().join("steinhaus.json");
    let text = std::fs::read_to_string(&f).unwrap();
    std::fs::write(&f, text.replace("\"2\"", "\"3\"")).unwrap();
    let o = run(&["fixtures", "check", d]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("FAIL steinhaus.json"));
}
