use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn qflab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qflab"))
        .args(args)
        .env_remove("QFLAB_STATE_BUDGET")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn scratch_file(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("qflab-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn ratio_report() {
    let out = qflab(&["ratio", "--p", "3", "--T", "d:1,1,1,3"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["lhs_coeff"], "10/1");
    assert_eq!(v["equal"], true);
    assert_eq!(v["e_p"], 1);
    assert_eq!(v["diff"], serde_json::json!(["3"]));
}

#[test]
fn gk_value() {
    let out = qflab(&["gk", "--a", "0,1,1", "--p", "3"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "2");
}

#[test]
fn gk_table_is_csv() {
    let out = qflab(&["gk", "--p", "5", "--table", "--max", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "a1,a2,a3,e_p,integral,transversal");
    // triples with a3 <= 2
    assert_eq!(lines.len(), 1 + 10);
    assert!(lines.contains(&"1,1,1,8,true,false"));
}

#[test]
fn oracle_value() {
    let out = qflab(&["oracle", "--s", "1,1,-1,1,-1", "--T", "d:1", "--p", "3", "--t", "2"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["value"], "10/9");
}

#[test]
fn density_closed_and_oracle_agree() {
    let closed = json(&qflab(&["density", "--p", "3", "--T", "d:1,1,1,1", "--closed"]));
    assert_eq!(closed["value"], "640/729");
    let k = json(&qflab(&["kitaoka", "--p", "3", "--a", "0,1,2", "--eps", "-1,1,1", "--at", "1"]));
    assert_eq!(k["value"], "128/81");
}

#[test]
fn exit_codes() {
    assert_eq!(qflab(&["ratio", "--p", "4", "--T", "d:1,1,1,3"]).status.code(), Some(2));
    assert_eq!(qflab(&["ratio", "--p", "3", "--T", "d:1,1,x"]).status.code(), Some(2));
    assert_eq!(qflab(&["frobnicate"]).status.code(), Some(2));
    let represented = qflab(&["ratio", "--p", "3", "--T", "d:1,1,1,1"]);
    assert_eq!(represented.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&represented.stderr).contains("Diff"));
    assert_eq!(qflab(&["classify", "--rank", "4", "--dim", "4"]).status.code(), Some(1));
    assert_eq!(qflab(&["sweep", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn budget_sources() {
    let args = ["oracle", "--s", "1,1,-1,1,-1", "--T", "d:1", "--p", "3", "--t", "2"];
    let out = Command::new(env!("CARGO_BIN_EXE_qflab")).args(args).env("QFLAB_STATE_BUDGET", "10").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
    let cfg = scratch_file("budget.toml", "state_budget = 10\nstrategy = \"naive\"\n");
    let mut with_cfg = vec!["--config", cfg.to_str().unwrap()];
    with_cfg.extend(args);
    assert_eq!(qflab(&with_cfg).status.code(), Some(1));
    with_cfg.extend(["--state-budget", "1000000000"]);
    assert!(qflab(&with_cfg).status.success());
    let bad = scratch_file("bad.toml", "colour = \"blue\"\n");
    assert_eq!(qflab(&["--config", bad.to_str().unwrap(), "clifford-check"]).status.code(), Some(2));
}

#[test]
fn matrix_from_json_file() {
    let file = scratch_file("t.json", r#"{"n": 4, "entries": [["1","0","0","0"],["0","1","0","0"],["0","0","1","0"],["0","0","0","3"]]}"#);
    let out = qflab(&["isolated", "--T", file.to_str().unwrap(), "--p", "3"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["isolated"], true);
}

#[test]
fn diff_flags_unhandled_signatures() {
    let v = json(&qflab(&["diff", "--T", "d:1,1,-1,-1"]));
    assert!(v["warning"].is_string());
    let v = json(&qflab(&["diff", "--T", "d:1,1,1,1", "--disc", "6"]));
    assert!(v.get("warning").is_none());
    assert_eq!(v["odd"], true);
}

#[test]
fn deterministic_output() {
    for args in [
        &["ratio", "--p", "5", "--T", "d:1,1,2,5"][..],
        &["clifford-check", "--seed", "7"][..],
        &["sweep", "--suite", "gk-table", "--format", "csv"][..],
    ] {
        let a = qflab(args);
        let b = qflab(args);
        assert!(a.status.success());
        if args[0] == "sweep" {
            // drop the seconds column, which is the only varying field
            let strip = |o: &Output| -> Vec<String> {
                String::from_utf8_lossy(&o.stdout)
                    .lines()
                    .map(|l| l.splitn(5, ',').enumerate().filter(|(i, _)| *i != 3).map(|(_, f)| f).collect::<Vec<_>>().join(","))
                    .collect()
            };
            assert_eq!(strip(&a), strip(&b));
        } else {
            assert_eq!(a.stdout, b.stdout);
        }
    }
}

#[test]
fn sweep_json() {
    let out = qflab(&["sweep", "--suite", "appendix", "--format", "json"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v[0]["suite"], "appendix");
    assert_eq!(v[0]["passed"], true);
}
