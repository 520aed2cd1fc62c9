use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nicesec")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn decide_1001_is_yes() {
    let o = run(&["decide", "1001"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("1001 (recursive): yes"));
}

#[test]
fn decide_all_agrees_on_1011() {
    let o = run(&["decide", "1011", "--method", "all", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let answers: Vec<(String, String)> = stdout(&o)
        .lines()
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            (v["method"].as_str().unwrap().to_string(), v["answer"].as_str().unwrap().to_string())
        })
        .collect();
    let expected = [("oracle", "no"), ("splits", "no"), ("recursive", "no")];
    assert_eq!(answers, expected.map(|(a, b)| (a.to_string(), b.to_string())));
}

#[test]
fn json_witness_names_grid_points() {
    let o = run(&["decide", "10", "--method", "oracle", "--json"]);
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["answer"], "yes");
    assert_eq!(v["witness"]["class"], "4-crown-stack");
    assert_eq!(v["witness"]["retract_height"], 1);
    assert_eq!(v["witness"]["map"].as_array().unwrap().len(), 9);
    assert!(v["elapsed_ms"].is_u64());
    assert!(v["search_stats"]["nodes"].is_u64());
}

#[test]
fn parse_errors_exit_1() {
    assert_eq!(run(&["decide", "2x1"]).status.code(), Some(1));
    assert_eq!(run(&["decide", ""]).status.code(), Some(1));
    assert_eq!(run(&["decide", "101", "--method", "guess"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn codes_outside_the_table_carry_a_warning() {
    let o = run(&["decide", "0011", "--method", "oracle"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("warning"));
    let o = run(&["decide", "010", "--method", "splits"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn exhausted_budget_exits_2() {
    let o = Command::new(env!("CARGO_BIN_EXE_nicesec"))
        .args(["decide", "111111", "--method", "oracle", "--json"])
        .env("NICESEC_NODE_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["answer"], "undecided");
    assert!(v.get("witness").is_none());
}

#[test]
fn table_3_text() {
    let o = run(&["table", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<(String, String)> = stdout(&o)
        .lines()
        .filter(|l| l.starts_with("  "))
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            (f[0].to_string(), f.last().unwrap().to_string())
        })
        .collect();
    let expected = [("1", "n"), ("11", "n"), ("10", "y"), ("111", "y"), ("101", "y"), ("110", "n"), ("100", "n")];
    assert_eq!(rows, expected.map(|(a, b)| (a.to_string(), b.to_string())));
}

#[test]
fn table_1_is_a_single_row() {
    let out = stdout(&run(&["table", "1"]));
    assert_eq!(out.lines().filter(|l| l.starts_with("  ")).collect::<Vec<_>>(), ["  1             n"]);
}

#[test]
fn table_6_json_has_every_lower_segment() {
    let o = run(&["table", "6", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 63);
    for line in out.lines() {
        nicesec_core::report::TableRecord::parse(line).unwrap();
    }
    assert_eq!(out, stdout(&run(&["table", "6", "--json"])));
}

#[test]
fn table_cap() {
    assert_eq!(run(&["table", "8"]).status.code(), Some(1));
    assert_eq!(run(&["table", "0"]).status.code(), Some(1));
    assert_eq!(run(&["table", "6", "--cap", "5"]).status.code(), Some(1));
}

#[test]
fn dot_output() {
    let one = stdout(&run(&["dot", "1"]));
    assert_eq!(one.lines().filter(|l| l.contains("rank=same")).map(|l| l.matches(';').count() - 1).sum::<usize>(), 6);
    assert_eq!(one.lines().filter(|l| l.contains("->")).count(), 6);
    let ten = stdout(&run(&["dot", "10"]));
    assert_eq!(ten.lines().filter(|l| l.contains("->")).count(), 12);
    let w = stdout(&run(&["dot", "111", "--witness"]));
    assert_eq!(w.lines().filter(|l| l.contains("retract=true")).count(), 6);
    assert_eq!(w, stdout(&run(&["dot", "111", "--witness"])));
}

#[test]
fn verify_with_low_cap_skips_and_passes() {
    let o = run(&["verify", "--cap", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.lines().any(|l| l.starts_with("SKIP  7")));
    assert!(!out.contains("FAIL"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn verify_with_inverted_criteria_fails() {
    let o = run(&["verify", "--cap", "4", "--invert-criteria", "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let failed: Vec<u64> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .filter(|v| v["status"] == "fail")
        .map(|v| v["id"].as_u64().unwrap())
        .collect();
    assert_eq!(failed, [11, 12]);
}
