use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn wzs_in(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wzs"))
        .env_remove("WZS_CACHE_DIR")
        .arg("--cache-dir")
        .arg(cache)
        .args(args)
        .output()
        .expect("binary runs")
}

fn wzs(args: &[&str]) -> Output {
    let dir = tempfile::tempdir().unwrap();
    wzs_in(dir.path(), args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn check_reports_absence_with_exit_one() {
    let o = wzs(&["check", "--mod", "6", "--a", "+-1", "--b", "1", "0,1,2,4"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o).trim(), "absent");
}

#[test]
fn check_reports_presence_with_weights() {
    let o = wzs(&["check", "--mod", "5", "--a", "+-1", "--b", "1", "3,3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("present"));
    assert!(out.contains("indices: 0 1"));
    let a_line = out.lines().find(|l| l.starts_with("a-weights")).unwrap();
    assert!(a_line.contains("1") && a_line.contains("-1"), "{a_line}");
}

#[test]
fn check_odd_exact_length_is_absent_for_even_modulus() {
    let o = wzs(&["check", "--mod", "4", "--a", "+-1", "--b", "1", "--exact-len", "3", "1,1,2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_parse_errors_carry_a_position() {
    let o = wzs(&["check", "--mod", "6", "--a", "+-1", "0,1,zz"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("position 5"), "{}", stderr(&o));
    let o = wzs(&["check", "--mod", "6", "--a", "1,q", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--a at position 3"), "{}", stderr(&o));
    let o = wzs(&["check", "--mod", "6", "--a", "0", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_json_and_higher_rank() {
    let o = wzs(&["check", "--mod", "2", "--rank", "2", "--a", "1", "--b", "1", "--json", "(1,0),(0,1),(1,0)"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["present"], true);
    assert_eq!(v["witness"]["indices"], serde_json::json!([0, 2]));
    assert_eq!(v["subsequence"], serde_json::json!([[1, 0], [1, 0]]));

    let o = wzs(&["check", "--mod", "2", "--rank", "2", "--a", "1", "--b", "1", "1:0", "0:1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_modes() {
    let o = wzs(&["check", "--mod", "6", "--a", "+-1", "--b", "1", "--consecutive", "3,1,1"]);
    assert_eq!(o.status.code(), Some(0));
    let o = wzs(&["check", "--mod", "6", "--a", "1", "--full", "1,2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = wzs(&["check", "--mod", "6", "--a", "1", "--full", "1,5"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn duplicate_weights_warn() {
    let o = wzs(&["check", "--mod", "2", "--a", "+-1", "--b", "1", "1,1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("duplicate weights"));
}

fn value_line(o: &Output) -> String {
    stdout(o)
        .lines()
        .find_map(|l| l.strip_prefix("value: ").map(str::to_string))
        .unwrap_or_default()
}

#[test]
fn compute_examples() {
    for (args, want) in [
        (vec!["compute", "D", "--mod", "6", "--a", "+-1", "--b", "1"], "5"),
        (vec!["compute", "E", "--mod", "3", "--a", "+-1", "--b", "1"], "5"),
        (vec!["compute", "D", "--mod", "2", "--rank", "3", "--a", "1", "--b", "1"], "5"),
    ] {
        let o = wzs(&args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
        assert_eq!(value_line(&o), want, "{args:?}");
    }
}

#[test]
fn compute_writes_and_reuses_the_cache() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["compute", "D", "--mod", "6", "--a", "+-1", "--b", "1"];
    let first = wzs_in(dir.path(), &args);
    assert!(stdout(&first).contains("cache: stored"));
    let file = dir.path().join("D-m6-r1-a1_5-b1.json");
    let record: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(record["value"], 5);
    assert_eq!(record["extremal"], serde_json::json!([[0], [1], [2], [4]]));
    assert!(record["timestamp"].is_string());
    let second = wzs_in(dir.path(), &args);
    assert!(stdout(&second).contains("cache: hit"));
    assert_eq!(value_line(&second), "5");

    let nocache = tempfile::tempdir().unwrap();
    let o = wzs_in(nocache.path(), &["compute", "D", "--mod", "5", "--a", "+-1", "--no-cache"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_dir(nocache.path()).unwrap().count(), 0);
}

#[test]
fn cache_flag_wins_over_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let args = ["compute", "D", "--mod", "4", "--a", "+-1"];
    let o = Command::new(env!("CARGO_BIN_EXE_wzs"))
        .env("WZS_CACHE_DIR", env_dir.path())
        .args(args)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(env_dir.path().join("D-m4-r1-a1_3-bnone.json").exists());
    let o = Command::new(env!("CARGO_BIN_EXE_wzs"))
        .env("WZS_CACHE_DIR", env_dir.path())
        .arg("--cache-dir")
        .arg(flag_dir.path())
        .args(["compute", "E", "--mod", "4", "--a", "+-1"])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(flag_dir.path().join("E-m4-r1-a1_3-bnone.json").exists());
    assert!(!env_dir.path().join("E-m4-r1-a1_3-bnone.json").exists());
}

#[test]
fn compute_json_uses_the_certificate_schema() {
    let o = wzs(&["compute", "D", "--mod", "6", "--a", "+-1", "--json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        [
            "a_set",
            "b_set",
            "engine_version",
            "exhaustive",
            "extremal",
            "kind",
            "modulus",
            "nodes_explored",
            "rank",
            "symmetries_used",
            "timestamp",
            "value"
        ]
    );
    assert!(v["b_set"].is_null());
    assert_eq!(v["value"], 3);
}

#[test]
fn incomplete_search_exits_three() {
    let o = wzs(&["compute", "C", "--mod", "2", "--rank", "3", "--a", "1", "--b", "1", "--max-nodes", "100"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("incomplete"));
    let o = wzs(&["compute", "D", "--mod", "6", "--a", "+-1", "--b", "1", "--cap", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains(">= 3"), "{}", stderr(&o));
}

#[test]
fn table_formats() {
    let o = wzs(&["table", "D", "--a", "+-1", "--b", "1", "--mods", "3..8", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "modulus,kind,value");
    assert_eq!(lines.len(), 7);
    assert!(lines.contains(&"6,D,5"));

    let o = wzs(&["table", "D,E", "--a", "+-1", "--b", "1", "--mods", "3,5", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let e: Vec<i64> = v
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["kind"] == "E")
        .map(|r| r["value"].as_i64().unwrap())
        .collect();
    assert_eq!(e, [5, 9]);

    let o = wzs(&["table", "D", "--a", "+-1", "--b", "1", "--mods", "", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "modulus,kind,value\n");
}

fn verify_with(config: &str) -> (Output, Value, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.toml");
    std::fs::write(&cfg, config).unwrap();
    let out = dir.path().join("out");
    let o = wzs_in(
        &dir.path().join("cache"),
        &[
            "verify",
            "--quiet",
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            out.to_str().unwrap(),
        ],
    );
    let report = std::fs::read_to_string(out.join("report.json"))
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok())
        .unwrap_or(Value::Null);
    (o, report, dir)
}

#[test]
fn verify_closed_forms_only() {
    let (o, report, dir) = verify_with("groups = [\"z2-closed-forms\"]\nz2_ranks = [1, 2]\nz2_c_ranks = [1, 2]\n");
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = report["results"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r["status"] == "verified"));
    let text = std::fs::read_to_string(dir.path().join("out/report.txt")).unwrap();
    assert!(text.contains("6 verified, 0 violated"));
}

/// C_{1,1}(Z_2^3) takes about a minute on one core.
#[test]
#[ignore]
fn verify_closed_forms_through_rank_three() {
    let (o, report, _dir) = verify_with("groups = [\"z2-closed-forms\"]\nz2_ranks = [1, 2, 3]\nz2_c_ranks = [1, 2, 3]\n");
    assert_eq!(o.status.code(), Some(0));
    let rows = report["results"].as_array().unwrap();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r["status"] == "verified"));
}

#[test]
fn verify_with_zero_budget_skips_every_row() {
    let (o, report, _dir) = verify_with("max_nodes = 0\n");
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("skipped"));
    let rows = report["results"].as_array().unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r["status"] == "skipped"));
}

#[test]
fn verify_rejects_bad_config() {
    let (o, _, _dir) = verify_with("no_such_key = 1\n");
    assert_eq!(o.status.code(), Some(2));
    let (o, _, _dir) = verify_with("d_moduli = \"lots\"\n");
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn extract_subcommands() {
    let o = wzs(&["extract", "even-length", "--mod", "4", "0,1,1,2,3,3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let a_line = stdout(&o).lines().find(|l| l.starts_with("a-weights")).unwrap().to_string();
    assert_eq!(a_line.matches(',').count(), 3);

    let o = wzs(&["extract", "z2", "--rank", "2", "1:0,0:1,1:1,1:0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let o = wzs(&["extract", "pigeonhole", "--mod", "8", "1,2,3,5,6,7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let o = wzs(&["extract", "pigeonhole", "--mod", "8", "1,2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn threads_flag() {
    let o = wzs(&["--threads", "2", "compute", "D", "--mod", "7", "--a", "+-1", "--b", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(value_line(&o), "5");
}
