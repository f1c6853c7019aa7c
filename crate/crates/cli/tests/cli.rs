//! End-to-end tests against the compiled binary. Every expectation is a
//! byte-level pin of CLI output or an exit code, so formatting drift and
//! contract drift both fail here.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chipfire"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_chipfire"));
    cmd.args(args);
    for (key, value) in env {
        cmd.env(key, value);
    }
    cmd.output().expect("binary runs")
}

fn stdout_ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "args {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

#[test]
fn stable_both_methods_report_agreement() {
    let out = stdout_ok(&["stable", "--k", "2", "--n", "3", "--perm", "132", "--method", "both"]);
    assert_eq!(out, "(0,2,1,3,4,6,5,7) [formula==simulation]\n");
}

#[test]
fn stable_identity_is_sorted() {
    let out = stdout_ok(&["stable", "--k", "2", "--n", "3", "--perm", "123"]);
    assert_eq!(out, "(0,1,2,3,4,5,6,7)\n");
}

#[test]
fn stable_accepts_comma_form() {
    let compact = stdout_ok(&["stable", "--k", "2", "--n", "3", "--perm", "132"]);
    let commas = stdout_ok(&["stable", "--k", "2", "--n", "3", "--perm", "1,3,2"]);
    assert_eq!(compact, commas);
}

#[test]
fn stable_known_prefix_at_depth_four() {
    let out = stdout_ok(&["stable", "--k", "2", "--n", "4", "--perm", "3214"]);
    assert!(out.starts_with("(0,1,8,9,"), "got {out}");
}

#[test]
fn stable_json_schema() {
    let out = stdout_ok(&["stable", "--k", "2", "--n", "3", "--perm", "132", "--format", "json"]);
    let value: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(value["k"], 2);
    assert_eq!(value["n"], 3);
    assert_eq!(value["chips"], serde_json::json!([0, 2, 1, 3, 4, 6, 5, 7]));
}

#[test]
fn stats_plain_line() {
    let out = stdout_ok(&["stats", "--k", "2", "--n", "3", "--perm", "231"]);
    assert_eq!(out, "c=110, supp={1,2}, rev_supp=011, inv=6, desc=3, set={2,4,6}\n");
}

#[test]
fn stats_depth_four_inversions() {
    let out = stdout_ok(&["stats", "--k", "2", "--n", "4", "--perm", "2413"]);
    assert!(out.contains("inv=28"), "got {out}");
    let out = stdout_ok(&["stats", "--k", "2", "--n", "4", "--perm", "2413", "--format", "json"]);
    let value: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(value["inversions"], "28");
    assert_eq!(value["code"], serde_json::json!([1, 2, 0, 0]));
}

#[test]
fn stats_identity_is_all_zero() {
    let out = stdout_ok(&["stats", "--k", "2", "--n", "3", "--perm", "123"]);
    assert_eq!(out, "c=000, supp={}, rev_supp=000, inv=0, desc=0, set={}\n");
}

#[test]
fn simulate_trace_streams_layer_snapshots() {
    let out = stdout_ok(&["simulate", "--k", "2", "--n", "3", "--perm", "132", "--trace"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(
        lines,
        vec![
            r#"{"layer":2,"buckets":[[0,1,2,3],[4,5,6,7]]}"#,
            r#"{"layer":3,"buckets":[[0,2],[1,3],[4,6],[5,7]]}"#,
            r#"{"layer":4,"buckets":[[0],[2],[1],[3],[4],[6],[5],[7]]}"#,
            "(0,2,1,3,4,6,5,7)",
        ]
    );
}

#[test]
fn simulate_zero_depth_has_no_snapshots() {
    let out = stdout_ok(&["simulate", "--k", "2", "--n", "0", "--perm", "", "--trace"]);
    assert_eq!(out, "(0)\n");
}

#[test]
fn simulate_small_swap() {
    let out = stdout_ok(&["simulate", "--k", "2", "--n", "2", "--perm", "21"]);
    assert_eq!(out, "(0,2,1,3)\n");
}

#[test]
fn sequence_limit_prefixes() {
    let out = stdout_ok(&["sequence", "--k", "3", "--limit", "14"]);
    assert_eq!(out, "0,1,3,4,5,9,10,12,13,14,15,16,17,18\n");
    let out = stdout_ok(&["sequence", "--k", "4", "--limit", "14"]);
    assert_eq!(out, "0,1,4,5,6,16,17,20,21,22,24,25,26,27\n");
}

#[test]
fn sequence_fixed_depth_and_normalized() {
    let out = stdout_ok(&["sequence", "--k", "2", "--n", "4"]);
    assert_eq!(out, "0,4,8,12,16,20,24,28,32,36,40,44\n");
    let out = stdout_ok(&["sequence", "--k", "3", "--n", "3", "--normalized"]);
    assert_eq!(out, "0,1,3,4,5\n");
}

#[test]
fn sequence_bfile_indexing() {
    let one_based = stdout_ok(&["sequence", "--k", "2", "--n", "3", "--format", "bfile"]);
    assert_eq!(one_based, "1 0\n2 2\n3 4\n4 6\n5 8\n");
    let zero_based = stdout_ok(&[
        "sequence", "--k", "2", "--n", "3", "--format", "bfile", "--zero-based",
    ]);
    assert_eq!(zero_based, "0 0\n1 2\n2 4\n3 6\n4 8\n");
}

#[test]
fn sequence_csv_has_header() {
    let out = stdout_ok(&["sequence", "--k", "2", "--n", "3", "--format", "csv"]);
    assert_eq!(out, "index,value\n1,0\n2,2\n3,4\n4,6\n5,8\n");
}

fn masked_reports(raw: &str) -> Vec<serde_json::Value> {
    raw.lines()
        .map(|line| {
            let mut value: serde_json::Value = serde_json::from_str(line).unwrap();
            let obj = value.as_object_mut().expect("report object");
            assert!(obj.contains_key("ms"));
            obj.remove("ms");
            value
        })
        .collect()
}

#[test]
fn verify_grid_is_green() {
    let out = run(&["verify", "--k", "2..3", "--n", "0..4"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let reports = masked_reports(&stdout);
    assert_eq!(reports.len(), 20);
    for report in &reports {
        assert_eq!(
            report["failures"],
            serde_json::json!([]),
            "check {} reported failures",
            report["check"]
        );
        assert!(report["cases"].as_u64().unwrap() > 0);
    }
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("20 checks passed"), "got {stderr}");
}

#[test]
fn verify_single_cell_passes() {
    let out = run(&["verify", "--k", "2", "--n", "3"]);
    assert!(out.status.success());
}

#[test]
fn verify_reports_are_deterministic() {
    let args = ["verify", "--k", "2", "--n", "6", "--budget", "low", "--seed", "7"];
    let first = run(&args);
    let second = run(&args);
    assert!(first.status.success() && second.status.success());
    // Identical modulo the timing field.
    let a = masked_reports(&String::from_utf8(first.stdout).unwrap());
    let b = masked_reports(&String::from_utf8(second.stdout).unwrap());
    assert_eq!(a, b);
}

#[test]
fn verify_respects_thread_hint() {
    let out = run(&["verify", "--k", "2", "--n", "3", "--threads", "1"]);
    assert!(out.status.success());
}

#[test]
fn table_small_plain() {
    let out = stdout_ok(&["table", "--k", "2", "--n", "2"]);
    let want = "\
w   code  rev_support  config     inversions  descents  descent_set
12  00    00           (0,1,2,3)  0           0         {}
21  10    01           (0,2,1,3)  1           1         {2}
";
    assert_eq!(out, want);
}

#[test]
fn table_depth_one_has_one_row() {
    let out = stdout_ok(&["table", "--k", "3", "--n", "1", "--format", "csv"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("1,0,"), "got {out}");
}

#[test]
fn table_csv_matches_golden_file() {
    let out = stdout_ok(&["table", "--k", "2", "--n", "4", "--format", "csv"]);
    assert_eq!(out, include_str!("data/table_2_4.csv"));
}

#[test]
fn output_flag_writes_the_same_bytes() {
    let path = std::env::temp_dir().join(format!("chipfire-cli-test-{}.txt", std::process::id()));
    let path_str = path.to_str().unwrap();
    let direct = stdout_ok(&["sequence", "--k", "2", "--n", "4"]);
    let out = run(&["sequence", "--k", "2", "--n", "4", "--output", path_str]);
    assert!(out.status.success());
    let written = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(direct, written);
}

#[test]
fn resource_cap_exits_three() {
    let out = run(&["stable", "--k", "2", "--n", "5", "--perm", "12345", "--cap", "16"]);
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("cap"), "got {stderr}");
}

#[test]
fn cap_env_var_applies_and_flag_wins() {
    let args = ["stable", "--k", "2", "--n", "5", "--perm", "12345"];
    let capped = run_env(&args, &[("CHIPFIRE_SIM_CAP", "16")]);
    assert_eq!(capped.status.code(), Some(3));

    let widened = run_env(
        &["stable", "--k", "2", "--n", "5", "--perm", "12345", "--cap", "64"],
        &[("CHIPFIRE_SIM_CAP", "16")],
    );
    assert_eq!(widened.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_two() {
    let bad_perm = run(&["stable", "--k", "2", "--n", "3", "--perm", "999"]);
    assert_eq!(bad_perm.status.code(), Some(2));
    assert!(String::from_utf8(bad_perm.stderr).unwrap().contains("error"));

    let wrong_len = run(&["stable", "--k", "2", "--n", "3", "--perm", "1234"]);
    assert_eq!(wrong_len.status.code(), Some(2));

    let unknown_flag = run(&["stable", "--k", "2", "--n", "3", "--no-such-flag"]);
    assert_eq!(unknown_flag.status.code(), Some(2));

    let bad_subcommand = run(&["frobnicate"]);
    assert_eq!(bad_subcommand.status.code(), Some(2));
}

#[test]
fn cli_output_equals_library_output() {
    // The binary is a formatter around the library; spot-check byte equality.
    let params = chipfire::TreeParams::new(2, 3).unwrap();
    let w: chipfire::Permutation = "231".parse().unwrap();
    let config = chipfire::formulas::stable_config(&params, &w).unwrap();
    let out = stdout_ok(&["stable", "--k", "2", "--n", "3", "--perm", "231"]);
    assert_eq!(out.trim_end(), config.to_string());
}
