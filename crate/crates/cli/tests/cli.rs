use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn permchan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permchan"))
        .args(args)
        .env_remove("PERMCHAN_SEED")
        .output()
        .expect("binary runs")
}

fn fx(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn analyze_bsc_is_exact_half() {
    let out = permchan(&["analyze", &fx("bsc_0.3.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["capacity_bounds"]["exact"], true);
    assert_eq!(v["capacity_bounds"]["lower_exact"], "1/2");
    assert_eq!(v["profile"]["rank_r"], 2);
    assert_eq!(v["profile"]["row_subset"], serde_json::json!([1, 2]));
}

#[test]
fn analyze_erasure_brackets_capacity() {
    let v = stdout_json(&permchan(&["analyze", &fx("erasure_3_0.5.json")]));
    assert_eq!(v["capacity_bounds"]["lower_exact"], "1");
    assert_eq!(v["capacity_bounds"]["upper_exact"], "2");
    assert_eq!(v["capacity_bounds"]["exact"], false);
    assert_eq!(v["profile"]["strictly_positive"], false);
}

#[test]
fn analyze_rejects_bad_rows_with_exit_two() {
    let out = permchan(&["analyze", &fx("malformed_row_sum.json")]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row 1"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn analyze_missing_file_is_bad_input() {
    let out = permchan(&["analyze", "/nonexistent/channel.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn degrade_feasible_returns_witness() {
    let out = permchan(&["degrade", &fx("erasure_2_0.4.json"), &fx("bsc_0.2.json"), "--eta"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["feasible"], true);
    assert_eq!(v["witness"]["input_size"], 3);
    assert!((v["doeblin_coefficient"].as_f64().unwrap() - 0.4).abs() < 1e-12);
    assert!((v["extremal_erasure_probability"].as_f64().unwrap() - 0.4).abs() < 1e-6);
}

#[test]
fn degrade_infeasible_exits_three() {
    let out = permchan(&["degrade", &fx("bsc_0.2.json"), &fx("erasure_2_0.4.json")]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stdout_json(&out)["feasible"], false);
}

#[test]
fn simulate_writes_csv_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = permchan(&[
        "simulate",
        &fx("permutation_identity.json"),
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(&path).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("n,k,message_count,trials,errors,error_rate,ci_low,ci_high,analytic_bound,seed,scheme")
    );
    for line in lines {
        let fields: Vec<_> = line.split(',').collect();
        assert_eq!(fields[4], "0", "{line}");
        assert_eq!(fields[10], "permutation");
    }
}

#[test]
fn simulate_is_thread_count_invariant() {
    let one = permchan(&["simulate", &fx("erasure_symmetrized.json"), "--threads", "1"]);
    let four = permchan(&["simulate", &fx("erasure_symmetrized.json"), "--threads", "4"]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn seed_env_overrides_config() {
    let run = |seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_permchan"));
        cmd.args(["simulate", &fx("ml_useless.json")]);
        match seed {
            Some(s) => cmd.env("PERMCHAN_SEED", s),
            None => cmd.env_remove("PERMCHAN_SEED"),
        };
        cmd.output().unwrap()
    };
    let base = String::from_utf8(run(None).stdout).unwrap();
    let reseeded = String::from_utf8(run(Some("9")).stdout).unwrap();
    assert!(base.lines().nth(1).unwrap().ends_with(",5,ml"));
    assert!(reseeded.lines().nth(1).unwrap().ends_with(",9,ml"));
    assert_ne!(base, reseeded);

    let bad = run(Some("not-a-seed"));
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn simulate_rejects_unknown_config_keys() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(
        &path,
        format!(
            r#"{{"channel": {:?}, "scheme": "ml", "epsilon": 0.1, "n_grid": [10], "trials": 5, "seed": 1, "bogus": true}}"#,
            fx("bsc_0.2.json")
        ),
    )
    .unwrap();
    let out = permchan(&["simulate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_fast_passes_with_good_fixture() {
    let out = permchan(&["verify", "--fast", "--fixture", &fx("witness_good.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["passed"], true);
    let names: Vec<_> = v["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"witness:erasure_to_bsc"));
}

#[test]
fn verify_flags_broken_witness() {
    let out = permchan(&["verify", "--fixture", &fx("witness_broken.json")]);
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert_eq!(v["passed"], false);
    let broken = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "witness:broken_erasure_to_bsc")
        .unwrap();
    assert_eq!(broken["passed"], false);
}
