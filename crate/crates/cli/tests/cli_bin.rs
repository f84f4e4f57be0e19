//! End-to-end tests of the `d2dpush` binary: exit codes, file outputs,
//! determinism.

use std::path::Path;
use std::process::{Command, Output};

const BASELINE: &str = r#"{
    "d2d_radius": 5.0,
    "groups": [
        {"density": 0.05, "request_prob": 0.6, "share_intra": 0.3, "share_inter": 0.3},
        {"density": 0.05, "request_prob": 0.4, "share_intra": 0.25, "share_inter": 0.25}
    ]
}"#;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_d2dpush"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_instance(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn gain_reports_per_group_rows() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "inst.json", BASELINE);
    let out = run(&["gain", "--instance", &inst, "--strategy", "0.5,1"]);
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "group,push_prob,ue_a_density,ue_t_density,success_prob,group_gain,total_gain"
    );
    assert_eq!(lines.len(), 3);
}

#[test]
fn invalid_probability_fails_with_field_message() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(
        dir.path(),
        "bad.json",
        r#"{"d2d_radius": 5.0, "groups": [
            {"density": 0.05, "request_prob": 1.2, "share_intra": 0.4, "share_inter": 0.3}
        ]}"#,
    );
    let out = run(&["solve-analytic", "--instance", &inst]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("request_prob out of range"), "{err}");
}

#[test]
fn missing_radius_fails_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "norad.json", r#"{"groups": []}"#);
    let out = run(&["gain", "--instance", &inst, "--strategy", "0.5"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("d2d_radius"), "{err}");
}

#[test]
fn unusual_sharing_needs_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(
        dir.path(),
        "unusual.json",
        r#"{"d2d_radius": 5.0, "groups": [
            {"density": 0.05, "request_prob": 0.5, "share_intra": 0.2, "share_inter": 0.6}
        ]}"#,
    );
    let rejected = run(&["gain", "--instance", &inst, "--strategy", "0.5"]);
    assert!(!rejected.status.success());
    assert!(String::from_utf8(rejected.stderr)
        .unwrap()
        .contains("allow_unusual_sharing"));

    let accepted = run(&[
        "gain",
        "--instance",
        &inst,
        "--strategy",
        "0.5",
        "--allow-unusual-sharing",
    ]);
    assert!(accepted.status.success());
}

#[test]
fn sweep_error_rows_set_nonzero_exit() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "inst.json", BASELINE);
    // Sweeping share_intra alone makes points non-group-independent, which
    // the analytic solver reports per row.
    let out = run(&[
        "sweep",
        "--instance",
        &inst,
        "--param",
        "groups[0].share_intra",
        "--from",
        "0.4",
        "--to",
        "0.6",
        "--steps",
        "3",
    ]);
    assert!(!out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4, "{text}");
    assert!(text.contains("not group-independent"));
}

#[test]
fn compare_is_byte_deterministic_and_header_only_when_empty() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    for path in [&out_a, &out_b] {
        let out = run(&[
            "compare",
            "--seed",
            "42",
            "--instances",
            "3",
            "--groups",
            "2",
            "--step",
            "0.05",
            "--output",
            &path.display().to_string(),
        ]);
        assert!(out.status.success(), "{out:?}");
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert_eq!(a, b);

    let empty = run(&["compare", "--seed", "42", "--instances", "0"]);
    assert!(empty.status.success());
    assert_eq!(
        String::from_utf8(empty.stdout).unwrap(),
        "instance,groups,ago_gain,oracle_gain,rel_gap,eps_grid,error\n"
    );
}

#[test]
fn oracle_budget_exceeded_fails() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "inst.json", BASELINE);
    let out = run(&[
        "oracle",
        "--instance",
        &inst,
        "--step",
        "0.01",
        "--max-evals",
        "100",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("budget"));
}

#[test]
fn solve_ago_writes_trace_file() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "inst.json", BASELINE);
    let trace = dir.path().join("trace.csv");
    let out = run(&[
        "solve-ago",
        "--instance",
        &inst,
        "--iters",
        "3",
        "--init",
        "zeros",
        "--trace",
        &trace.display().to_string(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = std::fs::read_to_string(&trace).unwrap();
    assert!(text.starts_with("iteration,group,gain"));
    // gains are non-decreasing down the trace
    let gains: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(!gains.is_empty());
    for pair in gains.windows(2) {
        assert!(pair[1] >= pair[0] - 1e-12);
    }
}

#[test]
fn simulate_reports_model_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write_instance(dir.path(), "inst.json", BASELINE);
    let tallies = dir.path().join("tallies.csv");
    let out = run(&[
        "simulate",
        "--instance",
        &inst,
        "--strategy",
        "0.4,0.6",
        "--trials",
        "20",
        "--seed",
        "9",
        "--region-side",
        "80",
        "--tallies-csv",
        &tallies.display().to_string(),
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with(
        "group,success_est,success_se,success_model,ue_a_mean,ue_r_mean,ue_t_mean,ue_n_mean,gain_est,gain_se,gain_model"
    ));
    let tallies_text = std::fs::read_to_string(&tallies).unwrap();
    // header + 20 trials x 2 groups
    assert_eq!(tallies_text.lines().count(), 1 + 40);
}
