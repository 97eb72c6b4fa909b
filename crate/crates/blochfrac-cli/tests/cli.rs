//! End-to-end runs of the compiled binary: exit codes, formats, determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn blochfrac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blochfrac"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_utf8(out: &Output) -> &str {
    std::str::from_utf8(&out.stdout).expect("stdout is utf-8")
}

#[test]
fn classify_emits_json_and_exits_zero() {
    let out = blochfrac(&["classify", "--weight", "constant"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(stdout_utf8(&out)).expect("valid json");
    assert_eq!(v["weight"], "constant");
    assert_eq!(v["upper_doubling"]["verdict"], "EvidenceYes");
    assert_eq!(v["moment_doubling"]["verdict"], "EvidenceYes");
    assert_eq!(v["two_sided"], true);
}

#[test]
fn classify_multiple_weights_returns_array() {
    let out = blochfrac(&["classify", "--weight", "constant", "--weight", "lograpid:alpha=2"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(stdout_utf8(&out)).expect("valid json");
    let arr = v.as_array().expect("array of reports");
    assert_eq!(arr.len(), 2);
    // A weight failing a class check is still a successful run: verdicts are data.
    assert_eq!(arr[1]["lower_doubling"]["verdict"], "EvidenceNo");
}

#[test]
fn bad_weight_spec_fails_with_position() {
    let out = blochfrac(&["classify", "--weight", "standard:gamma=2"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("byte 9"), "stderr: {err}");
}

#[test]
fn dmu_round_trips_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("f.csv");
    fs::write(&input, "n,re,im\n0,1.0,0.0\n2,-0.5,0.25\n").unwrap();

    let deriv = dir.path().join("df.csv");
    let out = blochfrac(&[
        "dmu",
        "--coeffs",
        input.to_str().unwrap(),
        "--weight",
        "constant",
        "--out",
        deriv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    // Constant weight: the derivative multiplies coefficient n by 2n + 2.
    let text = fs::read_to_string(&deriv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,re,im"));
    assert_eq!(lines.next(), Some("0,2,0"));
    assert_eq!(lines.next(), Some("1,0,0"));
    assert_eq!(lines.next(), Some("2,-3,1.5"));
    assert_eq!(lines.next(), None);
}

#[test]
fn dmu_requires_exactly_one_derivative() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("f.csv");
    fs::write(&input, "n,re,im\n0,1.0,0.0\n").unwrap();
    let path = input.to_str().unwrap();

    let neither = blochfrac(&["dmu", "--coeffs", path]);
    assert!(!neither.status.success());

    let both = blochfrac(&[
        "dmu", "--coeffs", path, "--weight", "constant", "--classical-beta", "1.0",
    ]);
    assert!(!both.status.success());
}

#[test]
fn json_only_subcommands_reject_csv() {
    let out = blochfrac(&["classify", "--weight", "constant", "--format", "csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("json only"));
}

fn run_to_file(args: &[&str], path: &Path) -> Output {
    let mut full: Vec<&str> = args.to_vec();
    full.push("--out");
    full.push(path.to_str().unwrap());
    blochfrac(&full)
}

#[test]
fn kernel_report_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = [
        "kernel-asymptotics",
        "--omega",
        "standard:beta=2",
        "--mu",
        "constant",
        "--trunc",
        "2048",
        "--grid-depth",
        "8",
    ];
    assert!(run_to_file(&args, &a).status.success());
    assert!(run_to_file(&args, &b).status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let text = fs::read_to_string(&a).unwrap();
    assert!(text.starts_with("r,a_mod,m1,comparison,ratio,admissible\n"));
}

#[test]
fn counterexample_report_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = ["counterexample", "--weight", "lograpid:alpha=2", "--nmax", "5"];
    assert!(run_to_file(&args, &a).status.success());
    assert!(run_to_file(&args, &b).status.success());
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&a).unwrap()).unwrap();
    // Depth 5 is this tail's floor, so the deeper probe clamps to it.
    assert_eq!(v["deeper_nmax"], 5);
}

#[test]
fn verify_partition_passes_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("partition.json");
    let out = run_to_file(&["verify-partition", "--seed", "7"], &report);
    assert!(out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("suite verify-partition: PASS"), "stderr: {err}");
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["suite"], "verify-partition");
    assert_eq!(v["pass"], true);
    assert_eq!(v["seed"], 7);
}

#[test]
fn verify_prop23_passes_at_modest_truncation() {
    let out = blochfrac(&["verify-prop23", "--trunc", "1024", "--grid-depth", "8"]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(stdout_utf8(&out)).expect("valid json");
    assert_eq!(v["pass"], true);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["pass"] == true));
}

#[test]
fn lacunary_depth_beyond_tail_resolution_is_an_error() {
    let out = blochfrac(&["lacunary", "--weight", "lograpid:alpha=2", "--nmax", "12"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("deepest attainable level is 5"), "stderr: {err}");
}
