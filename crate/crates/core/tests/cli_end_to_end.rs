use std::path::Path;
use std::process::{Command, Output};

fn supflow(args: &[&str], root: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_supflow"))
        .args(args)
        .env("SUPFLOW_OUTPUT_ROOT", root)
        .output()
        .expect("binary runs")
}

const SMALL: &[&str] = &["--n", "1", "--nodes", "64", "--t-end", "0.5", "--snapshot-every", "0.1"];

fn run_with(extra: &[&str], root: &Path) -> Output {
    let mut args = vec!["run"];
    args.extend_from_slice(SMALL);
    args.extend_from_slice(extra);
    supflow(&args, root)
}

#[test]
fn run_then_inspect() {
    let root = tempfile::tempdir().unwrap();
    let out = run_with(&["--output-dir", "ok", "--alpha", "-1", "--beta", "1"], root.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = root.path().join("ok");
    for f in ["config.txt", "diagnostics.csv", "summary.json"] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.join("diagnostics.csv")).unwrap();
    assert!(csv.starts_with("t,u_min,u_max,osc,dist_to_unit,Q_min,Q_max,grad_ratio,lambda_min,lambda_max,barrier_lo,barrier_hi,dt\n"));
    assert_eq!(csv.lines().count(), 1 + 6);

    let shown = supflow(&["inspect", dir.to_str().unwrap()], root.path());
    assert_eq!(shown.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&shown.stdout).contains("completed"));
}

#[test]
fn echoed_config_reproduces_the_run() {
    let root = tempfile::tempdir().unwrap();
    assert_eq!(run_with(&["--output-dir", "first", "--seed", "5"], root.path()).status.code(), Some(0));
    let echoed = root.path().join("first/config.txt");
    let again = supflow(
        &["run", "--config", echoed.to_str().unwrap(), "--output-dir", "second"],
        root.path(),
    );
    assert_eq!(again.status.code(), Some(0));
    let a = std::fs::read(root.path().join("first/diagnostics.csv")).unwrap();
    let b = std::fs::read(root.path().join("second/diagnostics.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn unstable_step_exits_three_with_partial_output() {
    let root = tempfile::tempdir().unwrap();
    let out = run_with(
        &["--output-dir", "bad", "--initial", "perturbed:1:3=0.05,5=0.01", "--dt", "0.05"],
        root.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    let summary = std::fs::read_to_string(root.path().join("bad/summary.json")).unwrap();
    assert!(summary.contains("NumericalBlowup"));
    assert!(root.path().join("bad/diagnostics.csv").is_file());
}

#[test]
fn outside_the_theorem_is_not_claimed() {
    let root = tempfile::tempdir().unwrap();
    let out = run_with(&["--output-dir", "wild", "--alpha", "0.5", "--beta", "1"], root.path());
    let summary = std::fs::read_to_string(root.path().join("wild/summary.json")).unwrap();
    assert!(summary.contains("\"in_theorem_range\": false"));
    assert!(!summary.contains("\"status\": \"pass\""));
    assert!(!summary.contains("\"status\": \"fail\""));
    assert_ne!(out.status.code(), Some(2));
}

#[test]
fn bad_flag_is_a_usage_error() {
    let root = tempfile::tempdir().unwrap();
    let out = run_with(&["--alpha", "minus one"], root.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));
}

#[test]
fn verify_reports_each_run() {
    let root = tempfile::tempdir().unwrap();
    let matrix = root.path().join("matrix.txt");
    std::fs::write(&matrix, "# pairs\nalpha=-1 beta=1\nalpha=0 beta=0.5\ndt=0.05 initial=perturbed:1:3=0.05,5=0.01\n").unwrap();
    let mut args = vec!["verify", "--matrix", matrix.to_str().unwrap(), "--output-dir", "suite", "--write-snapshots", "false"];
    args.extend_from_slice(SMALL);
    let out = supflow(&args, root.path());
    assert_ne!(out.status.code(), Some(0));
    let report = std::fs::read_to_string(root.path().join("suite/report.csv")).unwrap();
    assert_eq!(report.lines().count(), 4);
    assert!(report.lines().nth(3).unwrap().starts_with("2,"));
    assert!(root.path().join("suite/run_001/summary.json").is_file());

    std::fs::write(&matrix, "\n# nothing\n").unwrap();
    let out = supflow(&args, root.path());
    assert_eq!(out.status.code(), Some(1));
}
