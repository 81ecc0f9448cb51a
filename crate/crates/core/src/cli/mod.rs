//! Experiment driver behind the `supflow` binary: configuration, artifact
//! writing, batch verification and inspection of finished runs.

pub mod args;
pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::flow::diagnostics::to_csv;
use crate::flow::{rescale_to_straddle, run, FlowError, RunOptions, RunSummary, Status};
use crate::par::Execution;
use crate::sphere::export::{write_atomic, write_field_csv, write_mesh};
use crate::sphere::{make_initial, FieldError, SphereGrid};

pub use config::{ConfigError, ExperimentConfig, OUTPUT_ROOT_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT_FAILED: i32 = 2;
pub const EXIT_NUMERICAL_ABORT: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
    #[error("the matrix has no runs")]
    InsufficientData,
}

fn io_at(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Serialize)]
struct SummaryFile<'a> {
    #[serde(flatten)]
    run: &'a RunSummary,
    initial: &'a str,
    rescale_factor: f64,
    exit_code: i32,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub exit_code: i32,
    pub output_dir: PathBuf,
    pub summary: RunSummary,
    pub wall_seconds: f64,
}

fn exit_code(summary: &RunSummary) -> i32 {
    if !summary.completed {
        EXIT_NUMERICAL_ABORT
    } else if !summary.all_claimed_pass() {
        EXIT_INVARIANT_FAILED
    } else {
        EXIT_OK
    }
}

/// Runs one experiment and writes `config.txt`, `diagnostics.csv`,
/// `summary.json` and (optionally) per-snapshot meshes and field CSVs.
/// Numerical aborts are not errors: they are recorded in the summary and
/// reflected in the exit code.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome, CliError> {
    cfg.validate()?;
    let out = cfg.resolved_output_dir();
    fs::create_dir_all(&out).map_err(io_at(&out))?;
    let cfg_path = out.join("config.txt");
    write_atomic(&cfg_path, cfg.to_text().as_bytes()).map_err(io_at(&cfg_path))?;

    let exec = if cfg.parallel {
        Execution::Parallel
    } else {
        Execution::Sequential
    };
    let mut grid = match cfg.n {
        1 => SphereGrid::circle(cfg.nodes)?,
        _ => SphereGrid::lat_long(cfg.n_theta, cfg.n_phi)?,
    };
    if cfg.polar_filter > 0 {
        grid = grid.with_polar_filter(cfg.polar_filter);
    }
    let grid = grid.with_execution(exec).into_shared();
    let params = cfg.params()?;
    let u0 = make_initial(&cfg.initial_kind()?, grid)?;
    let (u0, scale) = if cfg.rescale {
        rescale_to_straddle(&u0)
    } else {
        (u0, 1.0)
    };

    let mut opts = RunOptions::new(cfg.t_end, cfg.snapshot_every)?
        .with_cfl(cfg.cfl)
        .with_fixed_dt(cfg.dt)
        .keeping_fields(cfg.write_snapshots);
    opts.slack_rel = cfg.slack;
    opts.burn_in = cfg.burn_in;
    opts.fit_floor = cfg.fit_floor;

    let start = Instant::now();
    let result = run(&u0, &params, &opts)?;
    let wall_seconds = start.elapsed().as_secs_f64();
    let code = exit_code(&result.summary);

    let diag_path = out.join("diagnostics.csv");
    write_atomic(&diag_path, to_csv(&result.records).as_bytes()).map_err(io_at(&diag_path))?;
    if cfg.write_snapshots {
        let snap_dir = out.join("snapshots");
        fs::create_dir_all(&snap_dir).map_err(io_at(&snap_dir))?;
        let ext = if cfg.n == 1 { "csv" } else { "obj" };
        for (k, field) in result.snapshots.iter().enumerate() {
            let mesh = snap_dir.join(format!("mesh_{k:04}.{ext}"));
            write_mesh(field, &mesh).map_err(io_at(&mesh))?;
            let values = snap_dir.join(format!("field_{k:04}.csv"));
            write_field_csv(field, &values).map_err(io_at(&values))?;
        }
    }
    let summary_path = out.join("summary.json");
    let file = SummaryFile {
        run: &result.summary,
        initial: &cfg.initial,
        rescale_factor: scale,
        exit_code: code,
    };
    let json = serde_json::to_string_pretty(&file).expect("summary serialises");
    write_atomic(&summary_path, json.as_bytes()).map_err(io_at(&summary_path))?;

    Ok(ExperimentOutcome {
        exit_code: code,
        output_dir: out,
        summary: result.summary,
        wall_seconds,
    })
}

#[derive(Debug, Clone)]
pub struct SuiteRow {
    pub index: usize,
    pub overrides: String,
    pub exit_code: i32,
    pub error: Option<String>,
    pub summary: Option<RunSummary>,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub rows: Vec<SuiteRow>,
    pub report_path: PathBuf,
}

impl SuiteReport {
    /// Nonzero if any run errored, aborted or failed a claimed invariant.
    pub fn exit_code(&self) -> i32 {
        self.rows.iter().map(|r| r.exit_code).max().unwrap_or(EXIT_OK)
    }

    pub fn failing_rows(&self) -> Vec<usize> {
        self.rows.iter().filter(|r| r.exit_code != EXIT_OK).map(|r| r.index).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "run,overrides,exit_code,alpha,beta,f,in_theorem_range,rate_dist_to_unit,rate_osc,rate_grad_ratio,verdicts,error\n",
        );
        for r in &self.rows {
            let (alpha, beta, f, range, rates, verdicts) = match &r.summary {
                Some(s) => {
                    let rate = |k: &str| {
                        s.rates
                            .get(k)
                            .and_then(|e| e.rate)
                            .map(|v| format!("{v:.6}"))
                            .unwrap_or_default()
                    };
                    let verdicts: Vec<String> = s
                        .invariants
                        .iter()
                        .map(|(k, v)| format!("{k}={}", status_name(v.status)))
                        .collect();
                    (
                        s.alpha.to_string(),
                        s.beta.to_string(),
                        s.spec.clone(),
                        s.in_theorem_range.to_string(),
                        [rate("dist_to_unit"), rate("osc"), rate("grad_ratio")],
                        verdicts.join(";"),
                    )
                }
                None => Default::default(),
            };
            let _ = writeln!(
                out,
                "{},\"{}\",{},{},{},\"{}\",{},{},{},{},{},\"{}\"",
                r.index,
                r.overrides,
                r.exit_code,
                alpha,
                beta,
                f,
                range,
                rates[0],
                rates[1],
                rates[2],
                verdicts,
                r.error.as_deref().unwrap_or("").replace('"', "'")
            );
        }
        out
    }
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Skipped => "skipped",
        Status::NotClaimed => "not_claimed",
    }
}

/// Runs every line of `matrix` (whitespace-separated `key=value` overrides on
/// top of `base`) into `run_NNN` subdirectories of `base.output_dir` and
/// writes `report.csv` there. Individual failures do not stop the suite.
pub fn verify_suite(base: &ExperimentConfig, matrix: &str) -> Result<SuiteReport, CliError> {
    let lines: Vec<&str> = matrix
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .collect();
    if lines.is_empty() {
        return Err(CliError::InsufficientData);
    }
    let root = base.resolved_output_dir();
    fs::create_dir_all(&root).map_err(io_at(&root))?;

    let mut rows = Vec::with_capacity(lines.len());
    for (index, line) in lines.iter().enumerate() {
        let mut cfg = base.clone();
        // absolute, so the environment root is not applied twice
        let dir = std::path::absolute(root.join(format!("run_{index:03}"))).unwrap_or_else(|_| root.join(format!("run_{index:03}")));
        cfg.output_dir = dir;
        let applied = line.split_whitespace().try_for_each(|pair| {
            let (k, v) = pair.split_once('=').ok_or_else(|| ConfigError::Parse {
                location: format!("matrix:{}", index + 1),
                msg: format!("expected key=value, got `{pair}`"),
            })?;
            cfg.set(k, v, &format!("matrix:{}", index + 1))
        });
        let outcome = applied.map_err(CliError::from).and_then(|_| run_experiment(&cfg));
        rows.push(match outcome {
            Ok(o) => SuiteRow {
                index,
                overrides: line.to_string(),
                exit_code: o.exit_code,
                error: o.summary.failure.as_ref().map(|f| f.message.clone()),
                summary: Some(o.summary),
            },
            Err(e) => SuiteRow {
                index,
                overrides: line.to_string(),
                exit_code: 1,
                error: Some(e.to_string()),
                summary: None,
            },
        });
    }
    let report = SuiteReport {
        rows,
        report_path: root.join("report.csv"),
    };
    write_atomic(&report.report_path, report.to_csv().as_bytes()).map_err(io_at(&report.report_path))?;
    Ok(report)
}

/// Human-readable digest of a finished run directory.
pub fn inspect(dir: &Path) -> Result<String, CliError> {
    let summary_path = dir.join("summary.json");
    let text = fs::read_to_string(&summary_path).map_err(io_at(&summary_path))?;
    let s: Value = serde_json::from_str(&text).map_err(|e| CliError::Format {
        path: summary_path.clone(),
        msg: e.to_string(),
    })?;
    let diag_path = dir.join("diagnostics.csv");
    let diag = fs::read_to_string(&diag_path).map_err(io_at(&diag_path))?;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} on {}: f = {}, alpha = {}, beta = {}, gamma = {}, q = {}",
        s["mode"].as_str().unwrap_or("?"),
        s["grid"].as_str().unwrap_or("?"),
        s["spec"].as_str().unwrap_or("?"),
        s["alpha"],
        s["beta"],
        s["gamma"],
        s["q"]
    );
    let status = if s["completed"].as_bool() == Some(true) {
        format!("completed at t = {} after {} steps", s["final_time"], s["steps"])
    } else {
        format!(
            "aborted at t = {}: {}",
            s["failure"]["time"],
            s["failure"]["message"].as_str().unwrap_or("?")
        )
    };
    let _ = writeln!(out, "{status} (exit code {})", s["exit_code"]);
    if let Some(rates) = s["rates"].as_object() {
        for (k, v) in rates {
            match v["rate"].as_f64() {
                Some(r) => {
                    let _ = writeln!(out, "  rate {k:<14} {r:>12.6}  r2 {:.6}", v["r2"].as_f64().unwrap_or(f64::NAN));
                }
                None => {
                    let _ = writeln!(out, "  rate {k:<14} {:>12}  ({})", "-", v["note"].as_str().unwrap_or(""));
                }
            }
        }
    }
    if let Some(inv) = s["invariants"].as_object() {
        for (k, v) in inv {
            let _ = writeln!(
                out,
                "  {k:<18} {:<11} margin {}",
                v["status"].as_str().unwrap_or("?"),
                v["worst_margin"]
            );
        }
    }
    let rows: Vec<&str> = diag.lines().collect();
    let _ = writeln!(out, "diagnostics: {} snapshots", rows.len().saturating_sub(1));
    if let Some(header) = rows.first() {
        let _ = writeln!(out, "  {header}");
    }
    for row in rows.iter().skip(1.max(rows.len().saturating_sub(5))) {
        let _ = writeln!(out, "  {row}");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(dir: &Path) -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        c.n = 1;
        c.nodes = 64;
        c.t_end = 1.0;
        c.snapshot_every = 0.1;
        c.output_dir = dir.to_path_buf();
        c
    }

    #[test]
    fn run_writes_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(&dir.path().join("a"));
        cfg.f = "sigma:1".into();
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.exit_code, EXIT_OK);
        for f in ["config.txt", "diagnostics.csv", "summary.json", "snapshots/mesh_0000.csv", "snapshots/field_0010.csv"] {
            assert!(out.output_dir.join(f).exists(), "{f}");
        }
        let echoed = ExperimentConfig::from_file(&out.output_dir.join("config.txt")).unwrap();
        assert_eq!(echoed, cfg);
        let text = inspect(&out.output_dir).unwrap();
        assert!(text.contains("completed"));
    }

    #[test]
    fn unstable_fixed_step_aborts() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(dir.path());
        cfg.initial = "perturbed:1:3=0.05,5=0.01".into();
        cfg.dt = Some(0.05);
        cfg.write_snapshots = false;
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.exit_code, EXIT_NUMERICAL_ABORT);
        assert_eq!(out.summary.failure.as_ref().unwrap().kind, "NumericalBlowup");
        let diag = fs::read_to_string(out.output_dir.join("diagnostics.csv")).unwrap();
        assert!(diag.lines().count() >= 2);
        let summary = fs::read_to_string(out.output_dir.join("summary.json")).unwrap();
        assert!(summary.contains("\"exit_code\": 3"));
    }

    #[test]
    fn empty_matrix_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(dir.path());
        assert!(matches!(verify_suite(&cfg, "# nothing\n\n"), Err(CliError::InsufficientData)));
    }

    #[test]
    fn suite_isolates_failing_run() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small(dir.path());
        cfg.write_snapshots = false;
        cfg.t_end = 0.3;
        let matrix = "alpha=-1 beta=1\ndt=0.05 initial=perturbed:1:3=0.05,5=0.01\nalpha=-0.5 beta=0.5\n";
        let report = verify_suite(&cfg, matrix).unwrap();
        assert_eq!(report.failing_rows(), vec![1]);
        assert_ne!(report.exit_code(), EXIT_OK);
        assert!(report.report_path.exists());
        assert!(dir.path().join("run_002/summary.json").exists());
    }
}
