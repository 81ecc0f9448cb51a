use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;

use supflow::cli::args::{Cli, Command};
use supflow::cli::{inspect, run_experiment, verify_suite};

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.resolve()?;
            let out = run_experiment(&cfg)?;
            let s = &out.summary;
            match &s.failure {
                None => println!(
                    "completed t = {} in {} steps ({:.2} s) -> {}",
                    s.final_time,
                    s.steps,
                    out.wall_seconds,
                    out.output_dir.display()
                ),
                Some(f) => println!("aborted at t = {}: {} -> {}", f.time, f.message, out.output_dir.display()),
            }
            let failed = s.failed_invariants();
            if !failed.is_empty() {
                println!("failed invariants: {}", failed.join(", "));
            }
            Ok(out.exit_code)
        }
        Command::Verify(args) => {
            let cfg = args.base.resolve()?;
            let matrix = std::fs::read_to_string(&args.matrix)
                .with_context(|| format!("reading {}", args.matrix.display()))?;
            let report = verify_suite(&cfg, &matrix)?;
            for row in &report.rows {
                let status = match (row.exit_code, &row.error) {
                    (0, _) => "ok".to_string(),
                    (_, Some(e)) => format!("exit {}: {e}", row.exit_code),
                    (c, None) => format!("exit {c}"),
                };
                println!("run_{:03} [{}] {status}", row.index, row.overrides);
            }
            println!("report -> {}", report.report_path.display());
            Ok(report.exit_code())
        }
        Command::Inspect { dir } => {
            print!("{}", inspect(&dir)?);
            Ok(0)
        }
    }
}
