use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::ExperimentConfig;
use super::config::ConfigError;

#[derive(Debug, Parser)]
#[command(name = "supflow", version, about = "Support-function simulator for expanding curvature flows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and write its artifacts.
    Run(RunArgs),
    /// Run every line of a matrix file and aggregate a report.
    Verify(VerifyArgs),
    /// Print the summary and diagnostics of a finished run.
    Inspect { dir: PathBuf },
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// One run per line, as whitespace-separated `key=value` overrides.
    #[arg(long)]
    pub matrix: PathBuf,
    #[command(flatten)]
    pub base: RunArgs,
}

/// Overrides for every config key; unset flags keep the file or default value.
#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// `key = value` config file applied before the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub n: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub n_theta: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub n_phi: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub nodes: Option<String>,
    /// Curvature function: sigma:M, pmean:K or product:(SPEC*W,...).
    #[arg(long, allow_hyphen_values = true)]
    pub f: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<String>,
    #[arg(long)]
    pub mode: Option<String>,
    /// sphere:R, ellipsoid:A1,A2[,A3] or perturbed:R:L=EPS,...
    #[arg(long, allow_hyphen_values = true)]
    pub initial: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub rescale: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_end: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub snapshot_every: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub cfl: Option<String>,
    /// Fixed step size instead of the stability bound.
    #[arg(long, allow_hyphen_values = true)]
    pub dt: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub slack: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub burn_in: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub fit_floor: Option<String>,
    /// 0 disables the polar filter; otherwise the minimum kept modes per row.
    #[arg(long)]
    pub polar_filter: Option<String>,
    #[arg(long)]
    pub parallel: Option<String>,
    #[arg(long)]
    pub write_snapshots: Option<String>,
    #[arg(long)]
    pub output_dir: Option<String>,
}

impl RunArgs {
    fn pairs(&self) -> Vec<(&'static str, &str)> {
        let all = [
            ("n", &self.n),
            ("n-theta", &self.n_theta),
            ("n-phi", &self.n_phi),
            ("nodes", &self.nodes),
            ("f", &self.f),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("mode", &self.mode),
            ("initial", &self.initial),
            ("seed", &self.seed),
            ("rescale", &self.rescale),
            ("t-end", &self.t_end),
            ("snapshot-every", &self.snapshot_every),
            ("cfl", &self.cfl),
            ("dt", &self.dt),
            ("slack", &self.slack),
            ("burn-in", &self.burn_in),
            ("fit-floor", &self.fit_floor),
            ("polar-filter", &self.polar_filter),
            ("parallel", &self.parallel),
            ("write-snapshots", &self.write_snapshots),
            ("output-dir", &self.output_dir),
        ];
        all.into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }

    /// Default config, then the file, then the flags.
    pub fn resolve(&self) -> Result<ExperimentConfig, ConfigError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        for (k, v) in self.pairs() {
            cfg.set(k, v, &format!("--{k}"))?;
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("supflow").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn run_flags_resolve() {
        let cli = parse(&["run", "--n", "2", "--f", "sigma:1", "--alpha", "-1", "--beta", "1", "--t-end", "0.5"]);
        let Command::Run(args) = cli.command else { panic!() };
        let cfg = args.resolve().unwrap();
        assert_eq!((cfg.alpha, cfg.beta, cfg.t_end), (-1.0, 1.0, 0.5));
        assert_eq!(cfg.params().unwrap().gamma(), 2.0);
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.cfg");
        std::fs::write(&path, "beta = 1\nalpha = -0.5\n").unwrap();
        let cli = parse(&["run", "--config", path.to_str().unwrap(), "--beta", "0.5"]);
        let Command::Run(args) = cli.command else { panic!() };
        let cfg = args.resolve().unwrap();
        assert_eq!((cfg.alpha, cfg.beta), (-0.5, 0.5));
    }

    #[test]
    fn bad_flag_value_names_the_flag() {
        let cli = parse(&["run", "--cfl", "fast"]);
        let Command::Run(args) = cli.command else { panic!() };
        let e = args.resolve().unwrap_err();
        assert!(e.to_string().starts_with("--cfl:"));
    }
}
