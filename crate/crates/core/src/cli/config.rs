//! Flat `key = value` experiment configuration.
//!
//! Grammar (one setting per line, `#` starts a comment):
//!
//! ```text
//! n              = 1 | 2
//! n_theta, n_phi = lat-long grid size (n = 2)
//! nodes          = circle grid size (n = 1)
//! f              = sigma:M | pmean:K | product:(SPEC*W, SPEC*W, ...)
//! alpha, beta    = exponents of the speed u^alpha f^beta
//! mode           = normalized | unnormalized
//! initial        = sphere:R | ellipsoid:A1,A2[,A3] | perturbed:R:L=EPS,L=EPS,...
//! seed           = integer seed for perturbed initial data
//! rescale        = true | false   (scale so that min u <= 1 <= max u)
//! t_end, snapshot_every, cfl, dt (fixed step, optional)
//! slack, burn_in, fit_floor       (check tolerances)
//! polar_filter   = 0 (off) or the minimum number of kept modes per row
//! parallel       = true | false
//! write_snapshots = true | false
//! output_dir     = directory for artifacts (relative to $SUPFLOW_OUTPUT_ROOT)
//! ```
//!
//! Command-line flags use the same names in kebab case and win over the file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::curvature::CurvatureSpec;
use crate::flow::{FlowParams, Mode, DEFAULT_BURN_IN, DEFAULT_CFL};
use crate::flow::run::{DEFAULT_FIT_FLOOR, DEFAULT_SLACK};
use crate::sphere::grid::{MIN_CIRCLE_NODES, MIN_PHI_COLUMNS, MIN_THETA_ROWS};
use crate::sphere::{InitialKind, DEFAULT_SEED};

/// Environment variable that overrides the root for relative output paths.
pub const OUTPUT_ROOT_ENV: &str = "SUPFLOW_OUTPUT_ROOT";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{location}: {msg}")]
    Parse { location: String, msg: String },
    #[error("invalid value for `{key}`: {msg}")]
    Range { key: String, msg: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub nodes: usize,
    pub f: String,
    pub alpha: f64,
    pub beta: f64,
    pub mode: Mode,
    pub initial: String,
    pub seed: u64,
    pub rescale: bool,
    pub t_end: f64,
    pub snapshot_every: f64,
    pub cfl: f64,
    pub dt: Option<f64>,
    pub slack: f64,
    pub burn_in: f64,
    pub fit_floor: f64,
    pub polar_filter: usize,
    pub parallel: bool,
    pub write_snapshots: bool,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 2,
            n_theta: 32,
            n_phi: 64,
            nodes: 256,
            f: "sigma:1".into(),
            alpha: -1.0,
            beta: 1.0,
            mode: Mode::Normalized,
            initial: "perturbed:1:2=0.05,3=0.03".into(),
            seed: DEFAULT_SEED,
            rescale: true,
            t_end: 2.0,
            snapshot_every: 0.1,
            cfl: DEFAULT_CFL,
            dt: None,
            slack: DEFAULT_SLACK,
            burn_in: DEFAULT_BURN_IN,
            fit_floor: DEFAULT_FIT_FLOOR,
            polar_filter: 0,
            parallel: true,
            write_snapshots: true,
            output_dir: PathBuf::from("run"),
        }
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

impl ExperimentConfig {
    /// Sets one key from its textual value; `location` is used in errors.
    pub fn set(&mut self, key: &str, value: &str, location: &str) -> Result<(), ConfigError> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let bad = |msg: String| ConfigError::Parse {
            location: location.to_string(),
            msg,
        };
        macro_rules! num {
            ($t:ty) => {
                value
                    .parse::<$t>()
                    .map_err(|_| bad(format!("`{key}` expects a number, got `{value}`")))?
            };
        }
        let flag = || parse_bool(value).ok_or_else(|| bad(format!("`{key}` expects true/false, got `{value}`")));
        match key.as_str() {
            "n" => self.n = num!(usize),
            "n_theta" => self.n_theta = num!(usize),
            "n_phi" => self.n_phi = num!(usize),
            "nodes" => self.nodes = num!(usize),
            "f" => self.f = value.to_string(),
            "alpha" => self.alpha = num!(f64),
            "beta" => self.beta = num!(f64),
            "mode" => self.mode = value.parse().map_err(|e: crate::flow::FlowError| bad(e.to_string()))?,
            "initial" => self.initial = value.to_string(),
            "seed" => self.seed = num!(u64),
            "rescale" => self.rescale = flag()?,
            "t_end" => self.t_end = num!(f64),
            "snapshot_every" => self.snapshot_every = num!(f64),
            "cfl" => self.cfl = num!(f64),
            "dt" => {
                self.dt = match value {
                    "" | "none" | "auto" => None,
                    _ => Some(num!(f64)),
                }
            }
            "slack" => self.slack = num!(f64),
            "burn_in" => self.burn_in = num!(f64),
            "fit_floor" => self.fit_floor = num!(f64),
            "polar_filter" => self.polar_filter = num!(usize),
            "parallel" => self.parallel = flag()?,
            "write_snapshots" => self.write_snapshots = flag()?,
            "output_dir" => self.output_dir = PathBuf::from(value),
            // derived; accepted so echoed configs can be fed back in
            "gamma" | "q" => {}
            _ => return Err(bad(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a `key = value` text; errors carry `origin:line`.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let location = format!("{origin}:{}", i + 1);
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
                location: location.clone(),
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            self.set(k, v, &location)?;
        }
        Ok(())
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::default();
        cfg.apply_text(&text, &path.display().to_string())?;
        Ok(cfg)
    }

    pub fn spec(&self) -> Result<CurvatureSpec, ConfigError> {
        CurvatureSpec::parse(&self.f, self.n).map_err(|e| ConfigError::Range {
            key: "f".into(),
            msg: e.to_string(),
        })
    }

    pub fn params(&self) -> Result<FlowParams, ConfigError> {
        FlowParams::new(self.spec()?, self.alpha, self.beta, self.mode).map_err(|e| ConfigError::Range {
            key: "beta".into(),
            msg: e.to_string(),
        })
    }

    pub fn initial_kind(&self) -> Result<InitialKind, ConfigError> {
        InitialKind::parse(&self.initial, self.seed).map_err(|e| ConfigError::Range {
            key: "initial".into(),
            msg: e.to_string(),
        })
    }

    /// Range checks that do not need a grid.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let range = |key: &str, msg: String| {
            Err(ConfigError::Range {
                key: key.into(),
                msg,
            })
        };
        match self.n {
            1 if self.nodes < MIN_CIRCLE_NODES => {
                return range("nodes", format!("need at least {MIN_CIRCLE_NODES}, got {}", self.nodes))
            }
            2 if self.n_theta < MIN_THETA_ROWS => {
                return range("n_theta", format!("need at least {MIN_THETA_ROWS}, got {}", self.n_theta))
            }
            2 if self.n_phi < MIN_PHI_COLUMNS || self.n_phi % 2 != 0 => {
                return range(
                    "n_phi",
                    format!("need an even value >= {MIN_PHI_COLUMNS}, got {}", self.n_phi),
                )
            }
            1 | 2 => {}
            n => return range("n", format!("only n = 1 and n = 2 are supported, got {n}")),
        }
        self.params()?;
        self.initial_kind()?;
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return range("t_end", format!("must be positive, got {}", self.t_end));
        }
        if !(self.snapshot_every > 0.0 && self.snapshot_every <= self.t_end) {
            return range("snapshot_every", format!("must lie in (0, t_end], got {}", self.snapshot_every));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return range("cfl", format!("must lie in (0, 1], got {}", self.cfl));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return range("dt", format!("must be positive, got {dt}"));
            }
        }
        if !(self.slack >= 0.0) {
            return range("slack", format!("must be nonnegative, got {}", self.slack));
        }
        if !(0.0..1.0).contains(&self.burn_in) {
            return range("burn_in", format!("must lie in [0, 1), got {}", self.burn_in));
        }
        Ok(())
    }

    /// Output directory with the environment root applied to relative paths.
    pub fn resolved_output_dir(&self) -> PathBuf {
        if self.output_dir.is_absolute() {
            return self.output_dir.clone();
        }
        match std::env::var_os(OUTPUT_ROOT_ENV) {
            Some(root) => PathBuf::from(root).join(&self.output_dir),
            None => self.output_dir.clone(),
        }
    }

    /// Every setting, defaults included, plus the derived `gamma` and `q`,
    /// which [`Self::set`] accepts and ignores.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "n_theta = {}", self.n_theta);
        let _ = writeln!(out, "n_phi = {}", self.n_phi);
        let _ = writeln!(out, "nodes = {}", self.nodes);
        let _ = writeln!(out, "f = {}", self.f);
        let _ = writeln!(out, "alpha = {}", self.alpha);
        let _ = writeln!(out, "beta = {}", self.beta);
        let _ = writeln!(out, "mode = {}", self.mode);
        let _ = writeln!(out, "initial = {}", self.initial);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "rescale = {}", self.rescale);
        let _ = writeln!(out, "t_end = {}", self.t_end);
        let _ = writeln!(out, "snapshot_every = {}", self.snapshot_every);
        let _ = writeln!(out, "cfl = {}", self.cfl);
        let _ = writeln!(out, "dt = {}", self.dt.map_or("auto".to_string(), |d| d.to_string()));
        let _ = writeln!(out, "slack = {}", self.slack);
        let _ = writeln!(out, "burn_in = {}", self.burn_in);
        let _ = writeln!(out, "fit_floor = {}", self.fit_floor);
        let _ = writeln!(out, "polar_filter = {}", self.polar_filter);
        let _ = writeln!(out, "parallel = {}", self.parallel);
        let _ = writeln!(out, "write_snapshots = {}", self.write_snapshots);
        let _ = writeln!(out, "output_dir = {}", self.output_dir.display());
        if let Ok(p) = self.params() {
            let _ = writeln!(out, "gamma = {}", p.gamma());
            let _ = writeln!(out, "q = {}", p.q());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_give_gamma() {
        let mut c = ExperimentConfig::default();
        for (k, v) in [("n", "2"), ("f", "sigma:1"), ("alpha", "-1"), ("beta", "1")] {
            c.set(k, v, "--flag").unwrap();
        }
        c.validate().unwrap();
        assert_eq!(c.params().unwrap().gamma(), 2.0);
    }

    #[test]
    fn zero_power_mean_is_a_range_error() {
        let mut c = ExperimentConfig::default();
        c.set("f", "pmean:0", "--f").unwrap();
        assert!(matches!(c.validate(), Err(ConfigError::Range { key, .. }) if key == "f"));
    }

    #[test]
    fn later_values_win() {
        let mut c = ExperimentConfig::default();
        c.apply_text("beta = 1\n", "cfg").unwrap();
        c.set("beta", "0.5", "--beta").unwrap();
        assert_eq!(c.beta, 0.5);
    }

    #[test]
    fn parse_errors_carry_location() {
        let mut c = ExperimentConfig::default();
        let e = c.apply_text("# comment\n\nalpha = x\n", "exp.cfg").unwrap_err();
        assert_eq!(e.to_string(), "exp.cfg:3: `alpha` expects a number, got `x`");
        let e = c.apply_text("colour = red\n", "exp.cfg").unwrap_err();
        assert!(e.to_string().contains("unknown key"));
        let e = c.set("rescale", "maybe", "--rescale").unwrap_err();
        assert!(e.to_string().starts_with("--rescale:"));
    }

    #[test]
    fn echo_round_trips() {
        let mut c = ExperimentConfig::default();
        c.set("dt", "0.001", "--dt").unwrap();
        c.set("n-theta", "48", "--n-theta").unwrap();
        let mut d = ExperimentConfig::default();
        d.apply_text(&c.to_text(), "echo").unwrap();
        assert_eq!(c, d);
        assert!(c.to_text().contains("gamma = 2"));
    }

    #[test]
    fn range_checks() {
        let check = |k: &str, v: &str| {
            let mut c = ExperimentConfig::default();
            c.set(k, v, "t").unwrap();
            c.validate()
        };
        assert!(check("n_theta", "8").is_err());
        assert!(check("n_phi", "65").is_err());
        assert!(check("n", "3").is_err());
        assert!(check("t_end", "0").is_err());
        assert!(check("snapshot_every", "5").is_err());
        assert!(check("cfl", "1.5").is_err());
        assert!(check("initial", "blob:1").is_err());
        assert!(check("beta", "0").is_err());
        assert!(check("alpha", "0.5").is_ok());
    }
}
