use std::collections::BTreeMap;

use serde::Serialize;

use super::barrier::{barrier_pair, BarrierPair};
use super::checks::{self, CheckContext, InvariantVerdict, Status};
use super::diagnostics::{diagnostics, DiagnosticsRecord};
use super::fit::{DecayFit, DEFAULT_BURN_IN};
use super::params::{FlowParams, Mode};
use super::rhs::{dt_from_diffusivity, step_from, tendency, DEFAULT_CFL};
use super::FlowError;
use crate::sphere::{FieldError, GridShape, SupportField};

/// Relative slack on inequality checks: `ε_d = slack_rel · max(1, u_max)`.
pub const DEFAULT_SLACK: f64 = 1e-4;
/// Samples at or below this level are treated as converged to roundoff and
/// excluded from rate fits.
pub const DEFAULT_FIT_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub t_end: f64,
    /// Increasing times in `(0, t_end]`; `t_end` is always the last one.
    pub snapshot_times: Vec<f64>,
    pub cfl: f64,
    pub fixed_dt: Option<f64>,
    /// Keep a copy of the field at every snapshot.
    pub keep_fields: bool,
    pub slack_rel: f64,
    pub burn_in: f64,
    pub fit_floor: f64,
}

impl RunOptions {
    /// Snapshots at every multiple of `snapshot_every` up to `t_end`.
    pub fn new(t_end: f64, snapshot_every: f64) -> Result<Self, FlowError> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(FlowError::InvalidParams(format!("t_end must be positive, got {t_end}")));
        }
        if !(snapshot_every > 0.0 && snapshot_every <= t_end) {
            return Err(FlowError::InvalidParams(format!(
                "snapshot_every must lie in (0, t_end], got {snapshot_every}"
            )));
        }
        let count = (t_end / snapshot_every * (1.0 + 1e-12)).floor() as usize;
        let times = (1..=count).map(|k| k as f64 * snapshot_every).collect();
        Self::at_times(t_end, times)
    }

    pub fn at_times(t_end: f64, mut times: Vec<f64>) -> Result<Self, FlowError> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(FlowError::InvalidParams(format!("t_end must be positive, got {t_end}")));
        }
        times.retain(|t| *t > 0.0 && *t < t_end * (1.0 - 1e-12));
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(FlowError::InvalidParams("snapshot times must increase".into()));
        }
        times.push(t_end);
        Ok(Self {
            t_end,
            snapshot_times: times,
            cfl: DEFAULT_CFL,
            fixed_dt: None,
            keep_fields: false,
            slack_rel: DEFAULT_SLACK,
            burn_in: DEFAULT_BURN_IN,
            fit_floor: DEFAULT_FIT_FLOOR,
        })
    }

    pub fn with_cfl(mut self, cfl: f64) -> Self {
        self.cfl = cfl;
        self
    }

    pub fn with_fixed_dt(mut self, dt: Option<f64>) -> Self {
        self.fixed_dt = dt;
        self
    }

    pub fn keeping_fields(mut self, keep: bool) -> Self {
        self.keep_fields = keep;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunFailure {
    /// Time of the last valid state.
    pub time: f64,
    /// Step size that was being attempted.
    pub dt: f64,
    pub kind: String,
    pub node: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitEntry {
    pub rate: Option<f64>,
    pub r2: Option<f64>,
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl FitEntry {
    fn from_result(r: Result<DecayFit, String>) -> Self {
        match r {
            Ok(f) => Self {
                rate: Some(f.rate),
                r2: Some(f.r2),
                samples: Some(f.samples),
                note: None,
            },
            Err(e) => Self {
                rate: None,
                r2: None,
                samples: None,
                note: Some(e),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilterInfo {
    pub min_modes: usize,
    pub active_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub completed: bool,
    pub failure: Option<RunFailure>,
    pub steps: usize,
    pub final_time: f64,
    pub dim: usize,
    pub grid: String,
    pub spec: String,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub q: f64,
    pub mode: Mode,
    pub in_theorem_range: bool,
    pub polar_filter: Option<FilterInfo>,
    pub parallel: bool,
    pub rates: BTreeMap<String, FitEntry>,
    pub invariants: BTreeMap<String, InvariantVerdict>,
}

impl RunSummary {
    /// Names of invariants whose verdict is `fail`.
    pub fn failed_invariants(&self) -> Vec<&str> {
        self.invariants
            .iter()
            .filter(|(_, v)| v.status == Status::Fail)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn all_claimed_pass(&self) -> bool {
        self.failed_invariants().is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub records: Vec<DiagnosticsRecord>,
    /// Fields at the snapshot times (only with `keep_fields`), starting at t = 0.
    pub snapshots: Vec<SupportField>,
    pub final_field: SupportField,
    pub summary: RunSummary,
}

fn error_kind(e: &FieldError) -> &'static str {
    match e {
        FieldError::InvalidGrid(_) => "InvalidGrid",
        FieldError::LengthMismatch { .. } => "LengthMismatch",
        FieldError::NumericalBlowup { .. } => "NumericalBlowup",
        FieldError::NonPositiveSupport { .. } => "NonPositiveSupport",
        FieldError::NotConvex { .. } => "NotConvex",
        FieldError::ConvexityLost { .. } => "ConvexityLost",
        FieldError::DimensionMismatch { .. } => "DimensionMismatch",
        FieldError::InvalidInitial(_) => "InvalidInitial",
    }
}

/// Integrates from `u0` to `opts.t_end`, recording diagnostics at t = 0 and at
/// every snapshot time; steps are shortened to land exactly on snapshots.
///
/// Numerical failures do not produce an `Err`: the partial trajectory is
/// returned with `summary.failure` set. A failure while a fixed step exceeds
/// the stability bound is classified as `NumericalBlowup`, whatever the
/// first symptom was.
pub fn run(u0: &SupportField, p: &FlowParams, opts: &RunOptions) -> Result<RunResult, FlowError> {
    let grid = u0.shared_grid();
    if p.spec().dim() != grid.dim() {
        return Err(FieldError::DimensionMismatch {
            grid: grid.dim(),
            spec: p.spec().dim(),
        }
        .into());
    }
    if !(opts.cfl > 0.0 && opts.cfl <= 1.0) {
        return Err(FlowError::InvalidParams(format!("cfl must lie in (0, 1], got {}", opts.cfl)));
    }
    if let Some(dt) = opts.fixed_dt {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(FlowError::InvalidParams(format!("fixed dt must be positive, got {dt}")));
        }
    }

    let mut values = u0.values().to_vec();
    if let Some(f) = grid.polar_filter() {
        f.apply(&mut values);
    }
    let mut u = SupportField::at_time(grid.clone(), values, u0.time())?;

    let barriers: Result<BarrierPair, String> = if p.mode() != Mode::Normalized {
        Err("skipped: unnormalized flow".into())
    } else if p.q() >= -1e-14 {
        Err("skipped: q >= 0".into())
    } else {
        barrier_pair(&u, p).map_err(|e| format!("skipped: {e}"))
    };
    let bp = barriers.as_ref().ok();

    let mut records = Vec::with_capacity(opts.snapshot_times.len() + 1);
    let mut snapshots = Vec::new();
    let mut failure = None;
    let mut steps = 0usize;
    let mut last_dt = 0.0;
    let t0 = u.time();

    match diagnostics(&u, p, bp, 0.0) {
        Ok(r) => records.push(r),
        Err(e) => {
            failure = Some(RunFailure {
                time: t0,
                dt: 0.0,
                kind: error_kind(&e).into(),
                node: e.node(),
                message: e.to_string(),
            })
        }
    }
    if opts.keep_fields {
        snapshots.push(u.clone());
    }

    'outer: for &target in &opts.snapshot_times {
        if failure.is_some() {
            break;
        }
        let target = t0 + target;
        while u.time() < target {
            let fail = |e: FieldError, time: f64, dt: f64, unstable: bool| {
                let (kind, message) = if unstable && !matches!(e, FieldError::NumericalBlowup { .. }) {
                    ("NumericalBlowup", format!("{e} (fixed step exceeds the stability bound)"))
                } else {
                    (error_kind(&e), e.to_string())
                };
                RunFailure {
                    time,
                    dt,
                    kind: kind.into(),
                    node: e.node(),
                    message,
                }
            };
            let (k1, d_max) = match tendency(&grid, u.values(), p, true) {
                Ok(x) => x,
                Err(e) => {
                    let unstable = opts.fixed_dt.is_some();
                    failure = Some(fail(e, u.time(), last_dt, unstable));
                    break 'outer;
                }
            };
            let stable = dt_from_diffusivity(&grid, d_max, opts.cfl);
            let full = opts.fixed_dt.unwrap_or(stable);
            let remaining = target - u.time();
            let (dt, lands) = if remaining <= full * (1.0 + 1e-9) {
                (remaining, true)
            } else {
                (full, false)
            };
            match step_from(&u, p, dt, &k1) {
                Ok(mut next) => {
                    if lands {
                        next.set_time(target);
                    }
                    u = next;
                    steps += 1;
                    last_dt = dt;
                }
                Err(e) => {
                    let unstable = opts.fixed_dt.is_some_and(|f| f > stable);
                    failure = Some(fail(e, u.time(), dt, unstable));
                    break 'outer;
                }
            }
        }
        match diagnostics(&u, p, bp, last_dt) {
            Ok(r) => records.push(r),
            Err(e) => {
                let unstable = opts.fixed_dt.is_some();
                let (kind, message) = if unstable {
                    ("NumericalBlowup", format!("{e} (fixed step exceeds the stability bound)"))
                } else {
                    (error_kind(&e), e.to_string())
                };
                failure = Some(RunFailure {
                    time: u.time(),
                    dt: last_dt,
                    kind: kind.into(),
                    node: e.node(),
                    message,
                });
                break;
            }
        }
        if opts.keep_fields {
            snapshots.push(u.clone());
        }
    }

    let not_claimed = if grid.dim() < 2 {
        Some("not claimed: curves (n = 1)".to_string())
    } else if !p.in_theorem_range() {
        Some("not claimed: parameters outside the theorem range".to_string())
    } else if p.mode() != Mode::Normalized {
        Some("not claimed: unnormalized flow".to_string())
    } else {
        None
    };
    let ctx = CheckContext {
        not_claimed,
        barriers: barriers.as_ref().map_err(|e| e.clone()),
        gamma: p.gamma(),
        slack_rel: opts.slack_rel,
        burn_in: opts.burn_in,
        fit_floor: opts.fit_floor,
    };
    let invariants = checks::evaluate(&records, &ctx);

    let mut rates = BTreeMap::new();
    let fit = |f: fn(&DiagnosticsRecord) -> f64| {
        FitEntry::from_result(checks::fit_series(&records, f, opts.burn_in, opts.fit_floor))
    };
    rates.insert("dist_to_unit".to_string(), fit(|r| r.dist_to_unit));
    rates.insert("osc".to_string(), fit(|r| r.osc));
    rates.insert("grad_ratio".to_string(), fit(|r| r.grad_ratio));

    let grid_desc = match grid.shape() {
        GridShape::Circle { nodes } => format!("circle:{nodes}"),
        GridShape::LatLong { n_theta, n_phi } => format!("latlong:{n_theta}x{n_phi}"),
    };
    let summary = RunSummary {
        completed: failure.is_none(),
        failure,
        steps,
        final_time: u.time(),
        dim: grid.dim(),
        grid: grid_desc,
        spec: p.spec().to_string(),
        alpha: p.alpha(),
        beta: p.beta(),
        gamma: p.gamma(),
        q: p.q(),
        mode: p.mode(),
        in_theorem_range: p.in_theorem_range(),
        polar_filter: grid.polar_filter().map(|f| FilterInfo {
            min_modes: f.min_modes(),
            active_rows: f.active_rows(),
        }),
        parallel: grid.execution().is_parallel() && cfg!(feature = "parallel"),
        rates,
        invariants,
    };
    Ok(RunResult {
        records,
        snapshots,
        final_field: u,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::CurvatureSpec;
    use crate::sphere::SphereGrid;

    #[test]
    fn snapshot_schedule() {
        let o = RunOptions::new(1.0, 0.25).unwrap();
        assert_eq!(o.snapshot_times, vec![0.25, 0.5, 0.75, 1.0]);
        let o = RunOptions::new(1.0, 0.3).unwrap();
        assert_eq!(o.snapshot_times.len(), 4);
        assert_eq!(*o.snapshot_times.last().unwrap(), 1.0);
        assert!(RunOptions::new(1.0, 2.0).is_err());
        assert!(RunOptions::new(0.0, 0.1).is_err());
    }

    #[test]
    fn unit_sphere_run_is_constant() {
        let g = SphereGrid::circle(32).unwrap().into_shared();
        let u = SupportField::constant(g, 1.0).unwrap();
        let p = FlowParams::normalized(CurvatureSpec::sigma(1, 1).unwrap(), -1.0, 1.0).unwrap();
        let res = run(&u, &p, &RunOptions::new(0.5, 0.1).unwrap()).unwrap();
        assert!(res.summary.completed);
        assert_eq!(res.records.len(), 6);
        for r in &res.records {
            assert_eq!((r.u_min, r.u_max, r.grad_ratio), (1.0, 1.0, 0.0));
            assert_eq!((r.q_min, r.q_max), (p.gamma(), p.gamma()));
        }
        assert!((res.records[5].t - 0.5).abs() < 1e-15);
        assert!(res.summary.invariants.values().all(|v| v.status == Status::NotClaimed));
    }

    #[test]
    fn round_circle_follows_exact_solution() {
        // n = 1, f = λ, α = −1, β = 1: γ = 1 and u' = 1 − u
        let g = SphereGrid::circle(32).unwrap().into_shared();
        let u = SupportField::constant(g, 2.0).unwrap();
        let p = FlowParams::normalized(CurvatureSpec::sigma(1, 1).unwrap(), -1.0, 1.0).unwrap();
        let res = run(&u, &p, &RunOptions::new(1.0, 0.5).unwrap()).unwrap();
        // D = 1/u, so dt ≤ cfl·h²·u0 ≈ 0.05; RK4 global error ≤ t·dt⁴/120
        let dt_max = DEFAULT_CFL * (2.0 * std::f64::consts::PI / 32.0).powi(2) * 2.0;
        for r in &res.records {
            let e = (r.u_max - (1.0 + (-r.t).exp())).abs();
            assert!(e <= r.t * dt_max.powi(4) / 120.0, "t = {} err {e:e}", r.t);
        }
    }
}
