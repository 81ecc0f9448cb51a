//! Cross-check of the normalized flow against the rescaled unnormalized one.

use serde::Serialize;

use super::params::{FlowParams, Mode};
use super::run::{run, RunOptions};
use super::time_map::{phi_of_t, tau_of_t};
use super::FlowError;
use crate::sphere::SupportField;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizationReport {
    /// `(t, τ(t), max |u(t)/φ(t) − ũ(τ(t))|)` per comparison time.
    pub samples: Vec<(f64, f64, f64)>,
    pub max_discrepancy: f64,
}

/// Runs the unnormalized flow to `t_end` and the normalized flow to
/// `τ(t_end)` from the same `u0`, and compares them at `samples` equally
/// spaced times in `(0, t_end]`.
pub fn normalization_discrepancy(
    u0: &SupportField,
    p: &FlowParams,
    t_end: f64,
    samples: usize,
    cfl: f64,
) -> Result<NormalizationReport, FlowError> {
    if samples == 0 {
        return Err(FlowError::InsufficientData { needed: 1, got: 0 });
    }
    let normalized = p.with_mode(Mode::Normalized);
    let unnormalized = p.with_mode(Mode::Unnormalized);
    let ts: Vec<f64> = (1..=samples).map(|k| t_end * k as f64 / samples as f64).collect();
    let taus = ts.iter().map(|&t| tau_of_t(p, t)).collect::<Result<Vec<_>, _>>()?;

    let opts_u = RunOptions::at_times(t_end, ts.clone())?.with_cfl(cfl).keeping_fields(true);
    let opts_n = RunOptions::at_times(*taus.last().unwrap(), taus.clone())?
        .with_cfl(cfl)
        .keeping_fields(true);
    let ru = run(u0, &unnormalized, &opts_u)?;
    let rn = run(u0, &normalized, &opts_n)?;
    for r in [&ru, &rn] {
        if let Some(f) = &r.summary.failure {
            return Err(FlowError::InvalidParams(format!(
                "comparison run aborted at t = {}: {}",
                f.time, f.message
            )));
        }
    }

    let mut out = Vec::with_capacity(samples);
    let mut worst: f64 = 0.0;
    for (k, (&t, &tau)) in ts.iter().zip(&taus).enumerate() {
        let phi = phi_of_t(p, t)?;
        let a = ru.snapshots[k + 1].values();
        let b = rn.snapshots[k + 1].values();
        let d = a
            .iter()
            .zip(b)
            .map(|(x, y)| (x / phi - y).abs())
            .fold(0.0, f64::max);
        worst = worst.max(d);
        out.push((t, tau, d));
    }
    Ok(NormalizationReport {
        samples: out,
        max_discrepancy: worst,
    })
}
