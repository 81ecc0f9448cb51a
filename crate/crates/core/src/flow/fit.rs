use serde::Serialize;

use super::FlowError;

/// Fraction of a series discarded before fitting.
pub const DEFAULT_BURN_IN: f64 = 0.3;
const MIN_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// `−slope` of `log(value)` against `t`.
    pub rate: f64,
    pub r2: f64,
    pub samples: usize,
}

/// Least-squares exponential decay rate of `series` after discarding the
/// leading `burn_in` fraction of samples.
pub fn fit_decay_rate(series: &[(f64, f64)], burn_in: f64) -> Result<DecayFit, FlowError> {
    let skip = ((series.len() as f64) * burn_in.clamp(0.0, 1.0)).floor() as usize;
    let window = &series[skip.min(series.len())..];
    if window.len() < MIN_SAMPLES {
        return Err(FlowError::InsufficientData {
            needed: MIN_SAMPLES,
            got: window.len(),
        });
    }
    if let Some(i) = window.iter().position(|(_, v)| !(*v > 0.0)) {
        return Err(FlowError::NonPositiveValues {
            index: skip + i,
            value: window[i].1,
        });
    }
    let n = window.len() as f64;
    let mt = window.iter().map(|(t, _)| t).sum::<f64>() / n;
    let my = window.iter().map(|(_, v)| v.ln()).sum::<f64>() / n;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for (t, v) in window {
        let (dt, dy) = (t - mt, v.ln() - my);
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if stt == 0.0 {
        return Err(FlowError::InsufficientData {
            needed: MIN_SAMPLES,
            got: 1,
        });
    }
    let slope = sty / stt;
    let r2 = if syy == 0.0 { 1.0 } else { (sty * sty / (stt * syy)).min(1.0) };
    Ok(DecayFit {
        rate: -slope,
        r2,
        samples: window.len(),
    })
}
