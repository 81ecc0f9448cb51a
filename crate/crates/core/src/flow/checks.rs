//! Runtime verdicts for the a priori estimates, evaluated on a finished (or
//! aborted) trajectory of diagnostics records.

use std::collections::BTreeMap;

use serde::Serialize;

use super::barrier::BarrierPair;
use super::diagnostics::DiagnosticsRecord;
use super::fit::{fit_decay_rate, DecayFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    NotClaimed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantVerdict {
    pub status: Status,
    /// Smallest observed `allowed − actual`; negative means violated.
    pub worst_margin: Option<f64>,
    pub time_of_worst: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl InvariantVerdict {
    fn without_margin(status: Status, note: impl Into<String>) -> Self {
        Self {
            status,
            worst_margin: None,
            time_of_worst: None,
            note: Some(note.into()),
        }
    }
}

/// Running minimum of margins.
struct Worst {
    margin: f64,
    time: f64,
}

impl Worst {
    fn new() -> Self {
        Self {
            margin: f64::INFINITY,
            time: 0.0,
        }
    }

    fn update(&mut self, margin: f64, time: f64) {
        if margin < self.margin || margin.is_nan() {
            self.margin = margin;
            self.time = time;
        }
    }

    fn verdict(self, note: Option<String>) -> InvariantVerdict {
        let ok = self.margin >= 0.0 || self.margin == f64::INFINITY;
        InvariantVerdict {
            status: if ok { Status::Pass } else { Status::Fail },
            worst_margin: self.margin.is_finite().then_some(self.margin),
            time_of_worst: self.margin.is_finite().then_some(self.time),
            note,
        }
    }
}

/// Settings shared by all checks.
#[derive(Debug, Clone)]
pub(crate) struct CheckContext<'a> {
    /// `None` if the estimates are claimed, else the reason they are not.
    pub not_claimed: Option<String>,
    pub barriers: Result<&'a BarrierPair, String>,
    pub gamma: f64,
    pub slack_rel: f64,
    pub burn_in: f64,
    pub fit_floor: f64,
}

/// Fits an exponential rate to `value(record)` over the leading stretch of
/// records that stays above `floor` (later samples are at roundoff level).
pub(crate) fn fit_series(
    records: &[DiagnosticsRecord],
    value: impl Fn(&DiagnosticsRecord) -> f64,
    burn_in: f64,
    floor: f64,
) -> Result<DecayFit, String> {
    let series: Vec<(f64, f64)> = records
        .iter()
        .map(|r| (r.t, value(r)))
        .take_while(|(_, v)| *v > floor)
        .collect();
    fit_decay_rate(&series, burn_in).map_err(|e| e.to_string())
}

pub(crate) fn evaluate(records: &[DiagnosticsRecord], ctx: &CheckContext<'_>) -> BTreeMap<String, InvariantVerdict> {
    let names = [
        "extremum_bounds",
        "q_bounds",
        "gradient_monotone",
        "gradient_decay",
        "barrier_sandwich",
        "pinching",
    ];
    let mut out = BTreeMap::new();
    if let Some(reason) = &ctx.not_claimed {
        for n in names {
            out.insert(n.to_string(), InvariantVerdict::without_margin(Status::NotClaimed, reason.clone()));
        }
        return out;
    }
    let Some(first) = records.first() else {
        for n in names {
            out.insert(n.to_string(), InvariantVerdict::without_margin(Status::Skipped, "no records"));
        }
        return out;
    };
    let slack = |r: &DiagnosticsRecord| ctx.slack_rel * r.u_max.max(1.0);

    let lo = first.u_min.min(1.0);
    let hi = first.u_max.max(1.0);
    let mut w = Worst::new();
    for r in records {
        let e = slack(r);
        w.update((r.u_min - (lo - e)).min(hi + e - r.u_max), r.t);
    }
    out.insert("extremum_bounds".into(), w.verdict(None));

    let mut w = Worst::new();
    let mut g = Worst::new();
    for pair in records.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let e = slack(b);
        let allowed = e * (b.t - a.t);
        let up = b.q_max.max(ctx.gamma) - a.q_max.max(ctx.gamma);
        let down = a.q_min.min(ctx.gamma) - b.q_min.min(ctx.gamma);
        w.update(allowed - up.max(down), b.t);
        g.update(e - (b.grad_ratio - a.grad_ratio), b.t);
    }
    out.insert("q_bounds".into(), w.verdict(None));
    out.insert("gradient_monotone".into(), g.verdict(None));

    let decay = if first.grad_ratio <= ctx.fit_floor {
        InvariantVerdict::without_margin(Status::Skipped, "initial data is already round")
    } else {
        match fit_series(records, |r| r.grad_ratio, ctx.burn_in, ctx.fit_floor) {
            Ok(fit) => {
                let margin = fit.rate.min(fit.r2 - 0.95);
                InvariantVerdict {
                    status: if margin > 0.0 { Status::Pass } else { Status::Fail },
                    worst_margin: Some(margin),
                    time_of_worst: None,
                    note: Some(format!("rate {:.6}, r2 {:.6}, {} samples", fit.rate, fit.r2, fit.samples)),
                }
            }
            Err(e) => InvariantVerdict::without_margin(Status::Fail, e),
        }
    };
    out.insert("gradient_decay".into(), decay);

    let sandwich = match ctx.barriers {
        Ok(bp) => {
            let mut w = Worst::new();
            for r in records {
                let e = slack(r);
                w.update((r.u_min - (bp.u1(r.t) - e)).min(bp.u2(r.t) + e - r.u_max), r.t);
            }
            w.verdict(None)
        }
        Err(ref reason) => InvariantVerdict::without_margin(Status::Skipped, reason.clone()),
    };
    out.insert("barrier_sandwich".into(), sandwich);

    // C = 2 · (initial pinching ratio); the ratio itself is always >= 1
    let c = 2.0 * first.pinching();
    let mut w = Worst::new();
    for r in records {
        w.update(c - r.pinching(), r.t);
    }
    let last = records.last().map_or(1.0, |r| r.pinching());
    out.insert(
        "pinching".into(),
        w.verdict(Some(format!("C = {c:.6}, final ratio {last:.9}"))),
    );
    out
}
