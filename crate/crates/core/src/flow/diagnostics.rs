use std::fmt::Write as _;

use serde::Serialize;

use super::barrier::BarrierPair;
use super::params::FlowParams;
use crate::par;
use crate::sphere::field::pow;
use crate::sphere::{FieldError, SupportField, SPEED_RADIUS_FLOOR};

pub const CSV_HEADER: &str =
    "t,u_min,u_max,osc,dist_to_unit,Q_min,Q_max,grad_ratio,lambda_min,lambda_max,barrier_lo,barrier_hi,dt";

/// Monitored quantities at one snapshot time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub osc: f64,
    /// `max |u − 1|`.
    pub dist_to_unit: f64,
    /// Range of `Q = u^{α−1} F^β`.
    pub q_min: f64,
    pub q_max: f64,
    /// `max |∇u| / u`.
    pub grad_ratio: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub barrier_lo: Option<f64>,
    pub barrier_hi: Option<f64>,
    /// Last step size taken before this snapshot (zero at the start).
    pub dt: f64,
    /// Quadrature mean of `u`; not part of the CSV stream.
    #[serde(skip)]
    pub mean: f64,
}

impl DiagnosticsRecord {
    pub fn is_finite(&self) -> bool {
        [
            self.t,
            self.u_min,
            self.u_max,
            self.q_min,
            self.q_max,
            self.grad_ratio,
            self.lambda_min,
            self.lambda_max,
            self.dt,
        ]
        .iter()
        .all(|v| v.is_finite())
    }

    /// `λ_max / λ_min` over the whole surface.
    pub fn pinching(&self) -> f64 {
        self.lambda_max / self.lambda_min
    }

    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.t,
            self.u_min,
            self.u_max,
            self.osc,
            self.dist_to_unit,
            self.q_min,
            self.q_max,
            self.grad_ratio,
            self.lambda_min,
            self.lambda_max,
            opt(self.barrier_lo),
            opt(self.barrier_hi),
            self.dt
        )
    }
}

pub fn to_csv(records: &[DiagnosticsRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

struct NodeDiag {
    u: f64,
    q: f64,
    grad_ratio: f64,
    radii: [f64; 2],
}

/// Evaluates every monitored quantity of `u`. Fails with `ConvexityLost` if
/// a radius has dropped to the floor, since `Q` is undefined there.
pub fn diagnostics(
    u: &SupportField,
    p: &FlowParams,
    barriers: Option<&BarrierPair>,
    dt: f64,
) -> Result<DiagnosticsRecord, FieldError> {
    let grid = u.grid();
    let dim = grid.dim();
    if p.spec().dim() != dim {
        return Err(FieldError::DimensionMismatch {
            grid: dim,
            spec: p.spec().dim(),
        });
    }
    let st = u.stencil();
    let nodes = par::map_indices(grid.execution(), grid.len(), |i| {
        let jet = st.jet(i);
        if !jet.is_finite() {
            return Err(FieldError::NumericalBlowup { node: i });
        }
        let radii = jet.radii(dim);
        if radii[0] <= SPEED_RADIUS_FLOOR {
            return Err(FieldError::ConvexityLost {
                node: i,
                lambda_min: radii[0],
            });
        }
        let f = p.spec().value(&radii[..dim]);
        Ok(NodeDiag {
            u: jet.u,
            q: pow(jet.u, p.alpha() - 1.0) * pow(f, p.beta()),
            grad_ratio: jet.grad_norm() / jet.u,
            radii,
        })
    });
    let mut r = DiagnosticsRecord {
        t: u.time(),
        u_min: f64::INFINITY,
        u_max: f64::NEG_INFINITY,
        osc: 0.0,
        dist_to_unit: 0.0,
        q_min: f64::INFINITY,
        q_max: f64::NEG_INFINITY,
        grad_ratio: 0.0,
        lambda_min: f64::INFINITY,
        lambda_max: f64::NEG_INFINITY,
        barrier_lo: barriers.map(|b| b.u1(u.time())),
        barrier_hi: barriers.map(|b| b.u2(u.time())),
        dt,
        mean: u.mean(),
    };
    for n in nodes {
        let n = n?;
        r.u_min = r.u_min.min(n.u);
        r.u_max = r.u_max.max(n.u);
        r.dist_to_unit = r.dist_to_unit.max((n.u - 1.0).abs());
        r.q_min = r.q_min.min(n.q);
        r.q_max = r.q_max.max(n.q);
        r.grad_ratio = r.grad_ratio.max(n.grad_ratio);
        r.lambda_min = r.lambda_min.min(n.radii[0]);
        r.lambda_max = r.lambda_max.max(n.radii[dim - 1]);
    }
    r.osc = r.u_max - r.u_min;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::CurvatureSpec;
    use crate::sphere::SphereGrid;

    #[test]
    fn unit_sphere_record() {
        let g = SphereGrid::lat_long(16, 32).unwrap().into_shared();
        let u = SupportField::constant(g, 1.0).unwrap();
        let p = FlowParams::normalized(CurvatureSpec::sigma(1, 2).unwrap(), -1.0, 1.0).unwrap();
        let bp = BarrierPair::new(1.0, 1.0, p.q(), p.gamma()).unwrap();
        let r = diagnostics(&u, &p, Some(&bp), 0.0).unwrap();
        assert_eq!((r.u_min, r.u_max, r.osc, r.dist_to_unit), (1.0, 1.0, 0.0, 0.0));
        assert_eq!((r.q_min, r.q_max), (2.0, 2.0));
        assert_eq!(r.grad_ratio, 0.0);
        assert_eq!((r.lambda_min, r.lambda_max), (1.0, 1.0));
        assert!((r.mean - 1.0).abs() < 1e-12);
        assert!(r.is_finite());
        assert_eq!(r.csv_row(), "0,1,1,0,0,2,2,0,1,1,1,1,0");
    }

    #[test]
    fn empty_barrier_columns() {
        let g = SphereGrid::circle(32).unwrap().into_shared();
        let u = SupportField::constant(g, 1.5).unwrap();
        let p = FlowParams::normalized(CurvatureSpec::sigma(1, 1).unwrap(), 0.0, 1.0).unwrap();
        let r = diagnostics(&u, &p, None, 0.1).unwrap();
        assert!(r.csv_row().contains(",,"));
        let csv = to_csv(&[r, r]);
        assert_eq!(csv.lines().count(), 3);
        assert_eq!(csv.lines().next().unwrap().split(',').count(), 13);
    }
}
