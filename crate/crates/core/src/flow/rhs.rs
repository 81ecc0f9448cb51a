use super::params::{FlowParams, Mode};
use super::FlowError;
use crate::par;
use crate::sphere::field::pow;
use crate::sphere::stencil::{Jet, Stencil};
use crate::sphere::{FieldError, SphereGrid, SupportField, SPEED_RADIUS_FLOOR};

/// Default Courant number for [`stable_dt`]. With `D` the trace of the
/// diffusion tensor, the frozen-coefficient spectrum is bounded by `4D/h²`,
/// and RK4 is stable on the negative real axis up to 2.785, so any
/// `cfl < 0.696` is safe.
pub const DEFAULT_CFL: f64 = 0.65;

/// Right-hand side at one node and, optionally, the local diffusivity
/// `β u^α F^{β−1} Σ ∂f/∂λ_i`.
#[inline]
fn node_tendency(jet: &Jet, p: &FlowParams, dim: usize, want_d: bool) -> Result<(f64, f64), FieldError> {
    if !jet.is_finite() {
        return Err(FieldError::NumericalBlowup { node: 0 });
    }
    if jet.u <= 0.0 {
        return Err(FieldError::NonPositiveSupport { node: 0, value: jet.u });
    }
    let radii = jet.radii(dim);
    if radii[0] <= SPEED_RADIUS_FLOOR {
        return Err(FieldError::ConvexityLost {
            node: 0,
            lambda_min: radii[0],
        });
    }
    let radii = &radii[..dim];
    let (f, gsum) = if want_d {
        let mut g = [0.0; 2];
        let f = p.spec().gradient_into(radii, &mut g[..dim]);
        (f, g[..dim].iter().sum::<f64>())
    } else {
        (p.spec().value(radii), 0.0)
    };
    let speed = pow(jet.u, p.alpha()) * pow(f, p.beta());
    let value = match p.mode() {
        Mode::Normalized => speed - p.gamma() * jet.u,
        Mode::Unnormalized => speed,
    };
    Ok((value, p.beta() * speed / f * gsum))
}

/// Tendency of the raw node values, filtered on polar rows when the grid
/// carries a filter, together with the largest diffusivity (zero unless
/// requested).
pub(crate) fn tendency(
    grid: &SphereGrid,
    values: &[f64],
    p: &FlowParams,
    want_d: bool,
) -> Result<(Vec<f64>, f64), FieldError> {
    let dim = grid.dim();
    if p.spec().dim() != dim {
        return Err(FieldError::DimensionMismatch {
            grid: dim,
            spec: p.spec().dim(),
        });
    }
    let st = Stencil::new(grid, values);
    // NaN marks a failed node; the error is rebuilt for the first one
    let per_node = par::map_indices(grid.execution(), grid.len(), |i| {
        node_tendency(&st.jet(i), p, dim, want_d).unwrap_or((f64::NAN, 0.0))
    });
    let mut out = Vec::with_capacity(per_node.len());
    let mut d_max: f64 = 0.0;
    for (i, (v, d)) in per_node.into_iter().enumerate() {
        if v.is_nan() {
            let err = match node_tendency(&st.jet(i), p, dim, want_d) {
                Err(e) => e.at_node(i),
                Ok(_) => FieldError::NumericalBlowup { node: i },
            };
            return Err(err);
        }
        out.push(v);
        d_max = d_max.max(d);
    }
    if let Some(filter) = grid.polar_filter() {
        filter.apply(&mut out);
    }
    Ok((out, d_max))
}

/// `u^α F^β − γu` (normalized) or `u^α F^β` (unnormalized) at every node.
/// The polar filter, if enabled on the grid, is applied to the result.
pub fn rhs(u: &SupportField, p: &FlowParams) -> Result<Vec<f64>, FlowError> {
    Ok(tendency(u.grid(), u.values(), p, false)?.0)
}

/// `cfl · h_min² / D_max` with `D_max = max β u^α F^{β−1} Σ ∂f/∂λ_i`.
pub fn stable_dt(u: &SupportField, p: &FlowParams, cfl: f64) -> Result<f64, FlowError> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(FlowError::InvalidParams(format!("cfl must lie in (0, 1], got {cfl}")));
    }
    let (_, d_max) = tendency(u.grid(), u.values(), p, true)?;
    Ok(dt_from_diffusivity(u.grid(), d_max, cfl))
}

pub(crate) fn dt_from_diffusivity(grid: &SphereGrid, d_max: f64, cfl: f64) -> f64 {
    let h = grid.min_spacing();
    cfl * h * h / d_max.max(f64::MIN_POSITIVE)
}

/// One classical RK4 step of size `dt`.
pub fn step(u: &SupportField, p: &FlowParams, dt: f64) -> Result<SupportField, FieldError> {
    let (k1, _) = tendency(u.grid(), u.values(), p, false)?;
    step_from(u, p, dt, &k1)
}

/// RK4 step reusing an already computed first stage.
pub(crate) fn step_from(u: &SupportField, p: &FlowParams, dt: f64, k1: &[f64]) -> Result<SupportField, FieldError> {
    let grid = u.grid();
    let u0 = u.values();
    let stage = |k: &[f64], h: f64| -> Vec<f64> { u0.iter().zip(k).map(|(a, b)| a + h * b).collect() };

    let (k2, _) = tendency(grid, &stage(k1, 0.5 * dt), p, false)?;
    let (k3, _) = tendency(grid, &stage(&k2, 0.5 * dt), p, false)?;
    let (k4, _) = tendency(grid, &stage(&k3, dt), p, false)?;
    let w = dt / 6.0;
    let next: Vec<f64> = (0..u0.len())
        .map(|i| u0[i] + w * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]))
        .collect();
    if let Some(node) = next.iter().position(|v| !v.is_finite()) {
        return Err(FieldError::NumericalBlowup { node });
    }
    if let Some(node) = next.iter().position(|v| *v <= 0.0) {
        return Err(FieldError::NonPositiveSupport {
            node,
            value: next[node],
        });
    }
    Ok(SupportField::from_parts_unchecked(
        u.shared_grid(),
        next,
        u.time() + dt,
    ))
}
