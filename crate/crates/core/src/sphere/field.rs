use std::sync::Arc;

use super::grid::SphereGrid;
use super::stencil::{Jet, Stencil};
use super::FieldError;
use crate::curvature::CurvatureSpec;
use crate::par;

/// Relative floor on the smallest radius for the convexity certificate.
pub const CONVEXITY_TOL: f64 = 1e-10;
/// Radii at or below this are treated as loss of convexity by the speed.
pub const SPEED_RADIUS_FLOOR: f64 = 1e-12;

/// The support function `u` sampled on a grid, plus the flow time it belongs to.
#[derive(Debug, Clone)]
pub struct SupportField {
    grid: Arc<SphereGrid>,
    values: Vec<f64>,
    time: f64,
}

impl SupportField {
    /// Checks length, finiteness and strict positivity (the body must enclose
    /// the origin). Convexity is checked separately by [`Self::certify_convex`].
    pub fn new(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self, FieldError> {
        Self::at_time(grid, values, 0.0)
    }

    pub fn at_time(grid: Arc<SphereGrid>, values: Vec<f64>, time: f64) -> Result<Self, FieldError> {
        if values.len() != grid.len() {
            return Err(FieldError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(FieldError::NumericalBlowup { node });
        }
        if let Some(node) = values.iter().position(|v| *v <= 0.0) {
            return Err(FieldError::NonPositiveSupport {
                node,
                value: values[node],
            });
        }
        Ok(Self { grid, values, time })
    }

    /// Constant field `u ≡ r`, i.e. the sphere of radius `r`.
    pub fn constant(grid: Arc<SphereGrid>, r: f64) -> Result<Self, FieldError> {
        let n = grid.len();
        Self::new(grid, vec![r; n])
    }

    pub(crate) fn from_parts_unchecked(grid: Arc<SphereGrid>, values: Vec<f64>, time: f64) -> Self {
        Self { grid, values, time }
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    pub fn shared_grid(&self) -> Arc<SphereGrid> {
        Arc::clone(&self.grid)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Quadrature mean `∫u / |S^n|`.
    pub fn mean(&self) -> f64 {
        let w = self.grid.weights();
        let s: f64 = self.values.iter().zip(w).map(|(u, w)| u * w).sum();
        s / self.grid.measure()
    }

    /// Returns a copy scaled by `s > 0`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| v * s).collect(),
            time: self.time,
        }
    }

    pub fn stencil(&self) -> Stencil<'_> {
        Stencil::new(&self.grid, &self.values)
    }

    pub fn jets(&self) -> Vec<Jet> {
        let st = self.stencil();
        par::map_indices(self.grid.execution(), self.grid.len(), |i| st.jet(i))
    }

    /// Verifies `λ_min > 1e-10 · max(1, u_max)` at every node and returns the
    /// smallest radius.
    pub fn certify_convex(&self) -> Result<f64, FieldError> {
        let radii = radii_matrix(self)?;
        let floor = CONVEXITY_TOL * self.max().max(1.0);
        let (node, lmin) = radii.smallest();
        if lmin <= floor {
            return Err(FieldError::NotConvex { node, lambda_min: lmin });
        }
        Ok(lmin)
    }
}

/// Per-node radii matrices `b = ∇²u + u·I` and their sorted eigenvalues.
#[derive(Debug, Clone)]
pub struct RadiiField {
    dim: usize,
    matrices: Vec<[f64; 3]>,
    eigenvalues: Vec<[f64; 2]>,
}

impl RadiiField {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    /// `(b11, b12, b22)` at node `i`; on `S¹` only `b11` is meaningful.
    pub fn matrix(&self, i: usize) -> [f64; 3] {
        self.matrices[i]
    }

    /// Principal radii at node `i`, ascending, `dim` entries.
    pub fn eigenvalues(&self, i: usize) -> &[f64] {
        &self.eigenvalues[i][..self.dim]
    }

    /// `(node, λ)` of the smallest radius over the grid.
    pub fn smallest(&self) -> (usize, f64) {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(i, e)| (i, e[0]))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    }

    pub fn largest(&self) -> (usize, f64) {
        let top = self.dim - 1;
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(i, e)| (i, e[top]))
            .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
    }
}

/// Frame components of `∇u` at every node; on `S¹` the second entry is zero.
pub fn covariant_gradient(u: &SupportField) -> Vec<[f64; 2]> {
    u.jets().into_iter().map(|j| j.grad).collect()
}

pub fn radii_matrix(u: &SupportField) -> Result<RadiiField, FieldError> {
    let dim = u.grid().dim();
    let jets = u.jets();
    if let Some(node) = jets.iter().position(|j| !j.is_finite()) {
        return Err(FieldError::NumericalBlowup { node });
    }
    let eigenvalues = jets.iter().map(|j| j.radii(dim)).collect();
    Ok(RadiiField {
        dim,
        matrices: jets.into_iter().map(|j| j.b).collect(),
        eigenvalues,
    })
}

/// `u^α · F(b)^β` at every node.
pub fn speed_field(
    u: &SupportField,
    spec: &CurvatureSpec,
    alpha: f64,
    beta: f64,
) -> Result<Vec<f64>, FieldError> {
    let dim = u.grid().dim();
    if spec.dim() != dim {
        return Err(FieldError::DimensionMismatch {
            grid: dim,
            spec: spec.dim(),
        });
    }
    let st = u.stencil();
    let speeds = par::map_indices(u.grid().execution(), u.grid().len(), |i| {
        node_speed(&st.jet(i), spec, dim, alpha, beta).map_err(|e| e.at_node(i))
    });
    speeds.into_iter().collect()
}

/// Speed at one node; errors carry node 0 and are re-tagged by the caller.
#[inline]
pub(crate) fn node_speed(
    jet: &Jet,
    spec: &CurvatureSpec,
    dim: usize,
    alpha: f64,
    beta: f64,
) -> Result<f64, FieldError> {
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
    let f = spec.value(&radii[..dim]);
    Ok(pow(jet.u, alpha) * pow(f, beta))
}

/// `x^p` with shortcuts for the exponents that dominate in practice.
#[inline]
pub(crate) fn pow(x: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else if p == 1.0 {
        x
    } else if p == -1.0 {
        1.0 / x
    } else if p == 2.0 {
        x * x
    } else if p == 0.5 {
        x.sqrt()
    } else {
        x.powf(p)
    }
}

/// Reconstructs the hypersurface through the inverse Gauss map
/// `X(x) = u(x)·x + ∇u(x)`.
pub fn embed(u: &SupportField) -> Vec<[f64; 3]> {
    let grid = u.grid();
    let st = u.stencil();
    par::map_indices(grid.execution(), grid.len(), |i| {
        let jet = st.jet(i);
        let x = grid.direction(i);
        let [e1, e2] = grid.frame(i);
        let mut p = [0.0; 3];
        for c in 0..3 {
            p[c] = jet.u * x[c] + jet.grad[0] * e1[c] + jet.grad[1] * e2[c];
        }
        p
    })
}
