use std::f64::consts::PI;
use std::sync::Arc;

use super::filter::PolarFilter;
use super::FieldError;
use crate::par::Execution;

pub const MIN_CIRCLE_NODES: usize = 16;
pub const MIN_THETA_ROWS: usize = 16;
pub const MIN_PHI_COLUMNS: usize = 32;

/// Largest magnitude of the fourth-order second-difference symbol on a unit
/// grid (reached at the Nyquist mode).
const D2_NYQUIST: f64 = 16.0 / 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridShape {
    /// `S¹` with nodes `θ_i = 2πi/N`.
    Circle { nodes: usize },
    /// `S²` with offset colatitudes `θ_j = (j+½)π/Nθ` and longitudes
    /// `φ_k = 2πk/Nφ`; node index is `j·Nφ + k`.
    LatLong { n_theta: usize, n_phi: usize },
}

/// A discretisation of `S^n` for `n ∈ {1, 2}`.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    shape: GridShape,
    weights: Vec<f64>,
    /// `sin θ_j` and `cos θ_j` per latitude row (or per node on the circle).
    row_sin: Vec<f64>,
    row_cos: Vec<f64>,
    filter: Option<PolarFilter>,
    exec: Execution,
}

impl SphereGrid {
    pub fn circle(nodes: usize) -> Result<Self, FieldError> {
        if nodes < MIN_CIRCLE_NODES {
            return Err(FieldError::InvalidGrid(format!(
                "circle needs at least {MIN_CIRCLE_NODES} nodes, got {nodes}"
            )));
        }
        let h = 2.0 * PI / nodes as f64;
        let angles: Vec<f64> = (0..nodes).map(|i| h * i as f64).collect();
        Ok(Self {
            shape: GridShape::Circle { nodes },
            weights: vec![h; nodes],
            row_sin: angles.iter().map(|t| t.sin()).collect(),
            row_cos: angles.iter().map(|t| t.cos()).collect(),
            filter: None,
            exec: Execution::default(),
        })
    }

    pub fn lat_long(n_theta: usize, n_phi: usize) -> Result<Self, FieldError> {
        if n_theta < MIN_THETA_ROWS || n_phi < MIN_PHI_COLUMNS {
            return Err(FieldError::InvalidGrid(format!(
                "lat-long grid needs Nθ >= {MIN_THETA_ROWS} and Nφ >= {MIN_PHI_COLUMNS}, got {n_theta}x{n_phi}"
            )));
        }
        if n_phi % 2 != 0 {
            return Err(FieldError::InvalidGrid(format!(
                "Nφ must be even so stencils can cross the poles, got {n_phi}"
            )));
        }
        let dt = PI / n_theta as f64;
        let dp = 2.0 * PI / n_phi as f64;
        let thetas: Vec<f64> = (0..n_theta).map(|j| (j as f64 + 0.5) * dt).collect();
        // Exact band areas, so the weights telescope to 4π.
        let band = 2.0 * (0.5 * dt).sin() * dp;
        let mut weights = Vec::with_capacity(n_theta * n_phi);
        for t in &thetas {
            weights.extend(std::iter::repeat_n(band * t.sin(), n_phi));
        }
        Ok(Self {
            shape: GridShape::LatLong { n_theta, n_phi },
            weights,
            row_sin: thetas.iter().map(|t| t.sin()).collect(),
            row_cos: thetas.iter().map(|t| t.cos()).collect(),
            filter: None,
            exec: Execution::default(),
        })
    }

    /// Enables the longitudinal low-pass filter on rows near the poles. Row `j`
    /// keeps longitudinal modes `|m| <= max(min_modes, ⌈(Nφ/2)·sin θ_j⌉)`.
    /// Only meaningful on lat-long grids.
    pub fn with_polar_filter(mut self, min_modes: usize) -> Self {
        if let GridShape::LatLong { n_phi, .. } = self.shape {
            self.filter = Some(PolarFilter::new(&self.row_sin, n_phi, min_modes));
        }
        self
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn into_shared(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    /// Intrinsic dimension `n` of `S^n`.
    pub fn dim(&self) -> usize {
        match self.shape {
            GridShape::Circle { .. } => 1,
            GridShape::LatLong { .. } => 2,
        }
    }

    pub fn len(&self) -> usize {
        match self.shape {
            GridShape::Circle { nodes } => nodes,
            GridShape::LatLong { n_theta, n_phi } => n_theta * n_phi,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    pub fn polar_filter(&self) -> Option<&PolarFilter> {
        self.filter.as_ref()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(Δθ, Δφ)`; on the circle both entries are the angular step.
    pub fn steps(&self) -> (f64, f64) {
        match self.shape {
            GridShape::Circle { nodes } => {
                let h = 2.0 * PI / nodes as f64;
                (h, h)
            }
            GridShape::LatLong { n_theta, n_phi } => (PI / n_theta as f64, 2.0 * PI / n_phi as f64),
        }
    }

    /// `(θ, φ)` of node `i`; on the circle `φ = 0`.
    pub fn angles(&self, i: usize) -> (f64, f64) {
        let (dt, dp) = self.steps();
        match self.shape {
            GridShape::Circle { .. } => (dt * i as f64, 0.0),
            GridShape::LatLong { n_phi, .. } => {
                let (j, k) = (i / n_phi, i % n_phi);
                ((j as f64 + 0.5) * dt, dp * k as f64)
            }
        }
    }

    pub(crate) fn row_sin(&self) -> &[f64] {
        &self.row_sin
    }

    pub(crate) fn row_cos(&self) -> &[f64] {
        &self.row_cos
    }

    /// Unit normal `x ∈ S^n` of node `i`, padded to three components.
    pub fn direction(&self, i: usize) -> [f64; 3] {
        match self.shape {
            GridShape::Circle { .. } => [self.row_cos[i], self.row_sin[i], 0.0],
            GridShape::LatLong { n_phi, .. } => {
                let j = i / n_phi;
                let (_, phi) = self.angles(i);
                let (st, ct) = (self.row_sin[j], self.row_cos[j]);
                [st * phi.cos(), st * phi.sin(), ct]
            }
        }
    }

    /// Orthonormal tangent frame `(e_1, e_2)` at node `i`: `(∂_θ, ∂_φ / sin θ)`
    /// on `S²`; on `S¹` only `e_1 = ∂_θ` is meaningful.
    pub fn frame(&self, i: usize) -> [[f64; 3]; 2] {
        match self.shape {
            GridShape::Circle { .. } => [[-self.row_sin[i], self.row_cos[i], 0.0], [0.0; 3]],
            GridShape::LatLong { n_phi, .. } => {
                let j = i / n_phi;
                let (_, phi) = self.angles(i);
                let (st, ct) = (self.row_sin[j], self.row_cos[j]);
                let (sp, cp) = phi.sin_cos();
                [[ct * cp, ct * sp, -st], [-sp, cp, 0.0]]
            }
        }
    }

    /// Total measure `Σ w_i`, which equals `|S^n|` up to rounding.
    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Smallest effective spacing `h`, defined so that `4/h²` bounds the
    /// magnitude of every resolved eigenvalue of the one-dimensional
    /// second-difference operators (including the `1/sin²θ` factor and the
    /// polar filter cutoffs, when active).
    pub fn min_spacing(&self) -> f64 {
        let (dt, dp) = self.steps();
        let nyquist = 2.0 / D2_NYQUIST.sqrt();
        match self.shape {
            GridShape::Circle { .. } => nyquist * dt,
            GridShape::LatLong { n_phi, .. } => {
                let half = n_phi / 2;
                let mut h = nyquist * dt;
                for (j, s) in self.row_sin.iter().enumerate() {
                    let cutoff = self.filter.as_ref().map_or(half, |f| f.cutoff(j));
                    let symbol = d2_symbol(cutoff.min(half) as f64 * dp);
                    h = h.min(2.0 * dp * s / symbol.sqrt());
                }
                h
            }
        }
    }
}

/// Magnitude of the fourth-order second-difference symbol at phase `ξ = m·h`,
/// in units of `1/h²`: `(1 − cos ξ)(7 − cos ξ)/3`.
fn d2_symbol(xi: f64) -> f64 {
    let c = xi.cos();
    (1.0 - c) * (7.0 - c) / 3.0
}
