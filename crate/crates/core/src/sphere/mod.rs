//! Scalar fields on `S¹` and `S²`: grids, stencils, radii matrices, initial
//! data and mesh export.

pub mod export;
pub mod field;
pub mod filter;
pub mod grid;
pub mod initial;
pub mod stencil;

use thiserror::Error;

pub use field::{
    covariant_gradient, embed, radii_matrix, speed_field, RadiiField, SupportField, CONVEXITY_TOL,
    SPEED_RADIUS_FLOOR,
};
pub use filter::PolarFilter;
pub use grid::{GridShape, SphereGrid};
pub use initial::{make_initial, InitialKind, DEFAULT_SEED};
pub use stencil::{sym2_eigenvalues, Jet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field has {got} values but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at node {node}")]
    NumericalBlowup { node: usize },
    #[error("support function {value} <= 0 at node {node}")]
    NonPositiveSupport { node: usize, value: f64 },
    #[error("not uniformly convex: smallest radius {lambda_min:e} at node {node}")]
    NotConvex { node: usize, lambda_min: f64 },
    #[error("convexity lost: smallest radius {lambda_min:e} at node {node}")]
    ConvexityLost { node: usize, lambda_min: f64 },
    #[error("grid is S^{grid} but the curvature function is for n = {spec}")]
    DimensionMismatch { grid: usize, spec: usize },
    #[error("invalid initial data {0}")]
    InvalidInitial(String),
}

impl FieldError {
    /// Node index carried by the error, if any.
    pub fn node(&self) -> Option<usize> {
        match self {
            Self::NumericalBlowup { node }
            | Self::NonPositiveSupport { node, .. }
            | Self::NotConvex { node, .. }
            | Self::ConvexityLost { node, .. } => Some(*node),
            _ => None,
        }
    }

    pub(crate) fn at_node(mut self, i: usize) -> Self {
        match &mut self {
            Self::NumericalBlowup { node }
            | Self::NonPositiveSupport { node, .. }
            | Self::NotConvex { node, .. }
            | Self::ConvexityLost { node, .. } => *node = i,
            _ => {}
        }
        self
    }
}
