//! Time integration of the support-function flow and the diagnostics that
//! monitor it.

pub mod barrier;
pub mod checks;
pub mod consistency;
pub mod diagnostics;
pub mod fit;
pub mod params;
pub mod rhs;
pub mod run;
pub mod time_map;

use thiserror::Error;

use crate::curvature::CurvatureError;
use crate::sphere::FieldError;

pub use barrier::{barrier_pair, rescale_to_straddle, BarrierPair};
pub use checks::{InvariantVerdict, Status};
pub use consistency::{normalization_discrepancy, NormalizationReport};
pub use diagnostics::{diagnostics, DiagnosticsRecord, CSV_HEADER};
pub use fit::{fit_decay_rate, DecayFit, DEFAULT_BURN_IN};
pub use params::{FlowParams, Mode};
pub use rhs::{rhs, stable_dt, step, DEFAULT_CFL};
pub use run::{run, RunFailure, RunOptions, RunResult, RunSummary};
pub use time_map::{phi_of_t, t_of_tau, tau_of_t};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error("invalid flow parameters: {0}")]
    InvalidParams(String),
    #[error("barriers undefined: {0}")]
    BarrierUndefined(String),
    #[error("outside the admissible time range: {0}")]
    DomainError(String),
    #[error("need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("sample {index} is not positive ({value})")]
    NonPositiveValues { index: usize, value: f64 },
}
