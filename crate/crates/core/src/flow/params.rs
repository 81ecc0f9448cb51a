use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::FlowError;
use crate::curvature::CurvatureSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// `u_t = u^α F^β − γu`; the unit sphere is stationary.
    #[default]
    Normalized,
    /// `u_t = u^α F^β`.
    Unnormalized,
}

impl FromStr for Mode {
    type Err = FlowError;

    fn from_str(s: &str) -> Result<Self, FlowError> {
        match s.trim() {
            "normalized" => Ok(Self::Normalized),
            "unnormalized" => Ok(Self::Unnormalized),
            other => Err(FlowError::InvalidParams(format!(
                "mode must be `normalized` or `unnormalized`, got `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Normalized => "normalized",
            Self::Unnormalized => "unnormalized",
        })
    }
}

/// Exponents, normalising constant and curvature function of a flow with
/// speed `u^α f^β`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowParams {
    alpha: f64,
    beta: f64,
    gamma: f64,
    q: f64,
    mode: Mode,
    spec: CurvatureSpec,
}

impl FlowParams {
    pub fn new(spec: CurvatureSpec, alpha: f64, beta: f64, mode: Mode) -> Result<Self, FlowError> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(FlowError::InvalidParams(format!(
                "exponents must be finite, got alpha = {alpha}, beta = {beta}"
            )));
        }
        if beta <= 0.0 {
            return Err(FlowError::InvalidParams(format!(
                "beta must be positive for a parabolic flow, got {beta}"
            )));
        }
        Ok(Self {
            alpha,
            beta,
            gamma: spec.gamma(beta),
            q: alpha + beta - 1.0,
            mode,
            spec,
        })
    }

    pub fn normalized(spec: CurvatureSpec, alpha: f64, beta: f64) -> Result<Self, FlowError> {
        Self::new(spec, alpha, beta, Mode::Normalized)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `q = α + β − 1`.
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn spec(&self) -> &CurvatureSpec {
        &self.spec
    }

    pub fn with_mode(&self, mode: Mode) -> Self {
        Self { mode, ..self.clone() }
    }

    /// `α ≤ 0 < β ≤ 1 − α`.
    pub fn in_theorem_range(&self) -> bool {
        self.alpha <= 0.0 && self.beta > 0.0 && self.beta <= 1.0 - self.alpha
    }

    /// The `α = 1 − β` case, where the rescaling is exponential and the
    /// limit radius need not be one.
    pub fn is_critical(&self) -> bool {
        self.q.abs() <= 1e-14
    }
}
