//! Radial comparison solutions and the straddle rescaling that makes them
//! applicable.

use super::params::FlowParams;
use super::FlowError;
use crate::sphere::SupportField;

/// Spheres of radius `a = min u0` and `b = max u0` evolved by the normalized
/// flow: `u_c(t) = [1 − (1 − c^{−q}) e^{qγt}]^{−1/q}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierPair {
    pub a: f64,
    pub b: f64,
    q: f64,
    gamma: f64,
}

impl BarrierPair {
    pub fn new(a: f64, b: f64, q: f64, gamma: f64) -> Result<Self, FlowError> {
        if !(q < 0.0) {
            return Err(FlowError::BarrierUndefined(format!("q = {q} is not negative")));
        }
        if !(a > 0.0 && a <= 1.0 && 1.0 <= b) {
            return Err(FlowError::BarrierUndefined(format!(
                "need 0 < a <= 1 <= b, got a = {a}, b = {b}"
            )));
        }
        Ok(Self { a, b, q, gamma })
    }

    fn radial(&self, c: f64, t: f64) -> f64 {
        let q = self.q;
        (1.0 - (1.0 - c.powf(-q)) * (q * self.gamma * t).exp()).powf(-1.0 / q)
    }

    /// Lower barrier.
    pub fn u1(&self, t: f64) -> f64 {
        self.radial(self.a, t)
    }

    /// Upper barrier.
    pub fn u2(&self, t: f64) -> f64 {
        self.radial(self.b, t)
    }
}

pub fn barrier_pair(u0: &SupportField, p: &FlowParams) -> Result<BarrierPair, FlowError> {
    BarrierPair::new(u0.min(), u0.max(), p.q(), p.gamma())
}

/// Scales `u0` by `s = 2/(min + max)` so that `min ≤ 1 ≤ max`; a field that
/// already straddles one is returned unchanged with `s = 1`.
pub fn rescale_to_straddle(u0: &SupportField) -> (SupportField, f64) {
    let (lo, hi) = (u0.min(), u0.max());
    if lo <= 1.0 && 1.0 <= hi {
        return (u0.clone(), 1.0);
    }
    let s = 2.0 / (lo + hi);
    // the midpoint scale always straddles; guard the rounding at the ends
    let s = s.clamp(1.0 / hi, 1.0 / lo);
    (u0.scaled(s), s)
}
