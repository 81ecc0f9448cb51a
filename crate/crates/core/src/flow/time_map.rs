//! Rescaling factor `φ(t)` and reparametrised time `τ(t)` relating the
//! unnormalized flow to the normalized one: `ũ(τ(t)) = u(t) / φ(t)`.

use super::params::FlowParams;
use super::FlowError;

/// `1 − α − β = −q`.
fn exponent(p: &FlowParams) -> f64 {
    -p.q()
}

fn base(p: &FlowParams, t: f64) -> Result<f64, FlowError> {
    let b = 1.0 + exponent(p) * p.gamma() * t;
    if !(b > 0.0) || !t.is_finite() {
        return Err(FlowError::DomainError(format!(
            "1 + (1-α-β)γt = {b} must be positive (t = {t})"
        )));
    }
    Ok(b)
}

/// `e^{γt}` when `α = 1 − β`, else `(1 + (1−α−β)γt)^{1/(1−α−β)}`.
pub fn phi_of_t(p: &FlowParams, t: f64) -> Result<f64, FlowError> {
    if p.is_critical() {
        return Ok((p.gamma() * t).exp());
    }
    Ok(base(p, t)?.powf(1.0 / exponent(p)))
}

/// `t` when `α = 1 − β`, else `log((1−α−β)γt + 1) / ((1−α−β)γ)`.
pub fn tau_of_t(p: &FlowParams, t: f64) -> Result<f64, FlowError> {
    if p.is_critical() {
        return Ok(t);
    }
    let c = exponent(p) * p.gamma();
    Ok(base(p, t)?.ln() / c)
}

/// Inverse of [`tau_of_t`].
pub fn t_of_tau(p: &FlowParams, tau: f64) -> Result<f64, FlowError> {
    if p.is_critical() {
        return Ok(tau);
    }
    let c = exponent(p) * p.gamma();
    let t = (c * tau).exp_m1() / c;
    if !t.is_finite() || base(p, t).is_err() {
        return Err(FlowError::DomainError(format!("τ = {tau} has no preimage")));
    }
    Ok(t)
}
