use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::CurvatureSpec;

/// Sampling box for the midpoint test.
const BOX_LO: f64 = 0.05;
const BOX_HI: f64 = 20.0;
/// Absolute slack on the midpoint inequality, scaled by `max(1, f_*(mid))`.
const MIDPOINT_TOL: f64 = 1e-10;

/// Sampled evidence for inverse concavity (concavity of `f_*`) and for
/// `f_*` vanishing on the boundary of the positive cone.
#[derive(Debug, Clone, Serialize)]
pub struct ConcavityReport {
    pub samples: usize,
    pub violations: usize,
    /// Smallest observed `f_*(mid) − (f_*(λ) + f_*(μ))/2`; negative values beyond
    /// the tolerance are violations.
    pub worst_margin: f64,
    pub worst_pair: Option<(Vec<f64>, Vec<f64>)>,
    /// `(ε, f_*(ε, 1, …, 1))` for decreasing ε.
    pub boundary_probe: Vec<(f64, f64)>,
    /// Log-log slope of the last two probe points; positive means `f_* → 0`.
    pub boundary_exponent: f64,
    pub boundary_vanishes: bool,
}

/// Draws `samples` log-uniform pairs in `[0.05, 20]^n` and tests midpoint
/// concavity of the dual function, then probes `λ_1 → 0⁺`.
pub fn check_inverse_concavity(spec: &CurvatureSpec, samples: usize, seed: u64) -> ConcavityReport {
    let n = spec.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (BOX_LO.ln(), BOX_HI.ln());
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(lo..hi).exp()).collect()
    };

    let mut violations = 0;
    let mut worst_margin = f64::INFINITY;
    let mut worst_pair = None;
    for _ in 0..samples.max(1) {
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
        let at_mid = spec.dual_unchecked(&mid);
        let avg = 0.5 * (spec.dual_unchecked(&a) + spec.dual_unchecked(&b));
        let margin = at_mid - avg;
        if margin < -MIDPOINT_TOL * at_mid.max(1.0) {
            violations += 1;
        }
        if margin < worst_margin {
            worst_margin = margin;
            worst_pair = Some((a, b));
        }
    }

    let boundary_probe: Vec<(f64, f64)> = (0..=8)
        .map(|p| {
            let eps = 10f64.powi(-p);
            let mut l = vec![1.0; n];
            l[0] = eps;
            (eps, spec.dual_unchecked(&l))
        })
        .collect();
    let [.., (e1, v1), (e2, v2)] = boundary_probe[..] else {
        unreachable!("probe has nine points")
    };
    let boundary_exponent = (v2 / v1).ln() / (e2 / e1).ln();
    let decreasing = boundary_probe.windows(2).all(|w| w[1].1 < w[0].1);

    ConcavityReport {
        samples: samples.max(1),
        violations,
        worst_margin,
        worst_pair,
        boundary_probe,
        boundary_exponent,
        boundary_vanishes: decreasing && boundary_exponent > 1e-3,
    }
}
