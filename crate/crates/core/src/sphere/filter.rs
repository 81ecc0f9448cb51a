//! Longitudinal Fourier low-pass for rows near the poles of a lat-long grid.
//!
//! Row `j` keeps modes `|m| <= M_j`, where `M_j` roughly matches the number of
//! modes a row at the equator resolves over the same arc length. This lifts
//! the `sin²θ` factor out of the explicit step restriction.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub struct PolarFilter {
    n_phi: usize,
    min_modes: usize,
    cutoffs: Vec<usize>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for PolarFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PolarFilter")
            .field("n_phi", &self.n_phi)
            .field("min_modes", &self.min_modes)
            .field("cutoffs", &self.cutoffs)
            .finish()
    }
}

impl PolarFilter {
    pub(crate) fn new(row_sin: &[f64], n_phi: usize, min_modes: usize) -> Self {
        let half = n_phi / 2;
        let cutoffs = row_sin
            .iter()
            .map(|s| ((half as f64 * s).ceil() as usize).clamp(min_modes.min(half), half))
            .collect();
        let mut planner = FftPlanner::new();
        Self {
            n_phi,
            min_modes,
            cutoffs,
            forward: planner.plan_fft_forward(n_phi),
            inverse: planner.plan_fft_inverse(n_phi),
        }
    }

    pub fn min_modes(&self) -> usize {
        self.min_modes
    }

    /// Highest longitudinal wavenumber kept on row `j`.
    pub fn cutoff(&self, row: usize) -> usize {
        self.cutoffs[row]
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    /// Number of rows that are actually truncated.
    pub fn active_rows(&self) -> usize {
        self.cutoffs.iter().filter(|&&m| m < self.n_phi / 2).count()
    }

    /// Projects every row of a row-major `Nθ × Nφ` array onto its kept modes.
    pub fn apply(&self, values: &mut [f64]) {
        let n = self.n_phi;
        let half = n / 2;
        let mut buf = vec![Complex::new(0.0, 0.0); n];
        let mut scratch = vec![Complex::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        let scale = 1.0 / n as f64;
        for (row, &cut) in values.chunks_exact_mut(n).zip(&self.cutoffs) {
            if cut >= half {
                continue;
            }
            for (b, v) in buf.iter_mut().zip(row.iter()) {
                *b = Complex::new(*v, 0.0);
            }
            self.forward.process_with_scratch(&mut buf, &mut scratch);
            for b in &mut buf[cut + 1..n - cut] {
                *b = Complex::new(0.0, 0.0);
            }
            self.inverse.process_with_scratch(&mut buf, &mut scratch);
            for (v, b) in row.iter_mut().zip(&buf) {
                *v = b.re * scale;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rows(n_theta: usize) -> Vec<f64> {
        (0..n_theta)
            .map(|j| ((j as f64 + 0.5) * PI / n_theta as f64).sin())
            .collect()
    }

    #[test]
    fn keeps_low_modes_and_removes_high_ones() {
        let (nt, np) = (16, 32);
        let f = PolarFilter::new(&rows(nt), np, 2);
        assert_eq!(f.cutoff(0), 2); // ceil(16·sin(π/32)) = ceil(1.57)
        assert_eq!(f.cutoff(nt / 2), 16);
        let mut v = vec![0.0; nt * np];
        for k in 0..np {
            let phi = 2.0 * PI * k as f64 / np as f64;
            v[k] = 1.0 + 0.5 * (2.0 * phi).cos() + 0.25 * (9.0 * phi).sin();
        }
        f.apply(&mut v);
        for k in 0..np {
            let phi = 2.0 * PI * k as f64 / np as f64;
            assert!((v[k] - (1.0 + 0.5 * (2.0 * phi).cos())).abs() < 1e-14);
        }
    }

    #[test]
    fn is_a_projection() {
        let (nt, np) = (16, 64);
        let f = PolarFilter::new(&rows(nt), np, 2);
        let mut v: Vec<f64> = (0..nt * np).map(|i| ((i * 7919) % 113) as f64 / 113.0).collect();
        f.apply(&mut v);
        let once = v.clone();
        f.apply(&mut v);
        for (a, b) in once.iter().zip(&v) {
            assert!((a - b).abs() < 1e-13);
        }
    }
}
