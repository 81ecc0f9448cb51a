//! Fourth-order central differences on the circle and on the offset lat-long
//! grid. Two ghost rows past each pole are filled from the row on the far
//! side of the pole (`(−θ, φ) ≡ (θ, φ + π)`), so the same five-point stencils
//! apply on every row.

use super::grid::{GridShape, SphereGrid};

const GHOST: usize = 2;

/// `12h · u'` from five equally spaced samples. Grouped so constants give an
/// exact zero.
#[inline(always)]
fn d1([m2, m1, _, p1, p2]: [f64; 5]) -> f64 {
    (m2 - p2) + 8.0 * (p1 - m1)
}

/// `12h² · u''` from five equally spaced samples.
#[inline(always)]
fn d2([m2, m1, c, p1, p2]: [f64; 5]) -> f64 {
    16.0 * (m1 + p1) - (m2 + p2) - 30.0 * c
}

/// `x mod n` for `x < 3n`, without an integer division.
#[inline(always)]
fn wrap(x: usize, n: usize) -> usize {
    let x = if x >= n { x - n } else { x };
    if x >= n {
        x - n
    } else {
        x
    }
}

/// Local first and second order data of `u` at a node, in the orthonormal
/// frame: gradient components and the radii matrix `b = ∇²u + u·I` stored as
/// `(b11, b12, b22)`. On `S¹` only `grad[0]` and `b[0]` are used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub u: f64,
    pub grad: [f64; 2],
    pub b: [f64; 3],
}

impl Jet {
    /// Eigenvalues of `b` in ascending order (`[b11, b11]` on `S¹`).
    #[inline]
    pub fn radii(&self, dim: usize) -> [f64; 2] {
        if dim == 1 {
            return [self.b[0], self.b[0]];
        }
        sym2_eigenvalues(self.b)
    }

    #[inline]
    pub fn grad_norm(&self) -> f64 {
        (self.grad[0] * self.grad[0] + self.grad[1] * self.grad[1]).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite()
            && self.grad.iter().all(|g| g.is_finite())
            && self.b.iter().all(|b| b.is_finite())
    }
}

/// Closed-form eigenvalues of the symmetric matrix `[[a, c], [c, d]]`.
#[inline]
pub fn sym2_eigenvalues([a, c, d]: [f64; 3]) -> [f64; 2] {
    let mean = 0.5 * (a + d);
    // plain sqrt: entries are O(u), far from overflow, and hypot is slow
    let disc = 0.5 * ((a - d) * (a - d) + 4.0 * c * c).sqrt();
    [mean - disc, mean + disc]
}

/// Borrowed view of a field with pole ghost rows filled, ready for
/// per-node differentiation.
pub struct Stencil<'a> {
    grid: &'a SphereGrid,
    values: &'a [f64],
    /// `(Nθ + 4) × Nφ` extended array; empty on the circle.
    ext: Vec<f64>,
    /// `1/sin θ_j` and `cot θ_j` per row.
    inv_sin: Vec<f64>,
    cot: Vec<f64>,
    /// Stencil normalisations `[u_t, u_tt, u_p, u_pp, u_tp]`.
    scale: [f64; 5],
}

impl<'a> Stencil<'a> {
    pub fn new(grid: &'a SphereGrid, values: &'a [f64]) -> Self {
        debug_assert_eq!(grid.len(), values.len());
        let ext = match grid.shape() {
            GridShape::Circle { .. } => Vec::new(),
            GridShape::LatLong { n_theta, n_phi } => {
                let half = n_phi / 2;
                let mut ext = vec![0.0; (n_theta + 2 * GHOST) * n_phi];
                ext[GHOST * n_phi..(GHOST + n_theta) * n_phi].copy_from_slice(values);
                for g in 0..GHOST {
                    // north: ghost row −1−g mirrors row g
                    let dst_n = (GHOST - 1 - g) * n_phi;
                    let src_n = g * n_phi;
                    // south: ghost row Nθ+g mirrors row Nθ−1−g
                    let dst_s = (GHOST + n_theta + g) * n_phi;
                    let src_s = (n_theta - 1 - g) * n_phi;
                    for k in 0..n_phi {
                        let kk = (k + half) % n_phi;
                        ext[dst_n + k] = values[src_n + kk];
                        ext[dst_s + k] = values[src_s + kk];
                    }
                }
                ext
            }
        };
        let (dt, dp) = grid.steps();
        let scale = [
            1.0 / (12.0 * dt),
            1.0 / (12.0 * dt * dt),
            1.0 / (12.0 * dp),
            1.0 / (12.0 * dp * dp),
            1.0 / (144.0 * dt * dp),
        ];
        let (inv_sin, cot) = match grid.shape() {
            GridShape::Circle { .. } => (Vec::new(), Vec::new()),
            GridShape::LatLong { .. } => grid
                .row_sin()
                .iter()
                .zip(grid.row_cos())
                .map(|(s, c)| (1.0 / s, c / s))
                .unzip(),
        };
        Self {
            grid,
            values,
            ext,
            inv_sin,
            cot,
            scale,
        }
    }

    pub fn grid(&self) -> &SphereGrid {
        self.grid
    }

    #[inline]
    pub fn jet(&self, i: usize) -> Jet {
        match self.grid.shape() {
            GridShape::Circle { nodes } => self.circle_jet(i, nodes),
            GridShape::LatLong { n_phi, .. } => self.sphere_jet(i, n_phi),
        }
    }

    fn circle_jet(&self, i: usize, n: usize) -> Jet {
        let v = self.values;
        let at = |s: usize| v[wrap(i + n + s - 2, n)];
        let samples = [at(0), at(1), at(2), at(3), at(4)];
        let u = v[i];
        Jet {
            u,
            grad: [d1(samples) * self.scale[0], 0.0],
            b: [d2(samples) * self.scale[1] + u, 0.0, 0.0],
        }
    }

    fn sphere_jet(&self, i: usize, n_phi: usize) -> Jet {
        let j = i / n_phi;
        let k = i - j * n_phi;
        let col = |off: usize| wrap(k + n_phi + off - 2, n_phi);
        let cols = [col(0), col(1), k, col(3), col(4)];
        let row = |s: usize| &self.ext[(j + s) * n_phi..(j + s + 1) * n_phi];

        let along = |line: &[f64]| [line[cols[0]], line[cols[1]], line[k], line[cols[3]], line[cols[4]]];
        let centre = row(GHOST);
        let phi_samples = along(centre);
        let theta_samples = [row(0)[k], row(1)[k], centre[k], row(3)[k], row(4)[k]];
        let dphi_rows = [
            d1(along(row(0))),
            d1(along(row(1))),
            0.0,
            d1(along(row(3))),
            d1(along(row(4))),
        ];

        let [s_t, s_tt, s_p, s_pp, s_tp] = self.scale;
        let u_t = d1(theta_samples) * s_t;
        let u_tt = d2(theta_samples) * s_tt;
        let u_p = d1(phi_samples) * s_p;
        let u_pp = d2(phi_samples) * s_pp;
        let u_tp = d1(dphi_rows) * s_tp;

        let u = centre[k];
        let inv_sin = self.inv_sin[j];
        let cot = self.cot[j];
        Jet {
            u,
            grad: [u_t, u_p * inv_sin],
            b: [
                u_tt + u,
                (u_tp - cot * u_p) * inv_sin,
                u_pp * inv_sin * inv_sin + cot * u_t + u,
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_match_characteristic_roots() {
        for m in [[2.0, 0.5, 1.0], [1.0, 0.0, 1.0], [3.0, -1e-9, 3.0], [0.1, 4.0, -2.0]] {
            let [l1, l2] = sym2_eigenvalues(m);
            let [a, c, d] = m;
            for l in [l1, l2] {
                // det(b − λI) = 0
                let p = (a - l) * (d - l) - c * c;
                assert!(p.abs() <= 1e-10 * (1.0 + a.abs() + d.abs()).powi(2));
            }
            assert!(l1 <= l2);
        }
    }

    #[test]
    fn constant_field_has_flat_jet() {
        let g = SphereGrid::lat_long(16, 32).unwrap();
        let v = vec![3.5; g.len()];
        let st = Stencil::new(&g, &v);
        for i in 0..g.len() {
            let jet = st.jet(i);
            assert_eq!(jet.grad, [0.0, 0.0]);
            assert_eq!(jet.b, [3.5, 0.0, 3.5]);
        }
    }
}
