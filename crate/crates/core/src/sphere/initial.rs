use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::SupportField;
use super::grid::SphereGrid;
use super::FieldError;

pub const DEFAULT_SEED: u64 = 20_200_401;

/// Initial data descriptor.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialKind {
    Sphere { radius: f64 },
    /// Semi-axes `a_1, …, a_{n+1}`; support function `√(Σ a_i² x_i²)`.
    Ellipsoid { axes: Vec<f64> },
    /// `r·(1 + Σ ε_l Y_l)` where on `S²` each `Y_l = P_l(x·d_l)` is a zonal
    /// harmonic about a seeded random axis `d_l`, and on `S¹`
    /// `Y_k = cos(k(θ − ψ_k))` with a seeded random phase.
    PerturbedSphere {
        radius: f64,
        modes: Vec<(usize, f64)>,
        seed: u64,
    },
}

impl InitialKind {
    /// Parses `sphere:R`, `ellipsoid:A1,A2[,A3]` or `perturbed:R:L=EPS,L=EPS`.
    pub fn parse(text: &str, seed: u64) -> Result<Self, FieldError> {
        let bad = |msg: &str| FieldError::InvalidInitial(format!("`{text}`: {msg}"));
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("`{s}` is not a number")));
        let (kind, rest) = text.split_once(':').ok_or_else(|| bad("expected `kind:params`"))?;
        match kind.trim() {
            "sphere" => Ok(Self::Sphere { radius: num(rest)? }),
            "ellipsoid" => Ok(Self::Ellipsoid {
                axes: rest.split(',').map(num).collect::<Result<_, _>>()?,
            }),
            "perturbed" => {
                let (r, modes) = rest.split_once(':').unwrap_or((rest, ""));
                let modes = modes
                    .split(',')
                    .filter(|m| !m.trim().is_empty())
                    .map(|m| {
                        let (l, e) = m.split_once('=').ok_or_else(|| bad("modes are `L=EPS`"))?;
                        let l = l.trim().parse::<usize>().map_err(|_| bad("mode index must be an integer"))?;
                        Ok((l, num(e)?))
                    })
                    .collect::<Result<_, FieldError>>()?;
                Ok(Self::PerturbedSphere {
                    radius: num(r)?,
                    modes,
                    seed,
                })
            }
            other => Err(bad(&format!("unknown kind `{other}`"))),
        }
    }
}

impl fmt::Display for InitialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Sphere { radius } => write!(f, "sphere:{radius}"),
            Self::Ellipsoid { axes } => {
                let axes: Vec<String> = axes.iter().map(|a| a.to_string()).collect();
                write!(f, "ellipsoid:{}", axes.join(","))
            }
            Self::PerturbedSphere { radius, modes, .. } => {
                let modes: Vec<String> = modes.iter().map(|(l, e)| format!("{l}={e}")).collect();
                write!(f, "perturbed:{radius}:{}", modes.join(","))
            }
        }
    }
}

/// Builds and certifies an initial support field.
pub fn make_initial(kind: &InitialKind, grid: Arc<SphereGrid>) -> Result<SupportField, FieldError> {
    let n = grid.dim();
    let values: Vec<f64> = match kind {
        InitialKind::Sphere { radius } => {
            if !(*radius > 0.0) {
                return Err(FieldError::InvalidInitial(format!("radius {radius} must be positive")));
            }
            vec![*radius; grid.len()]
        }
        InitialKind::Ellipsoid { axes } => {
            if axes.len() != n + 1 || axes.iter().any(|a| !(*a > 0.0)) {
                return Err(FieldError::InvalidInitial(format!(
                    "ellipsoid in R^{} needs {} positive semi-axes, got {axes:?}",
                    n + 1,
                    n + 1
                )));
            }
            (0..grid.len())
                .map(|i| ellipsoid_support(axes, grid.direction(i)))
                .collect()
        }
        InitialKind::PerturbedSphere { radius, modes, seed } => {
            if !(*radius > 0.0) {
                return Err(FieldError::InvalidInitial(format!("radius {radius} must be positive")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut v = vec![*radius; grid.len()];
            for &(l, eps) in modes {
                if n == 1 {
                    let phase = rng.gen_range(0.0..2.0 * PI);
                    for (i, vi) in v.iter_mut().enumerate() {
                        let (theta, _) = grid.angles(i);
                        *vi += radius * eps * (l as f64 * (theta - phase)).cos();
                    }
                } else {
                    let z: f64 = rng.gen_range(-1.0..1.0);
                    let az = rng.gen_range(0.0..2.0 * PI);
                    let s = (1.0 - z * z).sqrt();
                    let axis = [s * az.cos(), s * az.sin(), z];
                    for (i, vi) in v.iter_mut().enumerate() {
                        let x = grid.direction(i);
                        let t = x[0] * axis[0] + x[1] * axis[1] + x[2] * axis[2];
                        *vi += radius * eps * legendre(l, t);
                    }
                }
            }
            v
        }
    };
    let field = SupportField::new(grid, values).map_err(|e| match e {
        FieldError::NonPositiveSupport { node, value } => FieldError::NotConvex {
            node,
            lambda_min: value,
        },
        other => other,
    })?;
    field.certify_convex()?;
    Ok(field)
}

/// Support function of the ellipsoid (or ellipse) with the given semi-axes.
pub fn ellipsoid_support(axes: &[f64], x: [f64; 3]) -> f64 {
    axes.iter()
        .zip(x)
        .map(|(a, xi)| a * a * xi * xi)
        .sum::<f64>()
        .sqrt()
}

/// Legendre polynomial `P_l(t)` by the three-term recurrence.
pub fn legendre(l: usize, t: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, t);
    if l == 0 {
        return p0;
    }
    for k in 1..l {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * t * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere_grid() -> Arc<SphereGrid> {
        SphereGrid::lat_long(16, 32).unwrap().into_shared()
    }

    #[test]
    fn unit_sphere() {
        let u = make_initial(&InitialKind::Sphere { radius: 1.0 }, sphere_grid()).unwrap();
        assert!(u.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn ellipsoid_matches_closed_form() {
        let g = sphere_grid();
        let u = make_initial(&InitialKind::Ellipsoid { axes: vec![2.0, 1.0, 1.0] }, g.clone()).unwrap();
        for i in 0..g.len() {
            let x = g.direction(i);
            let expect = (4.0 * x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            assert!((u.values()[i] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn strong_high_mode_is_not_convex() {
        // u'' + u = 1 + ε(1 − k²)cos(..), which is negative for ε(k² − 1) > 1
        let g = SphereGrid::circle(64).unwrap().into_shared();
        let kind = InitialKind::PerturbedSphere {
            radius: 1.0,
            modes: vec![(6, 0.5)],
            seed: DEFAULT_SEED,
        };
        assert!(matches!(make_initial(&kind, g), Err(FieldError::NotConvex { .. })));
    }

    #[test]
    fn mild_perturbation_is_accepted_and_seeded() {
        let kind = InitialKind::parse("perturbed:1:2=0.05,3=0.02", 7).unwrap();
        let a = make_initial(&kind, sphere_grid()).unwrap();
        let b = make_initial(&kind, sphere_grid()).unwrap();
        assert_eq!(a.values(), b.values());
        let other = InitialKind::parse("perturbed:1:2=0.05,3=0.02", 8).unwrap();
        let c = make_initial(&other, sphere_grid()).unwrap();
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn parse_and_display() {
        for text in ["sphere:1.5", "ellipsoid:1.2,1,0.85", "perturbed:1:2=0.1,4=0.01"] {
            assert_eq!(InitialKind::parse(text, 1).unwrap().to_string(), text);
        }
        assert!(InitialKind::parse("cube:1", 1).is_err());
        assert!(InitialKind::parse("perturbed:1:2", 1).is_err());
        let g = sphere_grid();
        assert!(make_initial(&InitialKind::Ellipsoid { axes: vec![1.0, 2.0] }, g).is_err());
    }

    #[test]
    fn legendre_values() {
        assert_eq!(legendre(0, 0.3), 1.0);
        assert_eq!(legendre(1, 0.3), 0.3);
        let t: f64 = 0.3;
        assert!((legendre(2, t) - 0.5 * (3.0 * t * t - 1.0)).abs() < 1e-15);
        assert!((legendre(3, t) - 0.5 * (5.0 * t.powi(3) - 3.0 * t)).abs() < 1e-15);
        for l in 0..10 {
            assert!((legendre(l, 1.0) - 1.0).abs() < 1e-13);
        }
    }
}
