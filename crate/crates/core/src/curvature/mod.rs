//! Symmetric, degree-one homogeneous curvature functions of the principal
//! radii, together with their gradients, duals and the normalising constant
//! used by the flow.
//!
//! Three families are supported: roots of elementary symmetric polynomials
//! (`sigma:m`), power sums (`pmean:k`) and weighted geometric products of
//! other members (`product:(...)`).

mod concavity;
mod parse;

pub use concavity::{check_inverse_concavity, ConcavityReport};

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurvatureError {
    #[error("radius {index} is not strictly positive ({value})")]
    NonPositiveRadii { index: usize, value: f64 },
    #[error("expected {expected} radii, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid curvature spec: {0}")]
    InvalidSpec(String),
    #[error("cannot parse curvature spec at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, CurvatureError>;

/// Tolerance on the sum of product weights.
const WEIGHT_SUM_TOL: f64 = 1e-12;

/// The functional form of `f`, independent of the dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `(e_m(λ))^{1/m}` where `e_m` is the m-th elementary symmetric polynomial.
    SigmaM(usize),
    /// `(Σ λ_i^k)^{1/k}`.
    PowerMean(f64),
    /// `Π f_i^{w_i}` with nonnegative weights summing to one.
    Product(Vec<(Family, f64)>),
}

impl Family {
    fn validate(&self, dim: usize) -> Result<()> {
        match self {
            Family::SigmaM(m) => {
                if *m < 1 || *m > dim {
                    return Err(CurvatureError::InvalidSpec(format!(
                        "sigma:{m} needs 1 <= m <= n = {dim}"
                    )));
                }
            }
            Family::PowerMean(k) => {
                if !(k.is_finite() && *k > 0.0) {
                    return Err(CurvatureError::InvalidSpec(format!(
                        "pmean:{k} needs a finite k > 0"
                    )));
                }
            }
            Family::Product(factors) => {
                if factors.is_empty() {
                    return Err(CurvatureError::InvalidSpec(
                        "product needs at least one factor".into(),
                    ));
                }
                let mut sum = 0.0;
                for (factor, w) in factors {
                    if !(w.is_finite() && *w >= 0.0) {
                        return Err(CurvatureError::InvalidSpec(format!(
                            "product weight {w} must be finite and nonnegative"
                        )));
                    }
                    factor.validate(dim)?;
                    sum += w;
                }
                if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
                    return Err(CurvatureError::InvalidSpec(format!(
                        "product weights sum to {sum}, expected 1"
                    )));
                }
            }
        }
        Ok(())
    }

    fn value(&self, radii: &[f64]) -> f64 {
        match self {
            Family::SigmaM(1) => radii.iter().sum(),
            Family::SigmaM(m) => {
                let e = elementary_symmetric(radii, *m, None);
                e.powf(1.0 / *m as f64)
            }
            Family::PowerMean(k) => power_mean(radii, *k),
            Family::Product(factors) => factors
                .iter()
                .filter(|(_, w)| *w > 0.0)
                .map(|(fam, w)| w * fam.value(radii).ln())
                .sum::<f64>()
                .exp(),
        }
    }

    /// Writes `∂f/∂λ_i` into `out` and returns `f`.
    fn gradient_into(&self, radii: &[f64], out: &mut [f64]) -> f64 {
        match self {
            Family::SigmaM(1) => {
                out.iter_mut().for_each(|g| *g = 1.0);
                radii.iter().sum()
            }
            Family::SigmaM(m) => {
                let m = *m;
                let e = elementary_symmetric(radii, m, None);
                let f = e.powf(1.0 / m as f64);
                let scale = f / (m as f64 * e);
                for (i, g) in out.iter_mut().enumerate() {
                    *g = scale * elementary_symmetric(radii, m - 1, Some(i));
                }
                f
            }
            Family::PowerMean(k) => {
                let f = power_mean(radii, *k);
                for (g, &l) in out.iter_mut().zip(radii) {
                    *g = (l / f).powf(k - 1.0);
                }
                f
            }
            Family::Product(factors) => {
                out.iter_mut().for_each(|g| *g = 0.0);
                let mut scratch = vec![0.0; radii.len()];
                let mut log_f = 0.0;
                for (fam, w) in factors.iter().filter(|(_, w)| *w > 0.0) {
                    let fi = fam.gradient_into(radii, &mut scratch);
                    log_f += w * fi.ln();
                    for (g, s) in out.iter_mut().zip(&scratch) {
                        *g += w * s / fi;
                    }
                }
                let f = log_f.exp();
                out.iter_mut().for_each(|g| *g *= f);
                f
            }
        }
    }
}

fn power_mean(radii: &[f64], k: f64) -> f64 {
    if k == 1.0 {
        return radii.iter().sum();
    }
    if k == 2.0 {
        return radii.iter().map(|l| l * l).sum::<f64>().sqrt();
    }
    // Factor out the largest radius so λ^k cannot overflow for large k.
    let top = radii.iter().cloned().fold(0.0, f64::max);
    let s: f64 = radii.iter().map(|l| (l / top).powf(k)).sum();
    top * s.powf(1.0 / k)
}

/// Elementary symmetric polynomial `e_m` of `values`, optionally leaving out
/// one index. Uses the one-pass recurrence `e_j ← e_j + x·e_{j-1}`.
pub fn elementary_symmetric(values: &[f64], m: usize, skip: Option<usize>) -> f64 {
    const STACK: usize = 16;
    let mut stack = [0.0f64; STACK + 1];
    let mut heap;
    let e: &mut [f64] = if m <= STACK {
        &mut stack[..=m]
    } else {
        heap = vec![0.0; m + 1];
        &mut heap
    };
    e[0] = 1.0;
    for (i, &x) in values.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        for j in (1..=m).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e[m]
}

/// A validated curvature function `f` on `Γ⁺ ⊂ R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureSpec {
    family: Family,
    dim: usize,
}

impl CurvatureSpec {
    pub fn new(family: Family, dim: usize) -> Result<Self> {
        if dim < 1 {
            return Err(CurvatureError::InvalidSpec("dimension must be >= 1".into()));
        }
        family.validate(dim)?;
        Ok(Self { family, dim })
    }

    /// Parses `sigma:m`, `pmean:k` or `product:(spec*w,...)` for dimension `dim`.
    pub fn parse(text: &str, dim: usize) -> Result<Self> {
        Self::new(parse::parse_family(text)?, dim)
    }

    pub fn sigma(m: usize, dim: usize) -> Result<Self> {
        Self::new(Family::SigmaM(m), dim)
    }

    pub fn power_mean(k: f64, dim: usize) -> Result<Self> {
        Self::new(Family::PowerMean(k), dim)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check(&self, radii: &[f64]) -> Result<()> {
        if radii.len() != self.dim {
            return Err(CurvatureError::DimensionMismatch {
                expected: self.dim,
                got: radii.len(),
            });
        }
        check_positive(radii)
    }

    /// `f(λ)`.
    pub fn eval(&self, radii: &[f64]) -> Result<f64> {
        self.check(radii)?;
        Ok(self.family.value(radii))
    }

    /// `(∂f/∂λ_1, …, ∂f/∂λ_n)`.
    pub fn gradient(&self, radii: &[f64]) -> Result<Vec<f64>> {
        self.check(radii)?;
        let mut out = vec![0.0; radii.len()];
        self.family.gradient_into(radii, &mut out);
        Ok(out)
    }

    /// The dual `f_*(λ) = 1 / f(1/λ_1, …, 1/λ_n)`.
    pub fn dual(&self, radii: &[f64]) -> Result<f64> {
        self.check(radii)?;
        Ok(self.dual_unchecked(radii))
    }

    /// `f(1, …, 1)^β`, the rate that keeps the unit sphere stationary.
    pub fn gamma(&self, beta: f64) -> f64 {
        self.diagonal_value().powf(beta)
    }

    pub fn diagonal_value(&self) -> f64 {
        self.family.value(&vec![1.0; self.dim])
    }

    /// Unchecked evaluation for hot loops; `radii` must lie in `Γ⁺`.
    #[inline]
    pub(crate) fn value(&self, radii: &[f64]) -> f64 {
        self.family.value(radii)
    }

    #[inline]
    pub(crate) fn gradient_into(&self, radii: &[f64], out: &mut [f64]) -> f64 {
        self.family.gradient_into(radii, out)
    }

    pub(crate) fn dual_unchecked(&self, radii: &[f64]) -> f64 {
        let inv: Vec<f64> = radii.iter().map(|l| 1.0 / l).collect();
        1.0 / self.family.value(&inv)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::SigmaM(m) => write!(f, "sigma:{m}"),
            Family::PowerMean(k) => write!(f, "pmean:{k}"),
            Family::Product(factors) => {
                write!(f, "product:(")?;
                for (i, (fam, w)) in factors.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{fam}*{w}")?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for CurvatureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.family.fmt(f)
    }
}

fn check_positive(radii: &[f64]) -> Result<()> {
    match radii.iter().position(|l| !(*l > 0.0) || !l.is_finite()) {
        Some(index) => Err(CurvatureError::NonPositiveRadii {
            index,
            value: radii[index],
        }),
        None => Ok(()),
    }
}

/// Principal radii, every component strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiiVector(Vec<f64>);

impl RadiiVector {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        check_positive(&radii)?;
        Ok(Self(radii))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl AsRef<[f64]> for RadiiVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub fn eval_f(spec: &CurvatureSpec, radii: &RadiiVector) -> Result<f64> {
    spec.eval(radii.as_slice())
}

pub fn grad_f(spec: &CurvatureSpec, radii: &RadiiVector) -> Result<Vec<f64>> {
    spec.gradient(radii.as_slice())
}

pub fn eval_f_star(spec: &CurvatureSpec, radii: &RadiiVector) -> Result<f64> {
    spec.dual(radii.as_slice())
}

pub fn gamma_constant(spec: &CurvatureSpec, beta: f64) -> f64 {
    spec.gamma(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rv(v: &[f64]) -> RadiiVector {
        RadiiVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn eval_examples() {
        let s1 = CurvatureSpec::sigma(1, 2).unwrap();
        assert_eq!(eval_f(&s1, &rv(&[1.0, 1.0])).unwrap(), 2.0);

        let s2 = CurvatureSpec::sigma(2, 3).unwrap();
        // 1·2 + 1·3 + 2·3 = 11
        assert_relative_eq!(
            eval_f(&s2, &rv(&[1.0, 2.0, 3.0])).unwrap(),
            11f64.sqrt(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            eval_f(&s2, &rv(&[1.0, 2.0, 3.0])).unwrap(),
            3.31662479,
            epsilon = 1e-8
        );

        let p2 = CurvatureSpec::power_mean(2.0, 2).unwrap();
        assert_relative_eq!(eval_f(&p2, &rv(&[3.0, 4.0])).unwrap(), 5.0, max_relative = 1e-15);

        let prod = CurvatureSpec::parse("product:(sigma:1*0.5,pmean:1*0.5)", 2).unwrap();
        assert_relative_eq!(eval_f(&prod, &rv(&[1.0, 1.0])).unwrap(), 2.0, max_relative = 1e-15);
    }

    #[test]
    fn gradient_examples() {
        let s1 = CurvatureSpec::sigma(1, 2).unwrap();
        assert_eq!(grad_f(&s1, &rv(&[0.3, 7.0])).unwrap(), vec![1.0, 1.0]);

        let p2 = CurvatureSpec::power_mean(2.0, 2).unwrap();
        let g = grad_f(&p2, &rv(&[3.0, 4.0])).unwrap();
        assert_relative_eq!(g[0], 0.6, max_relative = 1e-14);
        assert_relative_eq!(g[1], 0.8, max_relative = 1e-14);

        for text in ["sigma:1", "sigma:2", "sigma:3", "pmean:0.5", "pmean:3", "product:(sigma:2*0.3,pmean:2*0.7)"] {
            let spec = CurvatureSpec::parse(text, 3).unwrap();
            let g = spec.gradient(&[1.0; 3]).unwrap();
            let f1 = spec.diagonal_value();
            for gi in g {
                assert_relative_eq!(gi, f1 / 3.0, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn dual_examples() {
        let p1 = CurvatureSpec::power_mean(1.0, 2).unwrap();
        assert_relative_eq!(eval_f_star(&p1, &rv(&[1.0, 1.0])).unwrap(), 0.5);
        let s1 = CurvatureSpec::sigma(1, 2).unwrap();
        assert_relative_eq!(eval_f_star(&s1, &rv(&[2.0, 2.0])).unwrap(), 1.0);
        let s2 = CurvatureSpec::sigma(2, 4).unwrap();
        assert_relative_eq!(
            s2.dual(&[1.0; 4]).unwrap(),
            1.0 / s2.diagonal_value(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(gamma_constant(&CurvatureSpec::sigma(1, 2).unwrap(), 1.0), 2.0);
        let k = 3.0;
        assert_relative_eq!(
            gamma_constant(&CurvatureSpec::power_mean(k, 2).unwrap(), 1.0),
            2f64.powf(1.0 / k),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            gamma_constant(&CurvatureSpec::sigma(2, 3).unwrap(), 2.0),
            3.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            CurvatureSpec::sigma(3, 2),
            Err(CurvatureError::InvalidSpec(_))
        ));
        assert!(matches!(
            CurvatureSpec::sigma(0, 2),
            Err(CurvatureError::InvalidSpec(_))
        ));
        assert!(CurvatureSpec::power_mean(0.0, 2).is_err());
        assert!(CurvatureSpec::parse("product:(sigma:1*0.5,pmean:1*0.4)", 2).is_err());
        assert!(CurvatureSpec::parse("product:(sigma:1*-0.5,pmean:1*1.5)", 2).is_err());
        let s1 = CurvatureSpec::sigma(1, 2).unwrap();
        assert_eq!(
            s1.eval(&[1.0, 0.0]),
            Err(CurvatureError::NonPositiveRadii { index: 1, value: 0.0 })
        );
        assert!(matches!(
            s1.eval(&[1.0, 1.0, 1.0]),
            Err(CurvatureError::DimensionMismatch { .. })
        ));
        assert!(RadiiVector::new(vec![1.0, -2.0]).is_err());
    }

    #[test]
    fn zero_weight_factor_is_skipped() {
        let a = CurvatureSpec::parse("product:(sigma:2*0,pmean:2*1)", 2).unwrap();
        let b = CurvatureSpec::power_mean(2.0, 2).unwrap();
        let l = [0.7, 2.5];
        assert_relative_eq!(a.eval(&l).unwrap(), b.eval(&l).unwrap(), max_relative = 1e-14);
        let (ga, gb) = (a.gradient(&l).unwrap(), b.gradient(&l).unwrap());
        for (x, y) in ga.iter().zip(&gb) {
            assert_relative_eq!(x, y, max_relative = 1e-14);
        }
    }

    #[test]
    fn large_power_mean_does_not_overflow() {
        let p = CurvatureSpec::power_mean(400.0, 2).unwrap();
        let v = p.eval(&[10.0, 20.0]).unwrap();
        assert!(v.is_finite());
        assert_relative_eq!(v, 20.0, max_relative = 1e-3);
    }
}
