//! Dense univariate polynomials with real coefficients.
//!
//! Coefficients are stored lowest degree first, so `coeffs[j]` multiplies
//! `x^j`. The zero polynomial is normalized to `[0.0]`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<f64>", into = "Vec<f64>")]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    /// The monomial `x^k`.
    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![0.0; k + 1];
        coeffs[k] = 1.0;
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Highest index with a nonzero coefficient; 0 for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.coeffs, x)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|j| {
                self.coeffs.get(j).copied().unwrap_or(0.0)
                    + other.coeffs.get(j).copied().unwrap_or(0.0)
            })
            .collect();
        Polynomial::new(coeffs)
    }

    pub fn scale(&self, c: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut coeffs = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Polynomial::new(coeffs)
    }

    /// Substitutes `x -> shift + scale * x`, returning the composed polynomial.
    pub fn compose_affine(&self, shift: f64, scale: f64) -> Polynomial {
        let lin = Polynomial::new(vec![shift, scale]);
        let mut out = Polynomial::zero();
        for c in self.coeffs.iter().rev() {
            out = out.mul(&lin).add(&Polynomial::constant(*c));
        }
        out
    }

    /// Expectation of `p(X)` for any distribution with raw moments `moments`
    /// (`moments[0]` must be 1).
    pub fn moment_functional(&self, moments: &[f64]) -> Result<f64> {
        moment_functional(&self.coeffs, moments)
    }
}

impl From<Vec<f64>> for Polynomial {
    fn from(coeffs: Vec<f64>) -> Self {
        Polynomial::new(coeffs)
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Self {
        p.coeffs
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate().rev() {
            if *c == 0.0 && !(first && j == 0) {
                continue;
            }
            if first {
                write!(f, "{c}")?;
            } else if *c < 0.0 {
                write!(f, " - {}", -c)?;
            } else {
                write!(f, " + {c}")?;
            }
            match j {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{j}")?,
            }
            first = false;
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Replaces each monomial `x^j` of the polynomial with `coeffs` by the
/// moment `moments[j]`.
pub fn moment_functional(coeffs: &[f64], moments: &[f64]) -> Result<f64> {
    // trailing zeros do not need moments
    let degree = coeffs.iter().rposition(|c| *c != 0.0).unwrap_or(0);
    if degree >= moments.len() {
        return Err(Error::InsufficientMoments {
            needed: degree,
            available: moments.len().saturating_sub(1),
        });
    }
    Ok(coeffs
        .iter()
        .zip(moments)
        .map(|(c, m)| c * m)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn eval_constant_and_legendre_root() {
        assert_eq!(Polynomial::new(vec![1.0]).eval(7.3), 1.0);
        let s3 = 3f64.sqrt();
        let h1 = Polynomial::new(vec![-s3, 2.0 * s3]);
        assert_abs_diff_eq!(h1.eval(0.5), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn eval_listed_h2x() {
        let p = Polynomial::new(vec![-0.38542, -1.63885, 1.58907]);
        assert_abs_diff_eq!(p.eval(1.0), -0.4352, epsilon = 1e-4);
    }

    #[test]
    fn arithmetic() {
        let a = Polynomial::new(vec![1.0, 2.0]);
        let b = Polynomial::new(vec![0.0, -2.0]);
        assert_eq!(a.add(&b).coeffs(), &[1.0]);
        let x = Polynomial::new(vec![0.0, 1.0]);
        assert_eq!(x.mul(&x).coeffs(), &[0.0, 0.0, 1.0]);
        let p = Polynomial::new(vec![-1.0, 1.0]).mul(&Polynomial::new(vec![1.0, 1.0]));
        assert_eq!(p.coeffs(), &[-1.0, 0.0, 1.0]);
        assert_eq!(p.degree(), 2);
        assert_eq!(a.scale(0.0), Polynomial::zero());
    }

    #[test]
    fn zero_normalizes() {
        let z = Polynomial::new(vec![0.0, 0.0, 0.0]);
        assert_eq!(z.coeffs(), &[0.0]);
        assert_eq!(z.degree(), 0);
        assert_eq!(Polynomial::new(vec![]), Polynomial::zero());
    }

    #[test]
    fn trailing_zeros_do_not_change_eval() {
        let a = Polynomial::new(vec![0.3, -1.2, 2.0]);
        let b = Polynomial { coeffs: vec![0.3, -1.2, 2.0, 0.0, 0.0] };
        for x in [-2.0, 0.0, 0.7, 3.1] {
            assert_eq!(a.eval(x), b.eval(x));
        }
        assert_eq!(moment_functional(b.coeffs(), &[1.0, 0.5, 0.4]).unwrap(), a.moment_functional(&[1.0, 0.5, 0.4]).unwrap());
    }

    #[test]
    fn moment_functional_worked_example() {
        let s3 = 3f64.sqrt();
        let s5 = 5f64.sqrt();
        assert_eq!(Polynomial::constant(1.0).moment_functional(&[1.0]).unwrap(), 1.0);
        let h1 = Polynomial::new(vec![-s3, 2.0 * s3]);
        assert_abs_diff_eq!(h1.moment_functional(&[1.0, 0.418023]).unwrap(), -0.283976, epsilon = 1e-6);
        let h2 = Polynomial::new(vec![s5, -6.0 * s5, 6.0 * s5]);
        assert_abs_diff_eq!(
            h2.moment_functional(&[1.0, 0.418023, 0.254070]).unwrap(),
            0.036407,
            epsilon = 1e-6
        );
    }

    #[test]
    fn moment_functional_needs_moments() {
        let p = Polynomial::new(vec![0.0, 0.0, 1.0]);
        assert!(matches!(
            p.moment_functional(&[1.0, 0.5]),
            Err(Error::InsufficientMoments { needed: 2, available: 1 })
        ));
    }

    #[test]
    fn affine_composition() {
        // (2x - 1) with x -> 0.5 + 0.5 z gives z
        let p = Polynomial::new(vec![-1.0, 2.0]);
        assert_eq!(p.compose_affine(0.5, 0.5).coeffs(), &[0.0, 1.0]);
    }

    #[test]
    fn json_is_coefficient_array() {
        let p = Polynomial::new(vec![1.0, -2.5]);
        assert_eq!(serde_json::to_string(&p).unwrap(), "[1.0,-2.5]");
        let q: Polynomial = serde_json::from_str("[0.0, 0.0]").unwrap();
        assert!(q.is_zero());
    }
}
