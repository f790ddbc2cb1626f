//! K-series density estimates from raw moments.
//!
//! Univariate estimates are the one-axis case of the tensor machinery, so
//! both paths share one implementation of alpha = (A_1 (x) ... (x) A_k) m.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::distributions::{affine_moments, ReferenceDistribution};
use crate::error::{Error, Result};
use crate::orthobasis::{gram_schmidt, grid_len, ravel, unravel, MultiBasis, OrthonormalBasis};
use crate::polynomials::Polynomial;
use crate::quadrature;

const M0_TOLERANCE: f64 = 1e-12;

/// (m_0, m_1, ..., m_n) with m_0 = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    values: Vec<f64>,
}

impl MomentVector {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        check_moments(&mut values)?;
        Ok(MomentVector { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Highest moment order n.
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    /// The first `n + 1` entries.
    pub fn truncate(&self, n: usize) -> Result<MomentVector> {
        if n > self.order() {
            return Err(Error::InsufficientMoments {
                needed: n,
                available: self.order(),
            });
        }
        Ok(MomentVector {
            values: self.values[..=n].to_vec(),
        })
    }

    /// `None` if the Hankel matrix of (m_0..m_{2 floor(n/2)}) passes a
    /// Cholesky test in standardized coordinates, otherwise a description of
    /// the failure.
    pub fn hankel_warning(&self) -> Option<String> {
        let half = self.order() / 2;
        if half == 0 {
            return None;
        }
        let m = &self.values;
        let var = m[2] - m[1] * m[1];
        if !(var > 0.0) {
            return Some(format!("moment sequence has non-positive variance {var}"));
        }
        let z = affine_moments(&m[..=2 * half], m[1], var.sqrt());
        let size = half + 1;
        let mut l = vec![vec![0.0; size]; size];
        for j in 0..size {
            let mut d = z[2 * j];
            for k in 0..j {
                d -= l[j][k] * l[j][k];
            }
            if !(d > 0.0) {
                return Some(format!(
                    "Hankel matrix of the moments is not positive definite at order {j}"
                ));
            }
            l[j][j] = d.sqrt();
            for i in j + 1..size {
                let mut s = z[i + j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                l[i][j] = s / l[j][j];
            }
        }
        None
    }
}

fn check_moments(values: &mut [f64]) -> Result<()> {
    match values.first() {
        None => return Err(Error::InvalidMoments("moment list is empty".into())),
        Some(m0) if (m0 - 1.0).abs() > M0_TOLERANCE => {
            return Err(Error::InvalidMoments(format!("m_0 must be 1, got {m0}")))
        }
        _ => values[0] = 1.0,
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidMoments(format!("non-finite moment {bad}")));
    }
    Ok(())
}

/// Cross moments m_{i_1..i_k} over the grid {0..d_1} x ... x {0..d_k},
/// stored row-major with the last index varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentTensor {
    degrees: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct MomentTensorJson {
    degrees: Vec<usize>,
    values: Vec<f64>,
}

impl<'de> Deserialize<'de> for MomentTensor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MomentTensorJson::deserialize(d)?;
        MomentTensor::new(raw.degrees, raw.values).map_err(serde::de::Error::custom)
    }
}

impl MomentTensor {
    pub fn new(degrees: Vec<usize>, mut values: Vec<f64>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::InvalidMoments("moment tensor needs at least one axis".into()));
        }
        let len = grid_len(&degrees);
        if values.len() != len {
            return Err(Error::DimensionMismatch {
                expected: len,
                actual: values.len(),
            });
        }
        check_moments(&mut values)?;
        Ok(MomentTensor { degrees, values })
    }

    pub fn dims(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, idx: &[usize]) -> Option<f64> {
        if idx.len() != self.degrees.len() || idx.iter().zip(&self.degrees).any(|(i, d)| i > d) {
            return None;
        }
        Some(self.values[ravel(idx, &self.degrees)])
    }

    /// Moments of axis `axis` alone (all other indices 0).
    pub fn marginal(&self, axis: usize) -> Result<MomentVector> {
        if axis >= self.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                actual: axis + 1,
            });
        }
        let mut idx = vec![0; self.dims()];
        let values = (0..=self.degrees[axis])
            .map(|i| {
                idx[axis] = i;
                self.values[ravel(&idx, &self.degrees)]
            })
            .collect();
        MomentVector::new(values)
    }

    /// Sub-tensor with smaller per-axis degrees.
    pub fn truncate(&self, degrees: &[usize]) -> Result<MomentTensor> {
        if degrees.len() != self.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                actual: degrees.len(),
            });
        }
        if let Some((d, have)) = degrees.iter().zip(&self.degrees).find(|(d, h)| d > h) {
            return Err(Error::InsufficientMoments {
                needed: *d,
                available: *have,
            });
        }
        let values = (0..grid_len(degrees))
            .map(|flat| self.values[ravel(&unravel(flat, degrees), &self.degrees)])
            .collect();
        MomentTensor::new(degrees.to_vec(), values)
    }

    pub fn to_json(&self) -> Result<Value> {
        Ok(serde_json::to_value(self)?)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        Ok(serde_json::from_value(v.clone())?)
    }
}

impl From<MomentVector> for MomentTensor {
    fn from(m: MomentVector) -> Self {
        MomentTensor {
            degrees: vec![m.order()],
            values: m.values,
        }
    }
}

impl From<&MomentVector> for MomentTensor {
    fn from(m: &MomentVector) -> Self {
        m.clone().into()
    }
}

/// Applies the linear map `f` to every fiber of `values` along `axis`.
fn map_axis(values: &mut [f64], degrees: &[usize], axis: usize, f: impl Fn(&[f64]) -> Vec<f64>) {
    let len = degrees[axis] + 1;
    let stride: usize = degrees[axis + 1..].iter().map(|d| d + 1).product();
    let outer: usize = degrees[..axis].iter().map(|d| d + 1).product();
    let mut fiber = vec![0.0; len];
    for o in 0..outer {
        for s in 0..stride {
            let base = o * len * stride + s;
            for (t, v) in fiber.iter_mut().enumerate() {
                *v = values[base + t * stride];
            }
            for (t, v) in f(&fiber).into_iter().enumerate() {
                values[base + t * stride] = v;
            }
        }
    }
}

/// A fitted K-series estimate: reference pdfs, their orthonormal bases and
/// the expansion coefficients over the multi-index grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityEstimate {
    basis: MultiBasis,
    alpha: Vec<f64>,
    #[serde(default)]
    source: Option<String>,
    #[serde(default)]
    warnings: Vec<String>,
}

impl DensityEstimate {
    /// Builds an estimate from an existing basis and moments whose degrees
    /// match the basis.
    pub fn from_basis(basis: MultiBasis, m: &MomentTensor) -> Result<Self> {
        if basis.dims() != m.dims() {
            return Err(Error::DimensionMismatch {
                expected: basis.dims(),
                actual: m.dims(),
            });
        }
        if basis.degrees() != m.degrees() {
            return Err(Error::DegreeMismatch(format!(
                "basis degrees {:?} vs moment degrees {:?}",
                basis.degrees(),
                m.degrees()
            )));
        }
        let degrees = m.degrees().to_vec();
        let mut alpha = m.values().to_vec();
        for (j, b) in basis.axes().iter().enumerate() {
            let (shift, scale) = b.frame();
            map_axis(&mut alpha, &degrees, j, |fiber| affine_moments(fiber, shift, scale));
        }
        for (j, b) in basis.axes().iter().enumerate() {
            map_axis(&mut alpha, &degrees, j, |fiber| {
                b.alpha_standardized(fiber).expect("fiber length equals basis size")
            });
        }
        let mut warnings = Vec::new();
        for (j, b) in basis.axes().iter().enumerate() {
            if !b.reference().support().is_bounded() {
                warnings.push(format!(
                    "axis {j}: reference support is unbounded; target support unknown"
                ));
            }
            if let Some(w) = m.marginal(j)?.hankel_warning() {
                warnings.push(format!("axis {j}: {w}"));
            }
        }
        Ok(DensityEstimate {
            basis,
            alpha,
            source: None,
            warnings,
        })
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    pub fn source(&self) -> Option<&str> {
        self.source.as_deref()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn basis(&self) -> &MultiBasis {
        &self.basis
    }

    /// The per-axis basis of a univariate estimate.
    pub fn univariate_basis(&self) -> Option<&OrthonormalBasis> {
        match self.basis.axes() {
            [b] => Some(b),
            _ => None,
        }
    }

    pub fn dims(&self) -> usize {
        self.basis.dims()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.basis.degrees()
    }

    /// Coefficients over the multi-index grid in row-major order.
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn alpha_at(&self, idx: &[usize]) -> Option<f64> {
        let d = self.degrees();
        if idx.len() != d.len() || idx.iter().zip(&d).any(|(i, n)| i > n) {
            return None;
        }
        Some(self.alpha[ravel(idx, &d)])
    }

    pub fn references(&self) -> Vec<&ReferenceDistribution> {
        self.basis.axes().iter().map(|b| b.reference()).collect()
    }

    /// Per-axis finite bounds (reference support, or mean +/- 12 sd).
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.basis
            .axes()
            .iter()
            .map(|b| b.reference().integration_bounds())
            .collect()
    }

    /// sum alpha_i h~_i(x), the series without the reference density.
    pub fn series(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                actual: x.len(),
            });
        }
        let h: Vec<Vec<f64>> = self
            .basis
            .axes()
            .iter()
            .zip(x)
            .map(|(b, xi)| b.eval_all(*xi))
            .collect();
        Ok(contract(&self.alpha, &h))
    }

    /// phi~(x) sum alpha_i h~_i(x); exactly 0 outside the reference support.
    /// The value may be negative where the truncated series dips below zero.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                actual: x.len(),
            });
        }
        let mut phi = 1.0;
        for (b, xi) in self.basis.axes().iter().zip(x) {
            let r = b.reference();
            if !r.support().contains(*xi) {
                return Ok(0.0);
            }
            phi *= r.pdf(*xi);
        }
        Ok(phi * self.series(x)?)
    }

    pub fn eval_grid(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        points.par_iter().map(|p| self.eval(p)).collect()
    }

    /// integral of x^idx f^(x) over the reference support. The estimate is a
    /// sum of separable terms, so each term is a product of one-dimensional
    /// adaptive quadratures of x^l phi(x) h_i(x).
    pub fn moment_of_estimate(&self, idx: &[usize]) -> Result<f64> {
        if idx.len() != self.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                actual: idx.len(),
            });
        }
        let per_axis: Vec<Vec<f64>> = self
            .basis
            .axes()
            .iter()
            .zip(idx)
            .map(|(b, l)| axis_integrals(b, *l))
            .collect::<Result<_>>()?;
        Ok(contract(&self.alpha, &per_axis))
    }

    /// integral of f^ over the support.
    pub fn normalization(&self) -> Result<f64> {
        self.moment_of_estimate(&vec![0; self.dims()])
    }

    /// Residual |moment_of_estimate(i) - m_i| / max(|m_i|, 1)
    /// for every multi-index of `m`.
    pub fn moment_residuals(&self, m: &MomentTensor) -> Result<Vec<(Vec<usize>, f64)>> {
        (0..m.values().len())
            .map(|flat| {
                let idx = unravel(flat, m.degrees());
                let want = m.values()[flat];
                let got = self.moment_of_estimate(&idx)?;
                Ok((idx, (got - want).abs() / want.abs().max(1.0)))
            })
            .collect()
    }

    pub fn to_json(&self) -> Result<Value> {
        Ok(serde_json::to_value(self)?)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let e: DensityEstimate = serde_json::from_value(v.clone())?;
        if e.alpha.len() != e.basis.len() {
            return Err(Error::DimensionMismatch {
                expected: e.basis.len(),
                actual: e.alpha.len(),
            });
        }
        Ok(e)
    }
}

/// sum over the grid of values[i] * prod_j factors[j][i_j].
fn contract(values: &[f64], factors: &[Vec<f64>]) -> f64 {
    let k = factors.len();
    if k == 1 {
        return values.iter().zip(&factors[0]).map(|(a, h)| a * h).sum();
    }
    // contract the last axis first, then fold outward
    let mut current = values.to_vec();
    for j in (0..k).rev() {
        let len = factors[j].len();
        current = current
            .chunks(len)
            .map(|c| c.iter().zip(&factors[j]).map(|(a, h)| a * h).sum())
            .collect();
    }
    current[0]
}

/// integral of x^l phi(x) h_i(x) dx for i = 0..=n.
fn axis_integrals(b: &OrthonormalBasis, l: usize) -> Result<Vec<f64>> {
    let r = b.reference();
    let (lo, hi) = r.integration_bounds();
    (0..=b.degree())
        .map(|i| {
            quadrature::integrate_adaptive(
                |x| x.powi(l as i32) * r.pdf(x) * b.eval(i, x),
                lo,
                hi,
                1e-12,
                1e-15 * (lo.abs().max(hi.abs()).max(1.0)).powi(l as i32),
            )
        })
        .collect()
}

/// Univariate K-series estimate, alpha = A m.
pub fn fit(m: &MomentVector, reference: &ReferenceDistribution) -> Result<DensityEstimate> {
    let basis = gram_schmidt(reference, m.order())?;
    DensityEstimate::from_basis(MultiBasis::new(vec![basis])?, &m.into())
}

/// Multivariate K-series estimate over product references.
pub fn fit_multivariate(
    m: &MomentTensor,
    references: &[ReferenceDistribution],
) -> Result<DensityEstimate> {
    if references.len() != m.dims() {
        return Err(Error::DimensionMismatch {
            expected: m.dims(),
            actual: references.len(),
        });
    }
    let basis = crate::orthobasis::tensor_basis(references, m.degrees())?;
    DensityEstimate::from_basis(basis, m)
}

/// Gram-Charlier type A: the K-series with a Normal(m_1, m_2 - m_1^2)
/// reference.
pub fn fit_gram_charlier(m: &MomentVector) -> Result<DensityEstimate> {
    if m.order() < 2 {
        return Err(Error::InsufficientMoments {
            needed: 2,
            available: m.order(),
        });
    }
    let v = m.values();
    let var = v[2] - v[1] * v[1];
    if !(var > 0.0) {
        return Err(Error::NonPositiveVariance(var));
    }
    fit(m, &ReferenceDistribution::normal(v[1], var)?)
}

/// Polynomial density on [a, b] matching the moments: solves M_ab p = m with
/// (M_ab)_{ij} = (b^{i+j+1} - a^{i+j+1})/(i+j+1), returning the monomial
/// coefficients p.
///
/// The system is solved in u = (x - c)/h with c, h the midpoint and
/// half-width of [a, b], where the power-integral matrix is that of [-1, 1],
/// and the solution is mapped back to x.
pub fn fit_method_of_moments(m: &MomentVector, a: f64, b: f64) -> Result<Polynomial> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument(format!("need finite a < b, got [{a}, {b}]")));
    }
    let size = m.order() + 1;
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mat = DMatrix::from_fn(size, size, |i, j| {
        let k = i + j + 1;
        if k % 2 == 1 {
            2.0 / k as f64
        } else {
            0.0
        }
    });
    // equilibrate so the condition number reflects the attainable accuracy
    let d: Vec<f64> = (0..size).map(|i| 1.0 / mat[(i, i)].sqrt()).collect();
    let scaled = DMatrix::from_fn(size, size, |i, j| mat[(i, j)] * d[i] * d[j]);
    let lu = scaled.clone().lu();
    let cond = lu
        .try_inverse()
        .map(|inv| norm1(&scaled) * norm1(&inv))
        .unwrap_or(f64::INFINITY);
    // worst-case growth of moment errors under the shift to the midpoint
    let reach = a.abs().max(b.abs());
    let cond = cond * ((c.abs() + reach) / h).powi(size as i32 - 1);
    if !(cond < 1.0 / f64::EPSILON) {
        return Err(Error::SingularSystem(format!(
            "moment system of order {} on [{a}, {b}] is numerically singular (condition {cond:e})",
            size - 1
        )));
    }
    let mu = crate::distributions::affine_moments(m.values(), c, h);
    let rhs = DVector::from_iterator(size, mu.iter().zip(&d).map(|(v, di)| v * di));
    let y = lu
        .solve(&rhs)
        .ok_or_else(|| Error::SingularSystem("LU solve failed".into()))?;
    let q: Vec<f64> = y.iter().zip(&d).map(|(v, di)| v * di / h).collect();
    let p = Polynomial::new(q).compose_affine(-c / h, 1.0 / h);
    if p.coeffs().iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem(format!("non-finite solution on [{a}, {b}]")));
    }
    Ok(p)
}

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
