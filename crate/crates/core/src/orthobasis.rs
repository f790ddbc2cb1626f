//! Orthonormal polynomial systems with respect to a reference density.
//!
//! A basis is built in a standardized coordinate z = (x - shift)/scale that
//! keeps the Hankel moment matrix well conditioned; the coefficient matrix in
//! the original coordinate is derived from it once and kept alongside.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::distributions::ReferenceDistribution;
use crate::error::{Error, Result};
use crate::polynomials::{horner, Polynomial};

/// Lower-triangular coefficient matrix of h_0..h_n plus the reference it is
/// orthonormal under.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    reference: ReferenceDistribution,
    shift: f64,
    scale: f64,
    /// rows of A in the standardized coordinate
    z_rows: Vec<Vec<f64>>,
    /// rows of A in x
    x_rows: Vec<Vec<f64>>,
    hankel_condition: f64,
}

impl OrthonormalBasis {
    fn from_z_rows(
        reference: ReferenceDistribution,
        shift: f64,
        scale: f64,
        z_rows: Vec<Vec<f64>>,
        hankel_condition: f64,
    ) -> Self {
        let x_rows = z_rows
            .iter()
            .map(|row| {
                let p = Polynomial::new(row.clone()).compose_affine(-shift / scale, 1.0 / scale);
                let mut c = p.coeffs().to_vec();
                c.resize(row.len(), 0.0);
                c
            })
            .collect();
        OrthonormalBasis {
            reference,
            shift,
            scale,
            z_rows,
            x_rows,
            hankel_condition,
        }
    }

    pub fn degree(&self) -> usize {
        self.z_rows.len() - 1
    }

    pub fn reference(&self) -> &ReferenceDistribution {
        &self.reference
    }

    /// Rows a_{i0}..a_{ii} of A in the original coordinate.
    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.x_rows
    }

    /// Rows of A in the standardized coordinate returned by [`Self::frame`].
    pub fn standardized_coefficients(&self) -> &[Vec<f64>] {
        &self.z_rows
    }

    /// `(shift, scale)` of the standardized coordinate.
    pub fn frame(&self) -> (f64, f64) {
        (self.shift, self.scale)
    }

    /// 1-norm condition number of the standardized Hankel moment matrix.
    pub fn hankel_condition(&self) -> f64 {
        self.hankel_condition
    }

    pub fn polynomial(&self, i: usize) -> Polynomial {
        Polynomial::new(self.x_rows[i].clone())
    }

    /// h_i(x).
    pub fn eval(&self, i: usize, x: f64) -> f64 {
        horner(&self.z_rows[i], (x - self.shift) / self.scale)
    }

    /// (h_0(x), ..., h_n(x)).
    pub fn eval_all(&self, x: f64) -> Vec<f64> {
        let z = (x - self.shift) / self.scale;
        self.z_rows.iter().map(|r| horner(r, z)).collect()
    }

    /// Raw moments mapped to the standardized coordinate.
    pub fn standardize_moments(&self, raw: &[f64]) -> Vec<f64> {
        crate::distributions::affine_moments(raw, self.shift, self.scale)
    }

    /// alpha = A m, computed from moments already in the standardized
    /// coordinate.
    pub fn alpha_standardized(&self, z_moments: &[f64]) -> Result<Vec<f64>> {
        let n = self.degree();
        if z_moments.len() < n + 1 {
            return Err(Error::InsufficientMoments {
                needed: n,
                available: z_moments.len().saturating_sub(1),
            });
        }
        Ok(self
            .z_rows
            .iter()
            .map(|row| row.iter().zip(z_moments).map(|(a, m)| a * m).sum())
            .collect())
    }

    /// alpha_i = sum_j a_ij m_j for raw moments m.
    pub fn alpha(&self, raw: &[f64]) -> Result<Vec<f64>> {
        let n = self.degree();
        if raw.len() < n + 1 {
            return Err(Error::InsufficientMoments {
                needed: n,
                available: raw.len().saturating_sub(1),
            });
        }
        self.alpha_standardized(&self.standardize_moments(&raw[..=n]))
    }

    pub fn to_json(&self) -> Result<Value> {
        Ok(serde_json::to_value(BasisJson {
            reference: self.reference.clone(),
            degree: self.degree(),
            coefficients: self.x_rows.clone(),
            frame: Some(Frame {
                shift: self.shift,
                scale: self.scale,
            }),
            standardized_coefficients: Some(self.z_rows.clone()),
            hankel_condition: Some(self.hankel_condition),
        })?)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let j: BasisJson = serde_json::from_value(v.clone())?;
        let n = j.degree;
        let check = |rows: &[Vec<f64>]| -> Result<()> {
            if rows.len() != n + 1 || rows.iter().enumerate().any(|(i, r)| r.len() != i + 1) {
                return Err(Error::DegreeMismatch(format!(
                    "basis of degree {n} needs {} lower-triangular rows",
                    n + 1
                )));
            }
            if rows.iter().enumerate().any(|(i, r)| !(r[i] > 0.0)) {
                return Err(Error::InvalidArgument(
                    "basis diagonal must be strictly positive".into(),
                ));
            }
            Ok(())
        };
        match (j.frame, j.standardized_coefficients) {
            (Some(f), Some(rows)) => {
                check(&rows)?;
                Ok(Self::from_z_rows(
                    j.reference,
                    f.shift,
                    f.scale,
                    rows,
                    j.hankel_condition.unwrap_or(f64::NAN),
                ))
            }
            _ => {
                check(&j.coefficients)?;
                Ok(Self::from_z_rows(
                    j.reference,
                    0.0,
                    1.0,
                    j.coefficients,
                    j.hankel_condition.unwrap_or(f64::NAN),
                ))
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Frame {
    shift: f64,
    scale: f64,
}

#[derive(Serialize, Deserialize)]
struct BasisJson {
    reference: ReferenceDistribution,
    degree: usize,
    coefficients: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frame: Option<Frame>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    standardized_coefficients: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hankel_condition: Option<f64>,
}

impl Serialize for OrthonormalBasis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().map_err(serde::ser::Error::custom)?.serialize(s)
    }
}

impl<'de> Deserialize<'de> for OrthonormalBasis {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        OrthonormalBasis::from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// Orthonormal polynomials for `reference` up to degree `n`, from the
/// Cholesky factor of the Hankel moment matrix: with H = L L^T, the rows of
/// L^{-1} are the coefficients of h_0..h_n.
pub fn gram_schmidt(reference: &ReferenceDistribution, n: usize) -> Result<OrthonormalBasis> {
    let mean = reference.mean();
    let var = reference.variance();
    let support = reference.support();
    let floor = if support.is_bounded() {
        1e-12 * support.width().powi(2)
    } else {
        0.0
    };
    if !(var.is_finite() && var > floor) {
        return Err(Error::MomentMatrixNotPD {
            order: 1,
            reason: format!("reference variance {var} is too small for a stable basis"),
        });
    }
    let standard = (mean, var.sqrt());
    let mut frames = vec![standard];
    if support.is_bounded() {
        // a support the reference fills is mapped onto [-1, 1] by default
        let half = (0.5 * (support.lower + support.upper), 0.5 * support.width());
        if support.width() <= 6.0 * var.sqrt() {
            frames.insert(0, half);
        } else {
            frames.push(half);
        }
    }
    // the alternative frame wins only if its equilibrated Hankel matrix is
    // clearly better conditioned
    let mut best: Option<(f64, f64, Factored)> = None;
    let mut first_err = None;
    for (shift, scale) in frames {
        let mut z = reference.affine_moments(2 * n, shift, scale)?;
        z[0] = 1.0;
        match cholesky_basis(&z, n) {
            Ok(f) => {
                if best.as_ref().is_none_or(|b| f.scaled_condition < 0.5 * b.2.scaled_condition) {
                    best = Some((shift, scale, f));
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match best {
        Some((shift, scale, f)) => Ok(OrthonormalBasis::from_z_rows(
            reference.clone(),
            shift,
            scale,
            f.rows,
            f.condition,
        )),
        None => Err(first_err.expect("at least one frame was tried")),
    }
}

struct Factored {
    rows: Vec<Vec<f64>>,
    condition: f64,
    scaled_condition: f64,
}

/// Rows of L^{-1} for the Hankel matrix of `moments` (moments[0] = 1), with
/// its 1-norm condition number before and after diagonal equilibration.
fn cholesky_basis(moments: &[f64], n: usize) -> Result<Factored> {
    let size = n + 1;
    if moments.len() < 2 * n + 1 {
        return Err(Error::InsufficientMoments {
            needed: 2 * n,
            available: moments.len().saturating_sub(1),
        });
    }
    let h = |i: usize, j: usize| moments[i + j];
    let mut l = vec![vec![0.0; size]; size];
    for j in 0..size {
        let mut d = h(j, j);
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if !(d.is_finite() && d > h(j, j).abs() * 1e-15) {
            return Err(Error::MomentMatrixNotPD {
                order: j,
                reason: format!("Cholesky pivot {d:e} at row {j}"),
            });
        }
        let ljj = d.sqrt();
        l[j][j] = ljj;
        for i in j + 1..size {
            let mut s = h(i, j);
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / ljj;
        }
    }
    // forward substitution for L^{-1}, column by column
    let mut inv = vec![vec![0.0; size]; size];
    for c in 0..size {
        inv[c][c] = 1.0 / l[c][c];
        for i in c + 1..size {
            let mut s = 0.0;
            for k in c..i {
                s += l[i][k] * inv[k][c];
            }
            inv[i][c] = -s / l[i][i];
        }
    }
    // H^{-1} = A^T A
    let hinv: Vec<Vec<f64>> = (0..size)
        .map(|i| {
            (0..size)
                .map(|j| (i.max(j)..size).map(|k| inv[k][i] * inv[k][j]).sum::<f64>())
                .collect()
        })
        .collect();
    let d: Vec<f64> = (0..size).map(|j| h(j, j).sqrt()).collect();
    let norm1 = |f: &dyn Fn(usize, usize) -> f64| {
        (0..size)
            .map(|j| (0..size).map(|i| f(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let condition = norm1(&|i, j| h(i, j)) * norm1(&|i, j| hinv[i][j]);
    let scaled_condition = norm1(&|i, j| h(i, j) / (d[i] * d[j])) * norm1(&|i, j| hinv[i][j] * d[i] * d[j]);
    let rows = inv
        .into_iter()
        .enumerate()
        .map(|(i, mut r)| {
            r.truncate(i + 1);
            r
        })
        .collect();
    Ok(Factored {
        rows,
        condition,
        scaled_condition,
    })
}

/// Monomial coefficients of the Legendre polynomials P_0..P_n on [-1, 1].
fn legendre_coefficients(n: usize) -> Vec<Vec<f64>> {
    let mut p: Vec<Vec<f64>> = vec![vec![1.0]];
    if n >= 1 {
        p.push(vec![0.0, 1.0]);
    }
    for k in 1..n {
        let kf = k as f64;
        // (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}
        let mut next = vec![0.0; k + 2];
        for (j, c) in p[k].iter().enumerate() {
            next[j + 1] += (2.0 * kf + 1.0) * c;
        }
        for (j, c) in p[k - 1].iter().enumerate() {
            next[j] -= kf * c;
        }
        for c in next.iter_mut() {
            *c /= kf + 1.0;
        }
        p.push(next);
    }
    p
}

/// Orthonormal shifted Legendre polynomials on [a, b] (uniform reference),
/// sqrt(2i+1) P_i(2(x-a)/(b-a) - 1).
pub fn legendre_shifted(a: f64, b: f64, n: usize) -> Result<OrthonormalBasis> {
    let reference = ReferenceDistribution::uniform(a, b)?;
    let rows = legendre_coefficients(n)
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            let s = (2.0 * i as f64 + 1.0).sqrt();
            r.into_iter().map(|c| c * s).collect()
        })
        .collect();
    Ok(OrthonormalBasis::from_z_rows(
        reference,
        0.5 * (a + b),
        0.5 * (b - a),
        rows,
        f64::NAN,
    ))
}

/// Normalized probabilists' Hermite polynomials He_i((x-mean)/sd)/sqrt(i!)
/// (normal reference).
pub fn hermite(mean: f64, variance: f64, n: usize) -> Result<OrthonormalBasis> {
    let reference = ReferenceDistribution::normal(mean, variance)?;
    let mut he: Vec<Vec<f64>> = vec![vec![1.0]];
    if n >= 1 {
        he.push(vec![0.0, 1.0]);
    }
    for k in 1..n {
        // He_{k+1} = x He_k - k He_{k-1}
        let mut next = vec![0.0; k + 2];
        for (j, c) in he[k].iter().enumerate() {
            next[j + 1] += c;
        }
        for (j, c) in he[k - 1].iter().enumerate() {
            next[j] -= k as f64 * c;
        }
        he.push(next);
    }
    let mut fact = 1.0;
    let rows = he
        .into_iter()
        .enumerate()
        .map(|(i, r)| {
            if i > 0 {
                fact *= i as f64;
            }
            let s = fact.sqrt();
            r.into_iter().map(|c| c / s).collect()
        })
        .collect();
    Ok(OrthonormalBasis::from_z_rows(
        reference,
        mean,
        variance.sqrt(),
        rows,
        f64::NAN,
    ))
}

/// Product basis h_{i_1}(x_1) ... h_{i_k}(x_k) over the grid
/// {0..d_1} x ... x {0..d_k}. Multi-indices are ordered lexicographically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiBasis {
    axes: Vec<OrthonormalBasis>,
}

impl MultiBasis {
    pub fn new(axes: Vec<OrthonormalBasis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidArgument("a tensor basis needs at least one axis".into()));
        }
        Ok(MultiBasis { axes })
    }

    pub fn axes(&self) -> &[OrthonormalBasis] {
        &self.axes
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.axes.iter().map(|b| b.degree()).collect()
    }

    pub fn len(&self) -> usize {
        grid_len(&self.degrees())
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// h~_idx(x).
    pub fn eval(&self, idx: &[usize], x: &[f64]) -> f64 {
        self.axes
            .iter()
            .zip(idx)
            .zip(x)
            .map(|((b, i), xi)| b.eval(*i, *xi))
            .product()
    }

    /// Monomial expansion of h~_idx in the original coordinates, as
    /// (exponents, coefficient) pairs in lexicographic order.
    pub fn expanded(&self, idx: &[usize]) -> Vec<(Vec<usize>, f64)> {
        let per_axis: Vec<&[f64]> = self
            .axes
            .iter()
            .zip(idx)
            .map(|(b, i)| b.coefficients()[*i].as_slice())
            .collect();
        let degs: Vec<usize> = idx.to_vec();
        (0..grid_len(&degs))
            .map(|flat| {
                let e = unravel(flat, &degs);
                let c = e.iter().zip(&per_axis).map(|(l, row)| row[*l]).product();
                (e, c)
            })
            .collect()
    }
}

/// Per-axis bases for `references` with matching `degrees`.
pub fn tensor_basis(references: &[ReferenceDistribution], degrees: &[usize]) -> Result<MultiBasis> {
    if references.len() != degrees.len() {
        return Err(Error::DimensionMismatch {
            expected: references.len(),
            actual: degrees.len(),
        });
    }
    MultiBasis::new(
        references
            .iter()
            .zip(degrees)
            .map(|(r, d)| gram_schmidt(r, *d))
            .collect::<Result<_>>()?,
    )
}

/// Number of multi-indices in {0..d_1} x ... x {0..d_k}.
pub fn grid_len(degrees: &[usize]) -> usize {
    degrees.iter().map(|d| d + 1).product()
}

/// Row-major position of a multi-index (last axis fastest).
pub fn ravel(idx: &[usize], degrees: &[usize]) -> usize {
    idx.iter()
        .zip(degrees)
        .fold(0, |acc, (i, d)| acc * (d + 1) + i)
}

pub fn unravel(mut flat: usize, degrees: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; degrees.len()];
    for j in (0..degrees.len()).rev() {
        idx[j] = flat % (degrees[j] + 1);
        flat /= degrees[j] + 1;
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature;
    use approx::assert_abs_diff_eq;

    fn gram(b: &OrthonormalBasis) -> Vec<Vec<f64>> {
        let r = b.reference();
        let (lo, hi) = r.integration_bounds();
        let n = b.degree();
        let mut g = vec![vec![0.0; n + 1]; n + 1];
        for i in 0..=n {
            for j in 0..=i {
                let v = quadrature::integrate_adaptive(
                    |x| b.eval(i, x) * b.eval(j, x) * r.pdf(x),
                    lo,
                    hi,
                    1e-12,
                    1e-12,
                )
                .unwrap();
                g[i][j] = v;
                g[j][i] = v;
            }
        }
        g
    }

    fn max_gram_error(b: &OrthonormalBasis) -> f64 {
        let g = gram(b);
        let mut worst: f64 = 0.0;
        for (i, row) in g.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                worst = worst.max((v - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }

    #[test]
    fn uniform_unit_interval_rows() {
        let b = gram_schmidt(&ReferenceDistribution::uniform(0.0, 1.0).unwrap(), 2).unwrap();
        let (s3, s5) = (3f64.sqrt(), 5f64.sqrt());
        let want = [vec![1.0], vec![-s3, 2.0 * s3], vec![s5, -6.0 * s5, 6.0 * s5]];
        for (row, w) in b.coefficients().iter().zip(&want) {
            for (c, e) in row.iter().zip(w) {
                assert_abs_diff_eq!(c, e, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn standard_normal_is_scaled_hermite() {
        let b = gram_schmidt(&ReferenceDistribution::normal(0.0, 1.0).unwrap(), 3).unwrap();
        let (s2, s6) = (2f64.sqrt(), 6f64.sqrt());
        let want = [
            vec![1.0],
            vec![0.0, 1.0],
            vec![-1.0 / s2, 0.0, 1.0 / s2],
            vec![0.0, -3.0 / s6, 0.0, 1.0 / s6],
        ];
        for (row, w) in b.coefficients().iter().zip(&want) {
            for (c, e) in row.iter().zip(w) {
                assert_abs_diff_eq!(c, e, epsilon = 1e-12);
            }
        }
        let h = hermite(0.0, 1.0, 3).unwrap();
        for (r1, r2) in h.coefficients().iter().zip(b.coefficients()) {
            for (c1, c2) in r1.iter().zip(r2) {
                assert_abs_diff_eq!(c1, c2, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn truncated_normal_listed_rows() {
        let r = ReferenceDistribution::truncated_normal(0.71721, 0.61614, -2.0, 2.0).unwrap();
        let b = gram_schmidt(&r, 2).unwrap();
        let c = b.coefficients();
        assert_abs_diff_eq!(c[1][0], -0.89705, epsilon = 1e-4);
        assert_abs_diff_eq!(c[1][1], 1.42119, epsilon = 1e-4);
        assert_abs_diff_eq!(c[2][0], -0.38542, epsilon = 1e-4);
        assert_abs_diff_eq!(c[2][1], -1.63885, epsilon = 1e-4);
        assert_abs_diff_eq!(c[2][2], 1.58907, epsilon = 1e-4);
    }

    #[test]
    fn first_row_is_exactly_one() {
        let b = gram_schmidt(&ReferenceDistribution::truncated_exponential(2.0, 1.0, 3.0).unwrap(), 4).unwrap();
        assert_eq!(b.coefficients()[0], vec![1.0]);
        assert_eq!(b.standardized_coefficients()[0], vec![1.0]);
    }

    #[test]
    fn legendre_examples() {
        let s3 = 3f64.sqrt();
        let b = legendre_shifted(0.0, 1.0, 1).unwrap();
        assert_abs_diff_eq!(b.coefficients()[1][0], -s3, epsilon = 1e-14);
        assert_abs_diff_eq!(b.coefficients()[1][1], 2.0 * s3, epsilon = 1e-14);
        let b = legendre_shifted(0.0, 3.0, 1).unwrap();
        assert_abs_diff_eq!(b.coefficients()[1][0], -s3, epsilon = 1e-14);
        assert_abs_diff_eq!(b.coefficients()[1][1], 2.0 * s3 / 3.0, epsilon = 1e-14);
        let b = legendre_shifted(-1.0, 1.0, 2).unwrap();
        assert!(max_gram_error(&b) < 1e-12);
        assert_abs_diff_eq!(b.coefficients()[2][2], 1.5 * 5f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(b.coefficients()[2][0], -0.5 * 5f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn legendre_matches_cholesky_route() {
        for (a, b) in [(0.0, 1.0), (-2.0, 5.0), (10.0, 11.0), (-1.0, 1.0)] {
            for n in [1, 4, 8, 12] {
                let l = legendre_shifted(a, b, n).unwrap();
                let g = gram_schmidt(&ReferenceDistribution::uniform(a, b).unwrap(), n).unwrap();
                for k in 0..=20 {
                    let x = a + (b - a) * k as f64 / 20.0;
                    for i in 0..=n {
                        assert_abs_diff_eq!(l.eval(i, x), g.eval(i, x), epsilon = 1e-9 * (1.0 + l.eval(i, x).abs()));
                    }
                }
            }
        }
    }

    #[test]
    fn orthonormal_under_quadrature() {
        let refs = vec![
            ReferenceDistribution::uniform(0.0, 4.0).unwrap(),
            ReferenceDistribution::normal(1.0, 2.0).unwrap(),
            ReferenceDistribution::truncated_normal(1.99556, 0.98667, -4.0, 5.0).unwrap(),
            ReferenceDistribution::truncated_exponential(2.0 / 3.0, 0.0, 4.0).unwrap(),
            ReferenceDistribution::truncated_gamma(2.0, 0.5, 0.0, 5.0).unwrap(),
            ReferenceDistribution::continuous_bernoulli(0.3).unwrap(),
            ReferenceDistribution::beta(2.0, 3.0).unwrap(),
        ];
        for r in refs {
            let b = gram_schmidt(&r, 10).unwrap();
            let e = max_gram_error(&b);
            assert!(e < 1e-7, "{r:?}: {e}");
            for (i, row) in b.coefficients().iter().enumerate() {
                assert!(row[i] > 0.0);
            }
        }
    }

    #[test]
    fn degenerate_reference_rejected() {
        let r = ReferenceDistribution::truncated_normal(0.0, 1e-16, -1.0, 1.0).unwrap();
        assert!(matches!(gram_schmidt(&r, 2), Err(Error::MomentMatrixNotPD { .. })));
    }

    #[test]
    fn non_pd_moments_detected() {
        // two-point law: Hankel matrix singular beyond order 1
        let m = [1.0, 0.0, 1.0, 0.0, 1.0];
        assert!(matches!(cholesky_basis(&m, 2), Err(Error::MomentMatrixNotPD { order: 2, .. })));
    }

    #[test]
    fn tensor_product_expansion() {
        let rx = ReferenceDistribution::truncated_normal(0.71721, 0.61614, -2.0, 2.0).unwrap();
        let ry = ReferenceDistribution::truncated_normal(1.99556, 0.98667, -4.0, 5.0).unwrap();
        let mb = tensor_basis(&[rx, ry], &[2, 2]).unwrap();
        let exp = mb.expanded(&[1, 1]);
        let get = |e: [usize; 2]| exp.iter().find(|(k, _)| k == &e).unwrap().1;
        assert_abs_diff_eq!(get([1, 1]), 1.43976, epsilon = 1e-4);
        assert_abs_diff_eq!(get([1, 0]), -2.86727, epsilon = 1e-4);
        assert_abs_diff_eq!(get([0, 1]), -0.90877, epsilon = 1e-4);
        assert_abs_diff_eq!(get([0, 0]), 1.80981, epsilon = 1e-4);
    }

    #[test]
    fn tensor_cross_orthogonality() {
        let rx = ReferenceDistribution::truncated_normal(0.71721, 0.61614, -2.0, 2.0).unwrap();
        let ry = ReferenceDistribution::truncated_normal(1.99556, 0.98667, -4.0, 5.0).unwrap();
        let mb = tensor_basis(&[rx.clone(), ry.clone()], &[2, 2]).unwrap();
        let v = quadrature::integrate_box(
            |p| mb.eval(&[1, 2], p) * mb.eval(&[2, 1], p) * rx.pdf(p[0]) * ry.pdf(p[1]),
            &[(-2.0, 2.0), (-4.0, 5.0)],
            4,
        );
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-6);
        let one = quadrature::integrate_box(
            |p| mb.eval(&[1, 2], p).powi(2) * rx.pdf(p[0]) * ry.pdf(p[1]),
            &[(-2.0, 2.0), (-4.0, 5.0)],
            4,
        );
        assert_abs_diff_eq!(one, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn single_axis_tensor_is_univariate() {
        let r = ReferenceDistribution::uniform(0.0, 2.0).unwrap();
        let mb = tensor_basis(&[r.clone()], &[3]).unwrap();
        let b = gram_schmidt(&r, 3).unwrap();
        for i in 0..=3 {
            assert_eq!(mb.eval(&[i], &[0.7]), b.eval(i, 0.7));
        }
    }

    #[test]
    fn ravel_round_trip() {
        let d = [2, 3, 1];
        for flat in 0..grid_len(&d) {
            assert_eq!(ravel(&unravel(flat, &d), &d), flat);
        }
        assert_eq!(unravel(1, &d), vec![0, 0, 1]);
        assert_eq!(unravel(2, &d), vec![0, 1, 0]);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let b = gram_schmidt(&ReferenceDistribution::truncated_normal(0.5, 2.0, -3.0, 4.0).unwrap(), 5).unwrap();
        let text = serde_json::to_string(&b).unwrap();
        let back: OrthonormalBasis = serde_json::from_str(&text).unwrap();
        assert_eq!(back.standardized_coefficients(), b.standardized_coefficients());
        assert_eq!(back.coefficients(), b.coefficients());
        assert_eq!(back.eval(4, 0.3), b.eval(4, 0.3));
        assert!(b.hankel_condition() > 1.0);
    }
}
