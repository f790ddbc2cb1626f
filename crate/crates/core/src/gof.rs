//! Two-sample goodness-of-fit tests and sampling from density estimates.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::DensityEstimate;
use crate::quadrature;

/// Largest pooled sample the permutation test accepts; its distance matrix
/// holds this many squared entries.
pub const MAX_ENERGY_POOL: usize = 20_000;

/// Significance levels every report is decided at.
pub const ALPHAS: [f64; 2] = [0.05, 0.2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    KolmogorovSmirnov,
    Energy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub alpha: f64,
    pub rejected: bool,
    /// KS critical value at this level; absent for permutation tests.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: TestKind,
    pub statistic: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p_value: Option<f64>,
    pub n1: usize,
    pub n2: usize,
    pub decisions: Vec<Decision>,
}

impl TestReport {
    pub fn rejected_at(&self, alpha: f64) -> Option<bool> {
        self.decisions.iter().find(|d| d.alpha == alpha).map(|d| d.rejected)
    }

    pub fn threshold_at(&self, alpha: f64) -> Option<f64> {
        self.decisions.iter().find(|d| d.alpha == alpha).and_then(|d| d.threshold)
    }

    /// Table marker: "✗" rejected at 0.05, "✓" kept at 0.05 only,
    /// "✓ !" kept at 0.2 as well.
    pub fn glyph(&self) -> &'static str {
        match (self.rejected_at(0.05), self.rejected_at(0.2)) {
            (Some(true), _) => "✗",
            (Some(false), Some(false)) => "✓ !",
            _ => "✓",
        }
    }

    /// Adds a decision at `alpha` unless one is already present.
    pub fn decide_at(&mut self, alpha: f64) -> Result<()> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("significance level must lie in (0, 1), got {alpha}")));
        }
        if self.rejected_at(alpha).is_some() {
            return Ok(());
        }
        let decision = match (self.test, self.p_value) {
            (TestKind::Energy, Some(p)) => Decision {
                alpha,
                rejected: p <= alpha,
                threshold: None,
            },
            _ => {
                let t = ks_threshold(alpha, self.n1, self.n2);
                Decision {
                    alpha,
                    rejected: self.statistic > t,
                    threshold: Some(t),
                }
            }
        };
        self.decisions.push(decision);
        Ok(())
    }

    pub fn to_json(&self) -> Result<serde_json::Value> {
        Ok(serde_json::to_value(self)?)
    }
}

impl fmt::Display for TestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.test {
            TestKind::KolmogorovSmirnov => "KS",
            TestKind::Energy => "energy",
        };
        write!(f, "{name} statistic {:.4}", self.statistic)?;
        if let Some(p) = self.p_value {
            write!(f, ", p-value {p:.4}")?;
        }
        write!(f, " (N1={}, N2={}) {}", self.n1, self.n2, self.glyph())
    }
}

/// c(alpha) sqrt((n1 + n2) / (n1 n2)) with c(alpha) = sqrt(-ln(alpha / 2) / 2).
pub fn ks_threshold(alpha: f64, n1: usize, n2: usize) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    c * ((n1 + n2) as f64 / (n1 as f64 * n2 as f64)).sqrt()
}

fn sorted(s: &[f64]) -> Vec<f64> {
    let mut v = s.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// sup |F1 - F2| over the pooled points, as an exact integer ratio.
fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let (n1, n2) = (a.len() as i128, b.len() as i128);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best: i128 = 0;
    while i < a.len() && j < b.len() {
        let x = if a[i].total_cmp(&b[j]).is_le() { a[i] } else { b[j] };
        while i < a.len() && a[i].total_cmp(&x).is_le() {
            i += 1;
        }
        while j < b.len() && b[j].total_cmp(&x).is_le() {
            j += 1;
        }
        best = best.max((i as i128 * n2 - j as i128 * n1).abs());
    }
    // once one sample is exhausted the gap only shrinks towards 0
    best as f64 / (n1 * n2) as f64
}

pub fn ks_two_sample(s1: &[f64], s2: &[f64]) -> Result<TestReport> {
    if s1.is_empty() || s2.is_empty() {
        return Err(Error::EmptyData);
    }
    let d = ks_statistic(&sorted(s1), &sorted(s2));
    let decisions = ALPHAS
        .iter()
        .map(|&alpha| {
            let t = ks_threshold(alpha, s1.len(), s2.len());
            Decision {
                alpha,
                rejected: d > t,
                threshold: Some(t),
            }
        })
        .collect();
    Ok(TestReport {
        test: TestKind::KolmogorovSmirnov,
        statistic: d,
        p_value: None,
        n1: s1.len(),
        n2: s2.len(),
        decisions,
    })
}

/// One-sample sup distance between the empirical cdf of `samples` and `cdf`.
pub fn ks_cdf_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyData);
    }
    let s = sorted(samples);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < s.len() {
        let x = s[i];
        let below = i as f64 / n;
        while i < s.len() && s[i] == x {
            i += 1;
        }
        let f = cdf(x);
        d = d.max((f - below).abs()).max((i as f64 / n - f).abs());
    }
    Ok(d)
}

/// sup |F_est(x) - cdf(x)| over `cells` equal cells of the estimate's
/// support, with F_est the integral of the raw (unclipped) series.
pub fn estimate_cdf_distance<F: Fn(f64) -> f64>(est: &DensityEstimate, cdf: F, cells: usize) -> Result<f64> {
    if est.dims() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            actual: est.dims(),
        });
    }
    if cells == 0 {
        return Err(Error::InvalidArgument("need at least one cell".into()));
    }
    let (lo, hi) = est.bounds()[0];
    let h = (hi - lo) / cells as f64;
    let mut acc = 0.0;
    let mut d = cdf(lo).abs();
    for k in 0..cells {
        let a = lo + k as f64 * h;
        let b = if k + 1 == cells { hi } else { a + h };
        acc += quadrature::integrate_adaptive(|x| est.eval(&[x]).unwrap_or(0.0), a, b, 1e-12, 1e-15)?;
        d = d.max((acc - cdf(b)).abs());
    }
    Ok(d)
}

fn check_rows(s: &[Vec<f64>], dims: usize) -> Result<()> {
    match s.iter().find(|r| r.len() != dims) {
        Some(r) => Err(Error::DimensionMismatch {
            expected: dims,
            actual: r.len(),
        }),
        None => Ok(()),
    }
}

/// Row-major matrix of Euclidean distances between all pooled rows.
pub fn pairwise_distances(rows: &[&[f64]]) -> Vec<f64> {
    let n = rows.len();
    let mut d = vec![0.0; n * n];
    d.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, out)| {
        for (j, v) in out.iter_mut().enumerate() {
            *v = rows[i]
                .iter()
                .zip(rows[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
        }
    });
    d
}

/// Energy statistic for the split `first` / rest of the pooled distance
/// matrix `d` (size n x n).
fn energy_from_split(d: &[f64], n: usize, first: &[usize], second: &[usize]) -> f64 {
    let block = |g: &[usize], h: &[usize]| -> f64 {
        g.iter()
            .map(|&i| {
                let row = &d[i * n..(i + 1) * n];
                h.iter().map(|&j| row[j]).sum::<f64>()
            })
            .sum()
    };
    let (n1, n2) = (first.len() as f64, second.len() as f64);
    let d12 = block(first, second) / (n1 * n2);
    let d11 = block(first, first) / (n1 * n1);
    let d22 = block(second, second) / (n2 * n2);
    n1 * n2 / (n1 + n2) * (2.0 * d12 - d11 - d22)
}

/// e(S1, S2) = N1 N2 / (N1 + N2) (2 D12 - D11 - D22), D_ij the mean
/// pairwise Euclidean distance between the samples.
pub fn energy_statistic(s1: &[Vec<f64>], s2: &[Vec<f64>]) -> Result<f64> {
    let (pooled, dims) = pool(s1, s2)?;
    let _ = dims;
    let d = pairwise_distances(&pooled);
    let n = pooled.len();
    let first: Vec<usize> = (0..s1.len()).collect();
    let second: Vec<usize> = (s1.len()..n).collect();
    Ok(energy_from_split(&d, n, &first, &second))
}

fn pool<'a>(s1: &'a [Vec<f64>], s2: &'a [Vec<f64>]) -> Result<(Vec<&'a [f64]>, usize)> {
    if s1.is_empty() || s2.is_empty() {
        return Err(Error::EmptyData);
    }
    let dims = s1[0].len();
    check_rows(s1, dims)?;
    check_rows(s2, dims)?;
    Ok((s1.iter().chain(s2).map(|r| r.as_slice()).collect(), dims))
}

/// Permutation test on the energy statistic. Replicate `i` shuffles the
/// pooled rows with its own stream of a generator seeded from `rng`, so the
/// p-value does not depend on thread scheduling.
pub fn energy_two_sample<R: Rng + ?Sized>(
    s1: &[Vec<f64>],
    s2: &[Vec<f64>],
    permutations: usize,
    rng: &mut R,
) -> Result<TestReport> {
    if permutations < 99 {
        return Err(Error::InvalidArgument(format!(
            "at least 99 permutations are needed, got {permutations}"
        )));
    }
    let (pooled, _) = pool(s1, s2)?;
    let n = pooled.len();
    if n > MAX_ENERGY_POOL {
        return Err(Error::InvalidArgument(format!(
            "energy test on {n} pooled rows exceeds the limit of {MAX_ENERGY_POOL}"
        )));
    }
    let d = pairwise_distances(&pooled);
    let first: Vec<usize> = (0..s1.len()).collect();
    let second: Vec<usize> = (s1.len()..n).collect();
    let e = energy_from_split(&d, n, &first, &second);
    let base: u64 = rng.random();
    let exceed = (0..permutations as u64)
        .into_par_iter()
        .filter(|&k| {
            let mut r = ChaCha8Rng::seed_from_u64(base);
            r.set_stream(k);
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut r);
            let (a, b) = idx.split_at(s1.len());
            energy_from_split(&d, n, a, b) >= e
        })
        .count();
    let p = (1 + exceed) as f64 / (permutations + 1) as f64;
    Ok(TestReport {
        test: TestKind::Energy,
        statistic: e,
        p_value: Some(p),
        n1: s1.len(),
        n2: s2.len(),
        decisions: ALPHAS
            .iter()
            .map(|&alpha| Decision {
                alpha,
                rejected: p <= alpha,
                threshold: None,
            })
            .collect(),
    })
}

const CDF_CELLS: usize = 4096;
const GRID_CELLS: f64 = 1048576.0;

/// Sampler for max(f^, 0) / integral max(f^, 0) over the estimate's bounds.
///
/// Univariate estimates are inverted through a piecewise-linear cdf on a
/// 4096-cell grid. Multivariate estimates pick a tensor-grid cell in
/// proportion to the clipped density at its centre and jitter uniformly
/// inside it.
#[derive(Debug, Clone)]
pub struct EstimateSampler {
    bounds: Vec<(f64, f64)>,
    cells: usize,
    cumulative: Vec<f64>,
    positive_mass: f64,
}

impl EstimateSampler {
    pub fn new(est: &DensityEstimate) -> Result<Self> {
        let bounds = est.bounds();
        let k = bounds.len();
        let (cells, cumulative, mass) = if k == 1 {
            let (a, b) = bounds[0];
            let h = (b - a) / CDF_CELLS as f64;
            let f: Vec<f64> = (0..=CDF_CELLS)
                .into_par_iter()
                .map(|i| {
                    let x = if i == CDF_CELLS { b } else { a + h * i as f64 };
                    est.eval(&[x]).map(|v| v.max(0.0))
                })
                .collect::<Result<_>>()?;
            let mut cum = Vec::with_capacity(CDF_CELLS + 1);
            let mut s = 0.0;
            cum.push(0.0);
            for w in f.windows(2) {
                s += 0.5 * h * (w[0] + w[1]);
                cum.push(s);
            }
            (CDF_CELLS, cum, s)
        } else {
            let per_axis = (GRID_CELLS.powf(1.0 / k as f64).floor() as usize).max(8);
            let total = per_axis.pow(k as u32);
            let vol: f64 = bounds.iter().map(|(a, b)| (b - a) / per_axis as f64).product();
            let f: Vec<f64> = (0..total)
                .into_par_iter()
                .map(|flat| {
                    let x = cell_point(flat, per_axis, &bounds, &vec![0.5; k]);
                    est.eval(&x).map(|v| v.max(0.0) * vol)
                })
                .collect::<Result<_>>()?;
            let mut cum = Vec::with_capacity(total + 1);
            let mut s = 0.0;
            cum.push(0.0);
            for w in &f {
                s += w;
                cum.push(s);
            }
            (per_axis, cum, s)
        };
        if !(mass >= 0.5) {
            return Err(Error::DegenerateEstimate(mass));
        }
        Ok(EstimateSampler {
            bounds,
            cells,
            cumulative,
            positive_mass: mass,
        })
    }

    /// Grid approximation of the integral of max(f^, 0).
    pub fn positive_mass(&self) -> f64 {
        self.positive_mass
    }

    fn pick(&self, u: f64) -> (usize, f64) {
        let target = u * self.positive_mass;
        let cell = self.cumulative.partition_point(|c| *c <= target).clamp(1, self.cumulative.len() - 1) - 1;
        let (lo, hi) = (self.cumulative[cell], self.cumulative[cell + 1]);
        let frac = if hi > lo { ((target - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.5 };
        (cell, frac)
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let (cell, frac) = self.pick(rng.random());
        if self.bounds.len() == 1 {
            let (a, b) = self.bounds[0];
            let h = (b - a) / self.cells as f64;
            return vec![(a + h * (cell as f64 + frac)).min(b)];
        }
        let jitter: Vec<f64> = (0..self.bounds.len()).map(|_| rng.random()).collect();
        cell_point(cell, self.cells, &self.bounds, &jitter)
    }

    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Vec<f64>> {
        (0..n).map(|_| self.draw(rng)).collect()
    }
}

fn cell_point(mut flat: usize, per_axis: usize, bounds: &[(f64, f64)], offset: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; bounds.len()];
    for axis in (0..bounds.len()).rev() {
        let c = flat % per_axis;
        flat /= per_axis;
        let (a, b) = bounds[axis];
        let h = (b - a) / per_axis as f64;
        x[axis] = a + h * (c as f64 + offset[axis]);
    }
    x
}

/// `n` draws from the clipped and renormalized estimate, one row per draw.
pub fn sample_estimate<R: Rng + ?Sized>(est: &DensityEstimate, n: usize, rng: &mut R) -> Result<Vec<Vec<f64>>> {
    Ok(EstimateSampler::new(est)?.sample(n, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::ReferenceDistribution;
    use crate::estimator::{fit, fit_multivariate, MomentTensor, MomentVector};
    use approx::assert_abs_diff_eq;

    #[test]
    fn ks_trivial_cases() {
        let s = [0.3, 0.1, 0.7, 0.7];
        let r = ks_two_sample(&s, &s).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.rejected_at(0.05), Some(false));
        let r = ks_two_sample(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert!(ks_two_sample(&[], &[1.0]).is_err());
    }

    #[test]
    fn ks_hand_computed() {
        // F1 - F2 at 1, 2, 3, 4, 5: 1/2, 1/6, 2/3, 1/3, 0
        let r = ks_two_sample(&[1.0, 3.0], &[2.0, 4.0, 5.0]).unwrap();
        assert_abs_diff_eq!(r.statistic, 2.0 / 3.0, epsilon = 1e-15);
        let r = ks_two_sample(&[1.0, 2.0], &[2.0, 3.0]).unwrap();
        assert_abs_diff_eq!(r.statistic, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn ks_thresholds_at_n_1000() {
        assert_abs_diff_eq!(ks_threshold(0.05, 1000, 1000), 0.0607, epsilon = 1e-4);
        assert_abs_diff_eq!(ks_threshold(0.2, 1000, 1000), 0.0479, epsilon = 1e-4);
        let r = ks_two_sample(&[0.0; 1000], &[0.0; 1000]).unwrap();
        assert_eq!(r.threshold_at(0.05), Some(ks_threshold(0.05, 1000, 1000)));
    }

    #[test]
    fn glyphs() {
        let mut r = ks_two_sample(&[0.0, 1.0], &[0.0, 1.0]).unwrap();
        assert_eq!(r.glyph(), "✓ !");
        r.decisions[1].rejected = true;
        assert_eq!(r.glyph(), "✓");
        r.decisions[0].rejected = true;
        assert_eq!(r.glyph(), "✗");
    }

    #[test]
    fn cdf_distance() {
        let d = ks_cdf_distance(&[0.5], |x| x).unwrap();
        assert_abs_diff_eq!(d, 0.5, epsilon = 1e-15);
        let s: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert_abs_diff_eq!(ks_cdf_distance(&s, |x| x).unwrap(), 0.005, epsilon = 1e-12);
    }

    #[test]
    fn energy_point_masses() {
        let n = 7;
        let s1 = vec![vec![0.0, 0.0]; n];
        let s2 = vec![vec![1.0, 0.0]; n];
        assert_abs_diff_eq!(energy_statistic(&s1, &s2).unwrap(), n as f64, epsilon = 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = energy_two_sample(&s1, &s1, 99, &mut rng).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.p_value.unwrap() >= 0.99);
        assert!(energy_two_sample(&s1, &[vec![1.0]], 99, &mut rng).is_err());
        assert!(energy_two_sample(&s1, &s2, 10, &mut rng).is_err());
    }

    #[test]
    fn energy_matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s1: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.random(), rng.random(), rng.random()]).collect();
        let s2: Vec<Vec<f64>> = (0..60).map(|_| vec![rng.random::<f64>() + 0.2, rng.random(), rng.random()]).collect();
        let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        let pooled: Vec<&[f64]> = s1.iter().chain(&s2).map(|r| r.as_slice()).collect();
        let d = pairwise_distances(&pooled);
        for (i, a) in pooled.iter().enumerate() {
            for (j, b) in pooled.iter().enumerate() {
                assert_eq!(d[i * pooled.len() + j], dist(a, b));
            }
        }
        let mean = |x: &[Vec<f64>], y: &[Vec<f64>]| {
            let mut s = 0.0;
            for a in x {
                for b in y {
                    s += dist(a, b);
                }
            }
            s / (x.len() * y.len()) as f64
        };
        let (n1, n2) = (40.0, 60.0);
        let e = n1 * n2 / (n1 + n2) * (2.0 * mean(&s1, &s2) - mean(&s1, &s1) - mean(&s2, &s2));
        assert_abs_diff_eq!(energy_statistic(&s1, &s2).unwrap(), e, epsilon = 1e-12);
    }

    #[test]
    fn energy_report_is_reproducible() {
        let mut g = ChaCha8Rng::seed_from_u64(8);
        let s1: Vec<Vec<f64>> = (0..50).map(|_| vec![g.random()]).collect();
        let s2: Vec<Vec<f64>> = (0..50).map(|_| vec![g.random::<f64>() + 0.5]).collect();
        let a = energy_two_sample(&s1, &s2, 199, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = energy_two_sample(&s1, &s2, 199, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rejected_at(0.05), Some(true));
        assert_abs_diff_eq!(a.p_value.unwrap(), 1.0 / 200.0, epsilon = 1e-15);
    }

    #[test]
    fn report_json() {
        let r = ks_two_sample(&[0.1, 0.2], &[0.3]).unwrap();
        let back: TestReport = serde_json::from_value(r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn exact_uniform_fit_samples_uniformly() {
        let u = ReferenceDistribution::uniform(0.0, 1.0).unwrap();
        let m = MomentVector::new(u.raw_moments(4).unwrap()).unwrap();
        let est = fit(&m, &u).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws: Vec<f64> = sample_estimate(&est, 10_000, &mut rng).unwrap().into_iter().map(|r| r[0]).collect();
        let d = ks_cdf_distance(&draws, |x| x.clamp(0.0, 1.0)).unwrap();
        // one-sample bound at alpha = 0.01
        assert!(d < (-0.5 * (0.005f64).ln()).sqrt() / 100.0, "D = {d}");
    }

    #[test]
    fn truncated_exponential_estimate_passes_ks() {
        let est = fit(
            &MomentVector::new(vec![1.0, 0.418023, 0.254070]).unwrap(),
            &ReferenceDistribution::uniform(0.0, 1.0).unwrap(),
        )
        .unwrap();
        let truth = ReferenceDistribution::truncated_exponential(1.0, 0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a: Vec<f64> = sample_estimate(&est, 1000, &mut rng).unwrap().into_iter().map(|r| r[0]).collect();
        let b: Vec<f64> = (0..1000).map(|_| truth.sample(&mut rng)).collect();
        assert!(ks_two_sample(&a, &b).unwrap().statistic < 0.0607);
    }

    #[test]
    fn bivariate_grid_sampler_marginal_mean() {
        let m = MomentTensor::new(
            vec![2, 2],
            vec![1.0, 1.99556, 4.96894, 0.71721, 1.43124, 3.56379, 1.13054, 2.25606, 5.61757],
        )
        .unwrap();
        let refs = [
            ReferenceDistribution::truncated_normal(0.71721, 0.61614, -2.0, 2.0).unwrap(),
            ReferenceDistribution::truncated_normal(1.99556, 0.98667, -4.0, 5.0).unwrap(),
        ];
        let est = fit_multivariate(&m, &refs).unwrap();
        let n = 20_000;
        let draws = sample_estimate(&est, n, &mut ChaCha8Rng::seed_from_u64(13)).unwrap();
        let xs: Vec<f64> = draws.iter().map(|r| r[0]).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 0.71721).abs() < 4.0 * (var / n as f64).sqrt(), "mean {mean}");
        assert!(draws.iter().all(|r| (-2.0..=2.0).contains(&r[0]) && (-4.0..=5.0).contains(&r[1])));
    }

    #[test]
    fn degenerate_estimate_rejected() {
        let u = ReferenceDistribution::uniform(0.0, 1.0).unwrap();
        let est = fit(&MomentVector::new(vec![1.0, 0.5]).unwrap(), &u).unwrap();
        let mut v = est.to_json().unwrap();
        v["alpha"][0] = serde_json::json!(0.1);
        let scaled = DensityEstimate::from_json(&v).unwrap();
        assert!(matches!(EstimateSampler::new(&scaled), Err(Error::DegenerateEstimate(_))));
    }

    #[test]
    fn estimate_cdf_distance_of_truncated_gamma() {
        let tg = ReferenceDistribution::truncated_gamma(2.0, 0.5, 0.0, 5.0).unwrap();
        let m = MomentVector::new(tg.raw_moments(5).unwrap()).unwrap();
        let est = fit(&m, &ReferenceDistribution::uniform(0.0, 5.0).unwrap()).unwrap();
        // trapezoid-integrated Legendre projection on a 20001-point grid gives 4.593e-5
        let d = estimate_cdf_distance(&est, |x| tg.cdf(x), 2000).unwrap();
        assert!((4.5e-5..4.7e-5).contains(&d), "{d}");
        let u = ReferenceDistribution::uniform(0.0, 5.0).unwrap();
        let flat = fit(&MomentVector::new(u.raw_moments(3).unwrap()).unwrap(), &u).unwrap();
        assert!(estimate_cdf_distance(&flat, |x| u.cdf(x), 100).unwrap() < 1e-12);
    }

    #[test]
    fn extra_decision_levels() {
        let mut r = ks_two_sample(&[1.0, 2.0, 3.0, 4.0], &[2.5, 3.5, 4.5, 5.5]).unwrap();
        r.decide_at(0.5).unwrap();
        assert_eq!(r.decisions.len(), 3);
        assert_eq!(r.threshold_at(0.5), Some(ks_threshold(0.5, 4, 4)));
        r.decide_at(0.05).unwrap();
        assert_eq!(r.decisions.len(), 3);
        assert!(r.decide_at(1.5).is_err());
    }
}
