//! Where moments come from: data, closed forms, and closed forms indexed by
//! loop iteration.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::sync::{Arc, Mutex};

use num_rational::Ratio;
use rayon::prelude::*;

use crate::distributions::ReferenceDistribution;
use crate::error::{Error, Result};
use crate::estimator::{DensityEstimate, MomentTensor, MomentVector};
use crate::orthobasis::{grid_len, tensor_basis, MultiBasis};

/// Rows of k-dimensional observations with column names.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Observations {
    pub fn new(names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != names.len()) {
            return Err(Error::DimensionMismatch {
                expected: names.len(),
                actual: bad.len(),
            });
        }
        Ok(Observations { names, rows })
    }

    pub fn dims(&self) -> usize {
        self.names.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    /// Keeps the named columns, in the given order.
    pub fn select(&self, names: &[&str]) -> Result<Observations> {
        let cols: Vec<usize> = names
            .iter()
            .map(|n| {
                self.names
                    .iter()
                    .position(|h| h == n)
                    .ok_or_else(|| Error::InvalidArgument(format!("no column `{n}`")))
            })
            .collect::<Result<_>>()?;
        Ok(Observations {
            names: names.iter().map(|s| s.to_string()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| cols.iter().map(|c| r[*c]).collect())
                .collect(),
        })
    }

    /// CSV with a header row of variable names.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| {
                    f.parse::<f64>().map_err(|_| {
                        Error::InvalidArgument(format!("row {}: `{f}` is not a number", line + 2))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        Observations::new(names, rows)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.names)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|v| format!("{v:?}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Exact floating-point summation (Shewchuk's non-overlapping partials); the
/// rounded result does not depend on the order in which terms or partial
/// sums are combined.
#[derive(Debug, Clone, Default)]
pub struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn add(&mut self, mut x: f64) {
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    pub fn merge(&mut self, other: &ExactSum) {
        for p in &other.partials {
            self.add(*p);
        }
    }

    /// Correctly rounded value of the sum.
    pub fn value(&self) -> f64 {
        let p = &self.partials;
        let mut n = p.len();
        if n == 0 {
            return 0.0;
        }
        n -= 1;
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            n -= 1;
            let y = p[n];
            hi = x + y;
            lo = y - (hi - x);
            if lo != 0.0 {
                break;
            }
        }
        // round-half-even correction when the remaining partials push past a tie
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
        hi
    }
}

/// Streaming accumulator of cross moments over a multi-index grid.
#[derive(Debug, Clone)]
pub struct MomentAccumulator {
    degrees: Vec<usize>,
    sums: Vec<ExactSum>,
    count: u64,
    powers: Vec<Vec<f64>>,
    terms: Vec<f64>,
}

impl MomentAccumulator {
    pub fn new(degrees: &[usize]) -> Self {
        MomentAccumulator {
            degrees: degrees.to_vec(),
            sums: vec![ExactSum::default(); grid_len(degrees)],
            count: 0,
            powers: degrees.iter().map(|d| vec![1.0; d + 1]).collect(),
            terms: vec![0.0; grid_len(degrees)],
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn push(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.degrees.len());
        for (p, x) in self.powers.iter_mut().zip(row) {
            for l in 1..p.len() {
                p[l] = p[l - 1] * x;
            }
        }
        // fill the product grid axis by axis, last axis fastest
        self.terms[0] = 1.0;
        let mut filled = 1;
        for p in &self.powers {
            let len = p.len();
            for i in (0..filled).rev() {
                let base = self.terms[i];
                for (l, pl) in p.iter().enumerate() {
                    self.terms[i * len + l] = base * pl;
                }
            }
            filled *= len;
        }
        for (s, t) in self.sums.iter_mut().zip(&self.terms) {
            s.add(*t);
        }
        self.count += 1;
    }

    pub fn merge(&mut self, other: &MomentAccumulator) {
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            a.merge(b);
        }
        self.count += other.count;
    }

    pub fn finish(&self) -> Result<MomentTensor> {
        if self.count == 0 {
            return Err(Error::EmptyData);
        }
        let n = self.count as f64;
        let mut values: Vec<f64> = self.sums.iter().map(|s| s.value() / n).collect();
        values[0] = 1.0;
        MomentTensor::new(self.degrees.clone(), values)
    }
}

const CHUNK_ROWS: usize = 4096;

/// Entry (i_1..i_k) = mean over rows of prod_j x_j^{i_j}.
pub fn sample_moments(rows: &[Vec<f64>], degrees: &[usize]) -> Result<MomentTensor> {
    if rows.len() < 2 {
        return Err(Error::EmptyData);
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != degrees.len()) {
        return Err(Error::DimensionMismatch {
            expected: degrees.len(),
            actual: bad.len(),
        });
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("observations must be finite".into()));
    }
    let parts: Vec<MomentAccumulator> = rows
        .par_chunks(CHUNK_ROWS)
        .map(|chunk| {
            let mut acc = MomentAccumulator::new(degrees);
            for r in chunk {
                acc.push(r);
            }
            acc
        })
        .collect();
    let mut total = MomentAccumulator::new(degrees);
    for p in &parts {
        total.merge(p);
    }
    total.finish()
}

/// Univariate convenience wrapper around [`sample_moments`].
pub fn sample_moments_1d(data: &[f64], n: usize) -> Result<MomentVector> {
    let rows: Vec<Vec<f64>> = data.iter().map(|x| vec![*x]).collect();
    sample_moments(&rows, &[n])?.marginal(0)
}

/// E[X^k], k = 0..=6, for X the sum of t independent Uniform(0, 1), exactly.
pub fn irwin_hall_exact(t: u64) -> Result<Vec<Ratio<i128>>> {
    if t == 0 {
        return Err(Error::InvalidArgument("iteration t must be at least 1".into()));
    }
    let t = t as i128;
    let r = |n: i128, d: i128| Ratio::new(n, d);
    Ok(vec![
        r(1, 1),
        r(t, 2),
        r(t * (3 * t + 1), 12),
        r(t * t * (t + 1), 8),
        r(t * (15 * t * t * t + 30 * t * t + 5 * t - 2), 240),
        r(t * t * (3 * t * t * t + 10 * t * t + 5 * t - 2), 96),
        r(
            t * (63 * t.pow(5) + 315 * t.pow(4) + 315 * t.pow(3) - 91 * t * t - 42 * t + 16),
            4032,
        ),
    ])
}

/// The exact Irwin-Hall(t) moments converted to floating point.
pub fn irwin_hall_moments(t: u64) -> Result<MomentVector> {
    let exact = irwin_hall_exact(t)?;
    MomentVector::new(
        exact
            .iter()
            .map(|q| *q.numer() as f64 / *q.denom() as f64)
            .collect(),
    )
}

type MomentFn = dyn Fn(u64) -> Result<MomentTensor> + Send + Sync;

/// A moment tensor given as a closed-form function of the iteration t >= 1.
#[derive(Clone)]
pub struct MomentFunctionOfIteration {
    name: String,
    degrees: Vec<usize>,
    f: Arc<MomentFn>,
}

impl std::fmt::Debug for MomentFunctionOfIteration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MomentFunctionOfIteration({}, degrees {:?})", self.name, self.degrees)
    }
}

impl MomentFunctionOfIteration {
    pub fn new<F>(name: impl Into<String>, degrees: Vec<usize>, f: F) -> Self
    where
        F: Fn(u64) -> Result<MomentTensor> + Send + Sync + 'static,
    {
        MomentFunctionOfIteration {
            name: name.into(),
            degrees,
            f: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn eval(&self, t: u64) -> Result<MomentTensor> {
        let m = (self.f)(t)?;
        if m.degrees() != self.degrees.as_slice() {
            return Err(Error::DegreeMismatch(format!(
                "{} produced degrees {:?}, declared {:?}",
                self.name,
                m.degrees(),
                self.degrees
            )));
        }
        Ok(m)
    }
}

/// Irwin-Hall moments up to order 6 as a function of t.
pub fn irwin_hall() -> MomentFunctionOfIteration {
    MomentFunctionOfIteration::new("irwin_hall", vec![6], |t| {
        Ok(irwin_hall_moments(t)?.into())
    })
}

type ReferenceFactory = dyn Fn(u64) -> Result<Vec<ReferenceDistribution>> + Send + Sync;

/// Estimates f^_t for any t from a moment function and a reference chosen
/// per iteration. Bases are cached per (t, degrees).
pub struct SymbolicEstimator {
    moments: MomentFunctionOfIteration,
    factory: Arc<ReferenceFactory>,
    cache: Mutex<HashMap<(u64, Vec<usize>), MultiBasis>>,
}

impl SymbolicEstimator {
    pub fn new<F>(moments: MomentFunctionOfIteration, factory: F) -> Self
    where
        F: Fn(u64) -> Result<Vec<ReferenceDistribution>> + Send + Sync + 'static,
    {
        SymbolicEstimator {
            moments,
            factory: Arc::new(factory),
            cache: Mutex::new(HashMap::new()),
        }
    }

    /// Irwin-Hall with the Uniform(0, t) reference.
    pub fn irwin_hall() -> Self {
        SymbolicEstimator::new(irwin_hall(), |t| {
            Ok(vec![ReferenceDistribution::uniform(0.0, t as f64)?])
        })
    }

    pub fn estimate(&self, t: u64, degrees: &[usize]) -> Result<DensityEstimate> {
        let m = self.moments.eval(t)?.truncate(degrees)?;
        let key = (t, degrees.to_vec());
        let cached = self.cache.lock().expect("basis cache poisoned").get(&key).cloned();
        let basis = match cached {
            Some(b) => b,
            None => {
                let refs = (self.factory)(t)?;
                let b = tensor_basis(&refs, degrees)?;
                self.cache
                    .lock()
                    .expect("basis cache poisoned")
                    .insert(key, b.clone());
                b
            }
        };
        Ok(DensityEstimate::from_basis(basis, &m)?
            .with_source(format!("{}(t = {t})", self.moments.name())))
    }

    pub fn cached_bases(&self) -> usize {
        self.cache.lock().expect("basis cache poisoned").len()
    }
}

/// One-shot form of [`SymbolicEstimator::estimate`].
pub fn symbolic_estimate<F>(
    mf: &MomentFunctionOfIteration,
    reference_factory: F,
    t: u64,
    degrees: &[usize],
) -> Result<DensityEstimate>
where
    F: Fn(u64) -> Result<Vec<ReferenceDistribution>>,
{
    let m = mf.eval(t)?.truncate(degrees)?;
    let refs = reference_factory(t)?;
    Ok(DensityEstimate::from_basis(tensor_basis(&refs, degrees)?, &m)?
        .with_source(format!("{}(t = {t})", mf.name())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_samples() {
        let m = sample_moments(&[vec![1.0], vec![1.0], vec![1.0]], &[2]).unwrap();
        assert_eq!(m.values(), &[1.0, 1.0, 1.0]);
        let m = sample_moments(&[vec![0.0], vec![2.0]], &[2]).unwrap();
        assert_eq!(m.values(), &[1.0, 1.0, 2.0]);
        assert!(matches!(sample_moments(&[], &[2]), Err(Error::EmptyData)));
        assert!(sample_moments(&[vec![1.0, 2.0], vec![0.0]], &[1, 1]).is_err());
    }

    #[test]
    fn cross_moment_layout() {
        let rows = vec![vec![1.0, 2.0], vec![3.0, -1.0]];
        let m = sample_moments(&rows, &[2, 1]).unwrap();
        // (0,0) (0,1) (1,0) (1,1) (2,0) (2,1)
        assert_eq!(m.values(), &[1.0, 0.5, 2.0, -0.5, 5.0, -3.5]);
    }

    #[test]
    fn uniform_sample_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data: Vec<f64> = (0..1_000_000).map(|_| rng.random::<f64>()).collect();
        let m = sample_moments_1d(&data, 4).unwrap();
        for k in 1..=4 {
            let mean = 1.0 / (k as f64 + 1.0);
            let var = 1.0 / (2.0 * k as f64 + 1.0) - mean * mean;
            let se = (var / 1e6).sqrt();
            assert!((m.values()[k] - mean).abs() < 4.0 * se);
        }
    }

    #[test]
    fn exact_sum_is_exact() {
        let mut s = ExactSum::default();
        for x in [1e100, 1.0, -1e100, 1e-20] {
            s.add(x);
        }
        assert_eq!(s.value(), 1.0 + 1e-20);
        let mut a = ExactSum::default();
        let mut b = ExactSum::default();
        for i in 0..1000 {
            let x = 0.1 * i as f64;
            if i % 3 == 0 { a.add(x) } else { b.add(x) }
        }
        a.merge(&b);
        assert_eq!(a.value(), 49950.0);
    }

    #[test]
    fn irwin_hall_closed_forms() {
        let m = irwin_hall_exact(3).unwrap();
        let want = [(1, 1), (3, 2), (5, 2), (9, 2), (43, 5), (69, 4), (3025, 84)];
        for (q, (n, d)) in m.iter().zip(want) {
            assert_eq!(*q, Ratio::new(n, d));
        }
        let one = irwin_hall_moments(1).unwrap();
        for (k, v) in one.values().iter().enumerate() {
            assert_abs_diff_eq!(*v, 1.0 / (k as f64 + 1.0), epsilon = 1e-15);
        }
        assert!(irwin_hall_exact(0).is_err());
    }

    #[test]
    fn irwin_hall_two_by_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let data: Vec<f64> = (0..1_000_000).map(|_| rng.random::<f64>() + rng.random::<f64>()).collect();
        let m = sample_moments_1d(&data, 6).unwrap();
        let exact = irwin_hall_moments(2).unwrap();
        for k in 1..=6 {
            let sq: f64 = data.iter().map(|x| x.powi(2 * k as i32)).sum::<f64>() / data.len() as f64;
            let se = ((sq - m.values()[k].powi(2)) / data.len() as f64).sqrt();
            assert!((m.values()[k] - exact.values()[k]).abs() < 4.0 * se, "k={k}");
        }
    }

    #[test]
    fn irwin_hall_three_six_moment_deviation() {
        // sup error of the degree-6 Legendre projection, computed symbolically
        let est = SymbolicEstimator::irwin_hall().estimate(3, &[6]).unwrap();
        let exact = |x: f64| match x {
            x if x < 1.0 => x * x / 2.0,
            x if x < 2.0 => (-2.0 * x * x + 6.0 * x - 3.0) / 2.0,
            x => (3.0 - x) * (3.0 - x) / 2.0,
        };
        let sup = (0..=1000)
            .map(|k| 3.0 * k as f64 / 1000.0)
            .map(|x| (est.eval(&[x]).unwrap() - exact(x)).abs())
            .fold(0.0, f64::max);
        assert_abs_diff_eq!(sup, 0.021033379, epsilon = 1e-8);
    }

    #[test]
    fn symbolic_irwin_hall() {
        let s = SymbolicEstimator::irwin_hall();
        let e1 = s.estimate(1, &[6]).unwrap();
        for k in 1..20 {
            let x = k as f64 / 20.0;
            assert_abs_diff_eq!(e1.eval(&[x]).unwrap(), 1.0, epsilon = 1e-9);
        }
        s.estimate(1, &[6]).unwrap();
        s.estimate(3, &[6]).unwrap();
        assert_eq!(s.cached_bases(), 2);
        let once = symbolic_estimate(&irwin_hall(), |t| Ok(vec![ReferenceDistribution::uniform(0.0, t as f64)?]), 3, &[6]).unwrap();
        assert_eq!(once.alpha(), s.estimate(3, &[6]).unwrap().alpha());
    }

    #[test]
    fn csv_round_trip() {
        let obs = Observations::new(vec!["x".into(), "y".into()], vec![vec![0.1, -2.0], vec![1e-300, 3.5]]).unwrap();
        let mut buf = Vec::new();
        obs.write_csv(&mut buf).unwrap();
        let back = Observations::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, obs);
        assert_eq!(back.select(&["y"]).unwrap().rows, vec![vec![-2.0], vec![3.5]]);
        assert!(Observations::read_csv("x\nabc\n".as_bytes()).is_err());
    }
}
