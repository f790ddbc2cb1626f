//! Gauss-Legendre quadrature: fixed rules, a globally adaptive integrator
//! and tensor-product rules for box domains.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi initial guess, refined by Newton on P_n
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_and_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Maps the rule onto `panels` equal sub-intervals of [a, b].
    pub fn composite_points(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let h = (b - a) / panels as f64;
        let mut xs = Vec::with_capacity(panels * self.nodes.len());
        let mut ws = Vec::with_capacity(panels * self.nodes.len());
        for p in 0..panels {
            let lo = a + h * p as f64;
            let mid = lo + 0.5 * h;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                xs.push(mid + 0.5 * h * x);
                ws.push(0.5 * h * w);
            }
        }
        (xs, ws)
    }
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn rule(n: usize) -> &'static GaussLegendre {
    static G10: OnceLock<GaussLegendre> = OnceLock::new();
    static G20: OnceLock<GaussLegendre> = OnceLock::new();
    static G32: OnceLock<GaussLegendre> = OnceLock::new();
    match n {
        10 => G10.get_or_init(|| GaussLegendre::new(10)),
        20 => G20.get_or_init(|| GaussLegendre::new(20)),
        32 => G32.get_or_init(|| GaussLegendre::new(32)),
        _ => unreachable!("only cached rule sizes are 10, 20, 32"),
    }
}

/// Shared 32-point rule used by the tensor integrators.
pub fn gauss32() -> &'static GaussLegendre {
    rule(32)
}

#[derive(Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    magnitude: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

const MAX_SEGMENTS: usize = 4000;
const ROUNDING: f64 = 64.0 * f64::EPSILON;

fn segment<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let coarse = rule(10).integrate(f, a, b);
    let fine = rule(20).integrate(f, a, b);
    let magnitude = rule(20).integrate(|x| f(x).abs(), a, b);
    Segment {
        a,
        b,
        value: fine,
        error: (fine - coarse).abs(),
        magnitude,
    }
}

/// Globally adaptive Gauss-Legendre integration of `f` over the finite
/// interval [a, b]. The segment with the largest 10/20-point discrepancy is
/// bisected until the total error estimate is below
/// `max(rel_tol * |I|, abs_tol)`, or below the rounding floor set by the
/// integral of |f| when the integrand cancels.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "quadrature needs a finite interval, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut heap = BinaryHeap::new();
    let first = segment(&f, a, b);
    let mut total = first.value;
    let mut error = first.error;
    let mut magnitude = first.magnitude;
    heap.push(first);
    while error > (rel_tol * total.abs()).max(abs_tol).max(ROUNDING * magnitude) {
        if heap.len() >= MAX_SEGMENTS {
            return Err(Error::QuadratureFailure {
                lower: a,
                upper: b,
                estimate: total,
                error_estimate: error,
            });
        }
        let worst = heap.pop().expect("heap is never empty here");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // cannot split further in floating point
            return Err(Error::QuadratureFailure {
                lower: a,
                upper: b,
                estimate: total,
                error_estimate: error,
            });
        }
        let left = segment(&f, worst.a, mid);
        let right = segment(&f, mid, worst.b);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        magnitude += left.magnitude + right.magnitude - worst.magnitude;
        heap.push(left);
        heap.push(right);
        if heap.len() % 64 == 0 {
            // resum to shed accumulated cancellation in the running totals
            total = heap.iter().map(|s| s.value).sum();
            error = heap.iter().map(|s| s.error).sum();
            magnitude = heap.iter().map(|s| s.magnitude).sum();
        }
    }
    Ok(heap.iter().map(|s| s.value).sum())
}

/// Default-tolerance adaptive integration (1e-10 relative).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    integrate_adaptive(f, a, b, 1e-10, 1e-300)
}

/// Tensor-product composite Gauss-Legendre rule over a box. Each axis is cut
/// into `panels` pieces carrying the 32-point rule.
pub fn integrate_box<F: Fn(&[f64]) -> f64 + Sync>(f: F, bounds: &[(f64, f64)], panels: usize) -> f64 {
    use rayon::prelude::*;

    let axes: Vec<(Vec<f64>, Vec<f64>)> = bounds
        .iter()
        .map(|(a, b)| gauss32().composite_points(*a, *b, panels))
        .collect();
    let k = axes.len();
    if k == 0 {
        return f(&[]);
    }
    let first_len = axes[0].0.len();
    // parallel over the first axis; each worker walks the remaining grid
    let partial: Vec<f64> = (0..first_len)
        .into_par_iter()
        .map(|i0| {
            let mut point = vec![0.0; k];
            point[0] = axes[0].0[i0];
            let w0 = axes[0].1[i0];
            let mut idx = vec![0usize; k];
            let mut acc = 0.0;
            loop {
                let mut w = w0;
                for j in 1..k {
                    point[j] = axes[j].0[idx[j]];
                    w *= axes[j].1[idx[j]];
                }
                acc += w * f(&point);
                // odometer over axes 1..k
                let mut j = k;
                loop {
                    j -= 1;
                    if j == 0 {
                        return acc;
                    }
                    idx[j] += 1;
                    if idx[j] < axes[j].0.len() {
                        break;
                    }
                    idx[j] = 0;
                }
            }
        })
        .collect();
    partial.iter().sum()
}
