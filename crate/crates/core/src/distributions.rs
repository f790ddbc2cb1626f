//! Reference and target distribution families.
//!
//! Every family exposes its pdf, cdf, raw moments and a sampler. Raw moments
//! are closed forms except for the truncated normal (two-term recurrence) and
//! [`NumericPdf`] (adaptive quadrature). The orthogonal-polynomial machinery
//! also asks for moments in a shifted and scaled coordinate; families closed
//! under affine maps answer that directly, the rest go through the binomial
//! transform of their raw moments.

use std::fmt;
use std::sync::{Arc, OnceLock};

use libm::erfc;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Map, Value};
use statrs::function::beta::{beta_reg, ln_beta};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};
use crate::quadrature;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Half-width (in standard deviations) used whenever an unbounded support has
/// to be cut for quadrature or grid sampling.
pub const TAIL_SIGMAS: f64 = 12.0;

/// Closed interval `[lower, upper]`, either end possibly infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lower: f64,
    pub upper: f64,
}

impl Support {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(Error::InvalidDistribution(format!(
                "support needs lower < upper, got [{lower}, {upper}]"
            )));
        }
        Ok(Support { lower, upper })
    }

    pub fn real_line() -> Self {
        Support {
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.lower.is_finite() && self.upper.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

impl Serialize for Support {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [bound_to_json(self.lower), bound_to_json(self.upper)].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Support {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw: [Value; 2] = Deserialize::deserialize(d)?;
        let lower = bound_from_json(&raw[0]).map_err(serde::de::Error::custom)?;
        let upper = bound_from_json(&raw[1]).map_err(serde::de::Error::custom)?;
        Support::new(lower, upper).map_err(serde::de::Error::custom)
    }
}

fn bound_to_json(x: f64) -> Value {
    if x == f64::INFINITY {
        Value::from("inf")
    } else if x == f64::NEG_INFINITY {
        Value::from("-inf")
    } else {
        Value::from(x)
    }
}

fn bound_from_json(v: &Value) -> std::result::Result<f64, String> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| format!("bad bound {n}")),
        Value::String(s) => match s.as_str() {
            "inf" | "+inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            other => other.parse::<f64>().map_err(|_| format!("bad bound `{other}`")),
        },
        other => Err(format!("bad bound {other}")),
    }
}

/// A pdf given pointwise on a bounded interval. Moments and the cdf come from
/// quadrature.
#[derive(Clone)]
pub struct NumericPdf {
    inner: Arc<NumericInner>,
}

struct NumericInner {
    f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    expr: Option<String>,
    norm: f64,
    lower: f64,
    upper: f64,
    table: OnceLock<CdfTable>,
}

const NUMERIC_CELLS: usize = 4096;

/// Cumulative mass at cell edges of an equal-width partition.
struct CdfTable {
    edges: Vec<f64>,
    cumulative: Vec<f64>,
}

impl NumericPdf {
    /// Wraps `f` as a density on `[lower, upper]`. With `normalize` the
    /// function is divided by its integral; otherwise the integral must already
    /// be 1 within 1e-8.
    pub fn new<F>(f: F, lower: f64, upper: f64, normalize: bool) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::build(Box::new(f), None, lower, upper, normalize)
    }

    /// Density given as an expression in `x` in the loop-program expression
    /// syntax, e.g. `"2*x"` or `"1 + 0.5*sin(x)"`.
    pub fn from_expr(expr: &str, lower: f64, upper: f64, normalize: bool) -> Result<Self> {
        let compiled = crate::loopsim::compile_function(expr, "x")?;
        Self::build(
            Box::new(move |x| compiled.eval(x)),
            Some(expr.to_string()),
            lower,
            upper,
            normalize,
        )
    }

    fn build(
        f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
        expr: Option<String>,
        lower: f64,
        upper: f64,
        normalize: bool,
    ) -> Result<Self> {
        let support = Support::new(lower, upper)?;
        if !support.is_bounded() {
            return Err(Error::InvalidDistribution(
                "numeric pdf needs a bounded support".into(),
            ));
        }
        // interior positivity on a probe grid
        for i in 1..256 {
            let x = lower + (upper - lower) * i as f64 / 256.0;
            let v = f(x);
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidDistribution(format!(
                    "numeric pdf must be finite and positive on the support, f({x}) = {v}"
                )));
            }
        }
        let integral = quadrature::integrate(&f, lower, upper)?;
        let norm = if normalize {
            integral
        } else {
            if (integral - 1.0).abs() > 1e-8 {
                return Err(Error::InvalidDistribution(format!(
                    "numeric pdf integrates to {integral}, not 1"
                )));
            }
            1.0
        };
        Ok(NumericPdf {
            inner: Arc::new(NumericInner {
                f,
                expr,
                norm,
                lower,
                upper,
                table: OnceLock::new(),
            }),
        })
    }

    pub fn expr(&self) -> Option<&str> {
        self.inner.expr.as_deref()
    }

    fn density(&self, x: f64) -> f64 {
        if x < self.inner.lower || x > self.inner.upper {
            0.0
        } else {
            (self.inner.f)(x) / self.inner.norm
        }
    }

    fn table(&self) -> &CdfTable {
        self.inner.table.get_or_init(|| {
            let (lo, hi) = (self.inner.lower, self.inner.upper);
            let h = (hi - lo) / NUMERIC_CELLS as f64;
            let g = quadrature::gauss32();
            let mut edges = Vec::with_capacity(NUMERIC_CELLS + 1);
            let mut cumulative = Vec::with_capacity(NUMERIC_CELLS + 1);
            let mut acc = 0.0;
            edges.push(lo);
            cumulative.push(0.0);
            for i in 0..NUMERIC_CELLS {
                let a = lo + h * i as f64;
                let b = if i + 1 == NUMERIC_CELLS { hi } else { a + h };
                acc += g.integrate(|x| self.density(x), a, b);
                edges.push(b);
                cumulative.push(acc);
            }
            // absorb quadrature residue so the table ends at exactly 1
            for c in cumulative.iter_mut() {
                *c /= acc;
            }
            CdfTable { edges, cumulative }
        })
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= self.inner.lower {
            return 0.0;
        }
        if x >= self.inner.upper {
            return 1.0;
        }
        let t = self.table();
        let h = (self.inner.upper - self.inner.lower) / NUMERIC_CELLS as f64;
        let i = (((x - self.inner.lower) / h) as usize).min(NUMERIC_CELLS - 1);
        let part = quadrature::gauss32().integrate(|s| self.density(s), t.edges[i], x);
        (t.cumulative[i] + part).clamp(0.0, 1.0)
    }

    fn quantile(&self, u: f64) -> f64 {
        let t = self.table();
        let i = match t
            .cumulative
            .binary_search_by(|c| c.total_cmp(&u))
        {
            Ok(i) => return t.edges[i],
            Err(i) => i.clamp(1, NUMERIC_CELLS) - 1,
        };
        // bisection inside the cell
        let (mut a, mut b) = (t.edges[i], t.edges[i + 1]);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if self.cdf(m) < u {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }
}

#[derive(Clone)]
enum Kind {
    Uniform,
    Normal {
        mean: f64,
        sd: f64,
    },
    TruncatedNormal {
        mean: f64,
        sd: f64,
        /// standardized bounds
        alpha: f64,
        beta: f64,
        mass: f64,
    },
    TruncatedExponential(TruncExp),
    TruncatedGamma {
        shape: f64,
        rate: f64,
        p_lower: f64,
        p_upper: f64,
    },
    ContinuousBernoulli {
        p: f64,
        exp: TruncExp,
    },
    Beta {
        alpha: f64,
        beta: f64,
        ln_b: f64,
    },
    Numeric(NumericPdf),
}

/// Exponential density with rate `rate` (any sign) restricted to [a, b].
#[derive(Debug, Clone, Copy)]
struct TruncExp {
    rate: f64,
    a: f64,
    b: f64,
}

impl TruncExp {
    fn u(&self) -> f64 {
        self.rate * (self.b - self.a)
    }

    fn is_flat(&self) -> bool {
        self.u().abs() < 1e-12
    }

    fn pdf(&self, x: f64) -> f64 {
        if x < self.a || x > self.b {
            return 0.0;
        }
        if self.is_flat() {
            return 1.0 / (self.b - self.a);
        }
        self.rate * (-self.rate * (x - self.a)).exp() / (-(-self.u()).exp_m1())
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= self.a {
            return 0.0;
        }
        if x >= self.b {
            return 1.0;
        }
        if self.is_flat() {
            return (x - self.a) / (self.b - self.a);
        }
        ((-self.rate * (x - self.a)).exp_m1() / (-self.u()).exp_m1()).clamp(0.0, 1.0)
    }

    fn quantile(&self, v: f64) -> f64 {
        if self.is_flat() {
            return self.a + v * (self.b - self.a);
        }
        let y = -(v * (-self.u()).exp_m1()).ln_1p() / self.rate;
        (self.a + y).clamp(self.a, self.b)
    }

    /// E[T^k] for T = (X - a)/(b - a) on [0, 1], k = 0..=n.
    fn unit_moments(&self, n: usize) -> Vec<f64> {
        let u = self.u();
        (0..=n)
            .map(|k| {
                if self.is_flat() {
                    return 1.0 / (k as f64 + 1.0);
                }
                let kf = k as f64;
                if u > 0.0 {
                    // tail of the exponential series: no cancellation for u > 0
                    let mut c = u / (kf + 1.0);
                    let mut sum = 0.0;
                    let mut i = 1.0;
                    while c > sum * 1e-17 {
                        sum += c;
                        i += 1.0;
                        c *= u / (kf + i);
                        if i > 10_000.0 {
                            break;
                        }
                    }
                    sum * (-u).exp() / (-(-u).exp_m1())
                } else {
                    let v = -u;
                    // sum_i v^i / (i! (k + i + 1)), all terms positive
                    let mut c = 1.0;
                    let mut sum = 0.0;
                    let mut i = 0.0;
                    loop {
                        let term = c / (kf + i + 1.0);
                        sum += term;
                        if term < sum * 1e-17 || i > 10_000.0 {
                            break;
                        }
                        i += 1.0;
                        c *= v / i;
                    }
                    v / v.exp_m1() * sum
                }
            })
            .collect()
    }

    fn raw_moments(&self, n: usize) -> Vec<f64> {
        let w = self.b - self.a;
        let unit = self.unit_moments(n);
        let scaled: Vec<f64> = unit
            .iter()
            .enumerate()
            .map(|(k, m)| m * w.powi(k as i32))
            .collect();
        if self.a == 0.0 {
            scaled
        } else {
            shift_moments(&scaled, self.a)
        }
    }
}

/// Moments of `c + Y` from moments of `Y`.
fn shift_moments(moments: &[f64], c: f64) -> Vec<f64> {
    (0..moments.len())
        .map(|k| {
            let mut binom = 1.0;
            let mut acc = 0.0;
            for i in 0..=k {
                acc += binom * c.powi((k - i) as i32) * moments[i];
                binom = binom * (k - i) as f64 / (i + 1) as f64;
            }
            acc
        })
        .collect()
}

/// Moments of `(X - shift)/scale` from raw moments of `X`.
pub fn affine_moments(raw: &[f64], shift: f64, scale: f64) -> Vec<f64> {
    shift_moments(raw, -shift)
        .into_iter()
        .enumerate()
        .map(|(k, m)| m / scale.powi(k as i32))
        .collect()
}

fn std_normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / SQRT_2)
}

fn std_normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

/// P(alpha <= Z <= beta) for a standard normal, avoiding tail cancellation.
fn normal_mass(alpha: f64, beta: f64) -> f64 {
    if alpha >= 0.0 {
        std_normal_sf(alpha) - std_normal_sf(beta)
    } else if beta <= 0.0 {
        std_normal_cdf(beta) - std_normal_cdf(alpha)
    } else {
        1.0 - std_normal_cdf(alpha) - std_normal_sf(beta)
    }
}

/// Inverse of erfc: the statrs estimate polished by Newton steps on
/// `libm::erfc`.
fn erfc_inv(y: f64) -> f64 {
    let mut x = statrs::function::erf::erfc_inv(y);
    if !x.is_finite() {
        return x;
    }
    for _ in 0..2 {
        let slope = -FRAC_2_SQRT_PI * (-x * x).exp();
        if slope == 0.0 {
            break;
        }
        x -= (erfc(x) - y) / slope;
    }
    x
}

fn std_normal_quantile(u: f64) -> f64 {
    -SQRT_2 * erfc_inv(2.0 * u)
}

/// Raw moments of a (possibly truncated) normal by the two-term recurrence
/// M_k = mu M_{k-1} + (k-1) s^2 M_{k-2} - s (b^{k-1} phi(beta) - a^{k-1} phi(alpha)) / Z.
fn normal_moments(mean: f64, sd: f64, lower: f64, upper: f64, n: usize) -> Vec<f64> {
    let alpha = (lower - mean) / sd;
    let beta = (upper - mean) / sd;
    let mass = normal_mass(alpha, beta);
    let phi_a = if lower.is_finite() { std_normal_pdf(alpha) } else { 0.0 };
    let phi_b = if upper.is_finite() { std_normal_pdf(beta) } else { 0.0 };
    let var = sd * sd;
    let mut m = Vec::with_capacity(n + 1);
    m.push(1.0);
    for k in 1..=n {
        let prev2 = if k >= 2 { m[k - 2] } else { 0.0 };
        let pa = if phi_a == 0.0 { 0.0 } else { lower.powi(k as i32 - 1) * phi_a };
        let pb = if phi_b == 0.0 { 0.0 } else { upper.powi(k as i32 - 1) * phi_b };
        let boundary = sd * (pb - pa) / mass;
        m.push(mean * m[k - 1] + (k as f64 - 1.0) * var * prev2 - boundary);
    }
    m
}

/// A univariate distribution usable as a K-series reference or as a target.
#[derive(Clone)]
pub struct ReferenceDistribution {
    kind: Kind,
    support: Support,
}

impl fmt::Debug for ReferenceDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

fn check_param(name: &str, v: f64, positive: bool) -> Result<()> {
    if !v.is_finite() || (positive && v <= 0.0) {
        return Err(Error::InvalidDistribution(format!(
            "parameter `{name}` must be {}finite, got {v}",
            if positive { "positive and " } else { "" }
        )));
    }
    Ok(())
}

fn check_bounded(lower: f64, upper: f64) -> Result<Support> {
    let s = Support::new(lower, upper)?;
    if !s.is_bounded() {
        return Err(Error::InvalidDistribution(format!(
            "this family needs a bounded support, got [{lower}, {upper}]"
        )));
    }
    Ok(s)
}

impl ReferenceDistribution {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        Ok(ReferenceDistribution {
            kind: Kind::Uniform,
            support: check_bounded(a, b)?,
        })
    }

    /// Normal with the given mean and *variance*. The only built-in family with
    /// unbounded support; it is exponentially integrable, so its polynomials
    /// are dense and the series is determined by the moments.
    pub fn normal(mean: f64, variance: f64) -> Result<Self> {
        check_param("mean", mean, false)?;
        check_param("variance", variance, true)?;
        Ok(ReferenceDistribution {
            kind: Kind::Normal {
                mean,
                sd: variance.sqrt(),
            },
            support: Support::real_line(),
        })
    }

    /// Normal(mean, variance) conditioned on [a, b]. The parameters are those
    /// of the parent normal, not the moments of the truncated law.
    pub fn truncated_normal(mean: f64, variance: f64, a: f64, b: f64) -> Result<Self> {
        check_param("mean", mean, false)?;
        check_param("variance", variance, true)?;
        let support = Support::new(a, b)?;
        let sd = variance.sqrt();
        let alpha = (a - mean) / sd;
        let beta = (b - mean) / sd;
        let mass = normal_mass(alpha, beta);
        if !(mass > 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "truncation interval [{a}, {b}] carries no mass under N({mean}, {variance})"
            )));
        }
        Ok(ReferenceDistribution {
            kind: Kind::TruncatedNormal {
                mean,
                sd,
                alpha,
                beta,
                mass,
            },
            support,
        })
    }

    /// Exponential with rate `rate` conditioned on [a, b].
    pub fn truncated_exponential(rate: f64, a: f64, b: f64) -> Result<Self> {
        check_param("rate", rate, true)?;
        let support = check_bounded(a, b)?;
        Ok(ReferenceDistribution {
            kind: Kind::TruncatedExponential(TruncExp { rate, a, b }),
            support,
        })
    }

    /// Gamma with shape `shape` and rate `rate` (density proportional to
    /// x^(shape-1) e^(-rate x)) conditioned on [a, b] with a >= 0.
    pub fn truncated_gamma(shape: f64, rate: f64, a: f64, b: f64) -> Result<Self> {
        check_param("shape", shape, true)?;
        check_param("rate", rate, true)?;
        let support = check_bounded(a, b)?;
        if a < 0.0 {
            return Err(Error::InvalidDistribution(
                "truncated gamma needs a >= 0".into(),
            ));
        }
        let p_lower = if a == 0.0 { 0.0 } else { gamma_lr(shape, rate * a) };
        let p_upper = gamma_lr(shape, rate * b);
        if !(p_upper > p_lower) {
            return Err(Error::InvalidDistribution(format!(
                "truncation interval [{a}, {b}] carries no gamma mass"
            )));
        }
        Ok(ReferenceDistribution {
            kind: Kind::TruncatedGamma {
                shape,
                rate,
                p_lower,
                p_upper,
            },
            support,
        })
    }

    /// Continuous Bernoulli on [0, 1]: density proportional to p^x (1-p)^(1-x).
    pub fn continuous_bernoulli(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidDistribution(format!(
                "continuous Bernoulli needs 0 < p < 1, got {p}"
            )));
        }
        // exactly flat at p = 1/2; TruncExp treats |rate| < 1e-12 as uniform
        let rate = if p == 0.5 { 0.0 } else { ((1.0 - p) / p).ln() };
        Ok(ReferenceDistribution {
            kind: Kind::ContinuousBernoulli {
                p,
                exp: TruncExp {
                    rate,
                    a: 0.0,
                    b: 1.0,
                },
            },
            support: Support {
                lower: 0.0,
                upper: 1.0,
            },
        })
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        check_param("alpha", alpha, true)?;
        check_param("beta", beta, true)?;
        Ok(ReferenceDistribution {
            kind: Kind::Beta {
                alpha,
                beta,
                ln_b: ln_beta(alpha, beta),
            },
            support: Support {
                lower: 0.0,
                upper: 1.0,
            },
        })
    }

    pub fn numeric(pdf: NumericPdf) -> Self {
        let support = Support {
            lower: pdf.inner.lower,
            upper: pdf.inner.upper,
        };
        ReferenceDistribution {
            kind: Kind::Numeric(pdf),
            support,
        }
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn family(&self) -> &'static str {
        match self.kind {
            Kind::Uniform => "uniform",
            Kind::Normal { .. } => "normal",
            Kind::TruncatedNormal { .. } => "truncated_normal",
            Kind::TruncatedExponential(_) => "truncated_exponential",
            Kind::TruncatedGamma { .. } => "truncated_gamma",
            Kind::ContinuousBernoulli { .. } => "continuous_bernoulli",
            Kind::Beta { .. } => "beta",
            Kind::Numeric(_) => "numeric",
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !self.support.contains(x) {
            return 0.0;
        }
        match &self.kind {
            Kind::Uniform => 1.0 / self.support.width(),
            Kind::Normal { mean, sd } => std_normal_pdf((x - mean) / sd) / sd,
            Kind::TruncatedNormal { mean, sd, mass, .. } => {
                std_normal_pdf((x - mean) / sd) / (sd * mass)
            }
            Kind::TruncatedExponential(e) => e.pdf(x),
            Kind::TruncatedGamma {
                shape,
                rate,
                p_lower,
                p_upper,
            } => {
                if x == 0.0 {
                    return if *shape == 1.0 {
                        rate / (p_upper - p_lower)
                    } else if *shape < 1.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    };
                }
                let ln = shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - ln_gamma(*shape);
                ln.exp() / (p_upper - p_lower)
            }
            Kind::ContinuousBernoulli { exp, .. } => exp.pdf(x),
            Kind::Beta { alpha, beta, ln_b } => {
                if (x == 0.0 && *alpha != 1.0) || (x == 1.0 && *beta != 1.0) {
                    let exponent = if x == 0.0 { *alpha } else { *beta };
                    return if exponent < 1.0 { f64::INFINITY } else { 0.0 };
                }
                let l0 = if *alpha == 1.0 { 0.0 } else { (alpha - 1.0) * x.ln() };
                let l1 = if *beta == 1.0 { 0.0 } else { (beta - 1.0) * (-x).ln_1p() };
                (l0 + l1 - ln_b).exp()
            }
            Kind::Numeric(n) => n.density(x),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.support.lower {
            return 0.0;
        }
        if x >= self.support.upper {
            return 1.0;
        }
        match &self.kind {
            Kind::Uniform => (x - self.support.lower) / self.support.width(),
            Kind::Normal { mean, sd } => std_normal_cdf((x - mean) / sd),
            Kind::TruncatedNormal {
                mean,
                sd,
                alpha,
                mass,
                ..
            } => (normal_mass(*alpha, (x - mean) / sd) / mass).clamp(0.0, 1.0),
            Kind::TruncatedExponential(e) => e.cdf(x),
            Kind::TruncatedGamma {
                shape,
                rate,
                p_lower,
                p_upper,
            } => ((gamma_lr(*shape, rate * x) - p_lower) / (p_upper - p_lower)).clamp(0.0, 1.0),
            Kind::ContinuousBernoulli { exp, .. } => exp.cdf(x),
            Kind::Beta { alpha, beta, .. } => beta_reg(*alpha, *beta, x),
            Kind::Numeric(n) => n.cdf(x),
        }
    }

    /// E[X^k].
    pub fn raw_moment(&self, k: usize) -> Result<f64> {
        Ok(self.raw_moments(k)?[k])
    }

    /// E[X^j] for j = 0..=n.
    pub fn raw_moments(&self, n: usize) -> Result<Vec<f64>> {
        let s = self.support;
        Ok(match &self.kind {
            Kind::Uniform => uniform_moments(s.lower, s.upper, n),
            Kind::Normal { mean, sd } => {
                normal_moments(*mean, *sd, f64::NEG_INFINITY, f64::INFINITY, n)
            }
            Kind::TruncatedNormal { .. } if self.truncation_is_tight() => self.affine_moments(n, 0.0, 1.0)?,
            Kind::TruncatedNormal { mean, sd, .. } => {
                normal_moments(*mean, *sd, s.lower, s.upper, n)
            }
            Kind::TruncatedExponential(e) => e.raw_moments(n),
            Kind::ContinuousBernoulli { exp, .. } => exp.raw_moments(n),
            Kind::TruncatedGamma {
                shape,
                rate,
                p_lower,
                p_upper,
            } => {
                let mass = p_upper - p_lower;
                let ln_g = ln_gamma(*shape);
                (0..=n)
                    .map(|k| {
                        if k == 0 {
                            return 1.0;
                        }
                        let sk = shape + k as f64;
                        let hi = gamma_lr(sk, rate * s.upper);
                        let lo = if s.lower == 0.0 { 0.0 } else { gamma_lr(sk, rate * s.lower) };
                        (ln_gamma(sk) - ln_g - k as f64 * rate.ln()).exp() * (hi - lo) / mass
                    })
                    .collect()
            }
            Kind::Beta { alpha, beta, .. } => {
                let mut m = Vec::with_capacity(n + 1);
                m.push(1.0);
                for r in 0..n {
                    let r = r as f64;
                    let prev = *m.last().unwrap();
                    m.push(prev * (alpha + r) / (alpha + beta + r));
                }
                m
            }
            Kind::Numeric(p) => {
                let mut m = Vec::with_capacity(n + 1);
                m.push(1.0);
                for k in 1..=n {
                    m.push(quadrature::integrate(
                        |x| x.powi(k as i32) * p.density(x),
                        s.lower,
                        s.upper,
                    )?);
                }
                m
            }
        })
    }

    /// The moment recurrence loses about a digit per order once a
    /// truncation point is within a few standard deviations of the mean.
    fn truncation_is_tight(&self) -> bool {
        match &self.kind {
            Kind::TruncatedNormal { alpha, beta, .. } => alpha.abs().min(beta.abs()) < 6.0,
            _ => false,
        }
    }

    /// E[((X - shift)/scale)^j] for j = 0..=n.
    pub fn affine_moments(&self, n: usize, shift: f64, scale: f64) -> Result<Vec<f64>> {
        let s = self.support;
        let map = |x: f64| (x - shift) / scale;
        Ok(match &self.kind {
            Kind::Uniform => uniform_moments(map(s.lower), map(s.upper), n),
            Kind::Normal { mean, sd } => normal_moments(
                map(*mean),
                sd / scale,
                f64::NEG_INFINITY,
                f64::INFINITY,
                n,
            ),
            Kind::TruncatedNormal { mean, sd, .. } if !self.truncation_is_tight() => {
                normal_moments(map(*mean), sd / scale, map(s.lower), map(s.upper), n)
            }
            // no closed form in a shifted frame; the binomial route cancels
            // badly at high order, direct quadrature does not
            _ => {
                let (lo, hi) = self.integration_bounds();
                let mut m = Vec::with_capacity(n + 1);
                m.push(1.0);
                for k in 1..=n {
                    m.push(quadrature::integrate_adaptive(
                        |x| map(x).powi(k as i32) * self.pdf(x),
                        lo,
                        hi,
                        1e-14,
                        1e-300,
                    )?);
                }
                m
            }
        })
    }

    pub fn mean(&self) -> f64 {
        match &self.kind {
            Kind::Normal { mean, .. } => *mean,
            _ => self.raw_moments(1).map(|m| m[1]).unwrap_or(f64::NAN),
        }
    }

    pub fn variance(&self) -> f64 {
        match &self.kind {
            Kind::Normal { sd, .. } => sd * sd,
            Kind::Uniform => self.support.width().powi(2) / 12.0,
            _ => {
                let mean = self.mean();
                self.affine_moments(2, mean, 1.0)
                    .map(|m| m[2])
                    .unwrap_or(f64::NAN)
            }
        }
    }

    /// Finite interval carrying the mass for quadrature and grid work: the
    /// support itself when bounded, otherwise mean +/- 12 sd clipped to it.
    pub fn integration_bounds(&self) -> (f64, f64) {
        let s = self.support;
        if s.is_bounded() {
            return (s.lower, s.upper);
        }
        let mean = self.mean();
        let sd = self.variance().sqrt();
        (
            s.lower.max(mean - TAIL_SIGMAS * sd),
            s.upper.min(mean + TAIL_SIGMAS * sd),
        )
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let s = self.support;
        match &self.kind {
            Kind::Uniform => s.lower + u * s.width(),
            Kind::Normal { mean, sd } => mean + sd * std_normal_quantile(u),
            Kind::TruncatedNormal {
                mean,
                sd,
                alpha,
                beta,
                mass,
            } => {
                let z = if *alpha >= 0.0 {
                    let q = std_normal_sf(*alpha) - u * mass;
                    SQRT_2 * erfc_inv(2.0 * q)
                } else {
                    let _ = beta;
                    std_normal_quantile(std_normal_cdf(*alpha) + u * mass)
                };
                (mean + sd * z).clamp(s.lower, s.upper)
            }
            Kind::TruncatedExponential(e) => e.quantile(u),
            Kind::ContinuousBernoulli { exp, .. } => exp.quantile(u),
            Kind::Numeric(n) => n.quantile(u),
            Kind::TruncatedGamma { .. } | Kind::Beta { .. } => self.bisect_quantile(u),
        }
    }

    fn bisect_quantile(&self, u: f64) -> f64 {
        let (mut a, mut b) = self.integration_bounds();
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if self.cdf(m) < u {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    /// One draw. Closed-form families use the inverse cdf; the truncated
    /// normal and gamma reject from the parent law when the truncation keeps
    /// enough mass.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let s = self.support;
        match &self.kind {
            Kind::Normal { mean, sd } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + sd * z
            }
            Kind::TruncatedNormal { mean, sd, mass, .. } if *mass >= 0.25 => loop {
                let z: f64 = StandardNormal.sample(rng);
                let x = mean + sd * z;
                if s.contains(x) {
                    return x;
                }
            },
            Kind::TruncatedGamma {
                shape,
                rate,
                p_lower,
                p_upper,
            } if p_upper - p_lower >= 0.25 => {
                let parent = rand_distr::Gamma::new(*shape, 1.0 / rate)
                    .expect("gamma parameters validated at construction");
                loop {
                    let x = parent.sample(rng);
                    if s.contains(x) {
                        return x;
                    }
                }
            }
            Kind::Beta { alpha, beta, .. } => rand_distr::Beta::new(*alpha, *beta)
                .expect("beta parameters validated at construction")
                .sample(rng),
            _ => {
                let u: f64 = rng.random();
                self.quantile(u)
            }
        }
    }

    /// The JSON descriptor `{"family", "params", "support"}`.
    pub fn to_json(&self) -> Result<Value> {
        let params = match &self.kind {
            Kind::Uniform => json!({}),
            Kind::Normal { mean, sd } | Kind::TruncatedNormal { mean, sd, .. } => {
                json!({"mean": mean, "variance": sd * sd})
            }
            Kind::TruncatedExponential(e) => json!({"rate": e.rate}),
            Kind::TruncatedGamma { shape, rate, .. } => json!({"shape": shape, "rate": rate}),
            Kind::ContinuousBernoulli { p, .. } => json!({"p": p}),
            Kind::Beta { alpha, beta, .. } => json!({"alpha": alpha, "beta": beta}),
            Kind::Numeric(n) => match n.expr() {
                Some(e) => json!({"expr": e, "normalize": true}),
                None => {
                    return Err(Error::InvalidDistribution(
                        "a numeric pdf built from a closure has no JSON form".into(),
                    ))
                }
            },
        };
        Ok(json!({
            "family": self.family(),
            "params": params,
            "support": serde_json::to_value(self.support)?,
        }))
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::InvalidDistribution("descriptor must be an object".into()))?;
        let family = obj
            .get("family")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::InvalidDistribution("missing `family`".into()))?;
        let empty = Map::new();
        let params = match obj.get("params") {
            None => &empty,
            Some(Value::Object(m)) => m,
            Some(_) => return Err(Error::InvalidDistribution("`params` must be an object".into())),
        };
        let support = match obj.get("support") {
            None => None,
            Some(v) => Some(serde_json::from_value::<Support>(v.clone()).map_err(|e| {
                Error::InvalidDistribution(format!("bad support: {e}"))
            })?),
        };
        let num = |name: &str| -> Result<f64> {
            params
                .get(name)
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::InvalidDistribution(format!("{family}: missing numeric param `{name}`")))
        };
        let need_support = || {
            support.ok_or_else(|| Error::InvalidDistribution(format!("{family}: missing `support`")))
        };
        let fixed_support = |lo: f64, hi: f64| -> Result<()> {
            match support {
                Some(s) if s.lower != lo || s.upper != hi => Err(Error::InvalidDistribution(
                    format!("{family} has support [{lo}, {hi}]"),
                )),
                _ => Ok(()),
            }
        };
        match family {
            "uniform" => {
                let s = need_support()?;
                Self::uniform(s.lower, s.upper)
            }
            "normal" => {
                fixed_support(f64::NEG_INFINITY, f64::INFINITY)?;
                Self::normal(num("mean")?, num("variance")?)
            }
            "truncated_normal" => {
                let s = need_support()?;
                Self::truncated_normal(num("mean")?, num("variance")?, s.lower, s.upper)
            }
            "truncated_exponential" => {
                let s = need_support()?;
                Self::truncated_exponential(num("rate")?, s.lower, s.upper)
            }
            "truncated_gamma" => {
                let s = need_support()?;
                Self::truncated_gamma(num("shape")?, num("rate")?, s.lower, s.upper)
            }
            "continuous_bernoulli" => {
                fixed_support(0.0, 1.0)?;
                Self::continuous_bernoulli(num("p")?)
            }
            "beta" => {
                fixed_support(0.0, 1.0)?;
                Self::beta(num("alpha")?, num("beta")?)
            }
            "numeric" => {
                let s = need_support()?;
                let expr = params
                    .get("expr")
                    .and_then(Value::as_str)
                    .ok_or_else(|| Error::InvalidDistribution("numeric: missing `expr`".into()))?;
                let normalize = params.get("normalize").and_then(Value::as_bool).unwrap_or(false);
                Ok(Self::numeric(NumericPdf::from_expr(expr, s.lower, s.upper, normalize)?))
            }
            other => Err(Error::InvalidDistribution(format!("unknown family `{other}`"))),
        }
    }

    /// Parses a descriptor from JSON text.
    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(text)?)
    }

    /// Short human-readable form, e.g. `truncated_normal(0.5, 1; [-2, 2])`.
    pub fn describe(&self) -> String {
        let s = self.support;
        match &self.kind {
            Kind::Uniform => format!("uniform({}, {})", s.lower, s.upper),
            Kind::Normal { mean, sd } => format!("normal({mean}, {})", sd * sd),
            Kind::TruncatedNormal { mean, sd, .. } => format!(
                "truncated_normal({mean}, {}; [{}, {}])",
                sd * sd,
                s.lower,
                s.upper
            ),
            Kind::TruncatedExponential(e) => {
                format!("truncated_exponential({}; [{}, {}])", e.rate, s.lower, s.upper)
            }
            Kind::TruncatedGamma { shape, rate, .. } => {
                format!("truncated_gamma({shape}, {rate}; [{}, {}])", s.lower, s.upper)
            }
            Kind::ContinuousBernoulli { p, .. } => format!("continuous_bernoulli({p})"),
            Kind::Beta { alpha, beta, .. } => format!("beta({alpha}, {beta})"),
            Kind::Numeric(n) => format!(
                "numeric({}; [{}, {}])",
                n.expr().unwrap_or("<closure>"),
                s.lower,
                s.upper
            ),
        }
    }
}

impl Serialize for ReferenceDistribution {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json()
            .map_err(serde::ser::Error::custom)?
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ReferenceDistribution {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        ReferenceDistribution::from_json(&v).map_err(serde::de::Error::custom)
    }
}

fn uniform_moments(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            let k1 = k as i32 + 1;
            if a == -b {
                // symmetric interval: odd moments vanish exactly
                if k % 2 == 1 {
                    0.0
                } else {
                    b.powi(k as i32) / k1 as f64
                }
            } else {
                (b.powi(k1) - a.powi(k1)) / (k1 as f64 * (b - a))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn quad_moment(d: &ReferenceDistribution, k: usize) -> f64 {
        let (a, b) = d.integration_bounds();
        quadrature::integrate_adaptive(|x| x.powi(k as i32) * d.pdf(x), a, b, 1e-13, 1e-300).unwrap()
    }

    fn families() -> Vec<ReferenceDistribution> {
        vec![
            ReferenceDistribution::uniform(0.0, 3.0).unwrap(),
            ReferenceDistribution::uniform(-2.0, 5.0).unwrap(),
            ReferenceDistribution::normal(0.3, 2.0).unwrap(),
            ReferenceDistribution::truncated_normal(0.71721, 0.61614, -2.0, 2.0).unwrap(),
            ReferenceDistribution::truncated_normal(1.99556, 0.98667, -4.0, 5.0).unwrap(),
            ReferenceDistribution::truncated_normal(0.0, 100.0, -98.0, 102.0).unwrap(),
            ReferenceDistribution::truncated_exponential(2.0 / 3.0, 0.0, 4.0).unwrap(),
            ReferenceDistribution::truncated_exponential(1.0, 0.0, 1.0).unwrap(),
            ReferenceDistribution::truncated_gamma(2.0, 0.5, 0.0, 5.0).unwrap(),
            ReferenceDistribution::continuous_bernoulli(0.3).unwrap(),
            ReferenceDistribution::continuous_bernoulli(0.8).unwrap(),
            ReferenceDistribution::beta(1.0, 3.0).unwrap(),
            ReferenceDistribution::beta(2.5, 1.5).unwrap(),
        ]
    }

    #[test]
    fn uniform_basics() {
        let u = ReferenceDistribution::uniform(0.0, 4.0).unwrap();
        assert_eq!(u.pdf(1.0), 0.25);
        assert_eq!(u.pdf(5.0), 0.0);
        assert_eq!(ReferenceDistribution::uniform(0.0, 3.0).unwrap().raw_moment(1).unwrap(), 1.5);
        assert_eq!(ReferenceDistribution::uniform(0.0, 1.0).unwrap().cdf(0.3), 0.3);
    }

    #[test]
    fn normal_kurtosis() {
        let n = ReferenceDistribution::normal(0.0, 1.0).unwrap();
        assert_eq!(n.raw_moment(4).unwrap(), 3.0);
    }

    #[test]
    fn truncated_normal_pdf_at_zero() {
        let (mu, var) = (0.71721f64, 0.61614f64);
        let d = ReferenceDistribution::truncated_normal(mu, var, -2.0, 2.0).unwrap();
        let sd = var.sqrt();
        let parent = |x: f64| (-(x - mu).powi(2) / (2.0 * var)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
        let z = quadrature::integrate(parent, -2.0, 2.0).unwrap();
        assert_relative_eq!(d.pdf(0.0), parent(0.0) / z, max_relative = 1e-10);
        let z_cdf = std_normal_cdf((2.0 - mu) / sd) - std_normal_cdf((-2.0 - mu) / sd);
        assert_relative_eq!(z, z_cdf, max_relative = 1e-10);
    }

    #[test]
    fn raw_moments_match_quadrature() {
        for d in families() {
            let m = d.raw_moments(12).unwrap();
            for (k, mk) in m.iter().enumerate() {
                let q = quad_moment(&d, k);
                let (a, b) = d.integration_bounds();
                let size = quadrature::integrate(|x| x.abs().powi(k as i32) * d.pdf(x), a, b).unwrap();
                assert!(
                    (mk - q).abs() <= 1e-8 * size,
                    "{d:?} k={k}: closed {mk} vs quad {q}"
                );
            }
        }
    }

    #[test]
    fn pdfs_integrate_to_one() {
        for d in families() {
            let (a, b) = d.integration_bounds();
            let v = quadrature::integrate(|x| d.pdf(x), a, b).unwrap();
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn affine_moments_agree_with_binomial_route() {
        for d in families() {
            let (mean, var) = (d.mean(), d.variance());
            let direct = d.affine_moments(8, mean, var.sqrt()).unwrap();
            let via_raw = affine_moments(&d.raw_moments(8).unwrap(), mean, var.sqrt());
            for k in 0..=8 {
                assert_abs_diff_eq!(direct[k], via_raw[k], epsilon = 1e-7 * direct[k].abs().max(1.0));
            }
            assert_abs_diff_eq!(direct[1], 0.0, epsilon = 1e-9);
            assert_abs_diff_eq!(direct[2], 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn cdf_monotone_with_edges() {
        for d in families() {
            let (a, b) = d.integration_bounds();
            let mut prev = 0.0;
            for i in 0..=200 {
                let x = a + (b - a) * i as f64 / 200.0;
                let c = d.cdf(x);
                assert!(c >= prev - 1e-15, "{d:?} not monotone at {x}");
                prev = c;
            }
            assert!(d.cdf(b) > 1.0 - 1e-12);
            if d.support().is_bounded() {
                assert_eq!(d.cdf(a), 0.0);
                assert_eq!(d.cdf(b), 1.0);
            }
        }
    }

    #[test]
    fn cdf_matches_integrated_pdf() {
        for d in families() {
            let (a, b) = d.integration_bounds();
            let x = a + 0.37 * (b - a);
            let q = quadrature::integrate(|s| d.pdf(s), a, x).unwrap();
            assert_abs_diff_eq!(d.cdf(x), q, epsilon = 1e-9);
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for d in families() {
            for u in [0.01, 0.2, 0.5, 0.9, 0.999] {
                let x = d.quantile(u);
                assert_abs_diff_eq!(d.cdf(x), u, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn continuous_bernoulli_half_is_uniform() {
        let cb = ReferenceDistribution::continuous_bernoulli(0.5).unwrap();
        for x in [0.0, 0.1, 0.5, 0.77, 1.0] {
            assert_eq!(cb.cdf(x), x);
            assert_eq!(cb.pdf(x), 1.0);
        }
        let m = cb.raw_moments(4).unwrap();
        assert_eq!(m, vec![1.0, 0.5, 1.0 / 3.0, 0.25, 0.2]);
    }

    #[test]
    fn continuous_bernoulli_normalizer() {
        let p = 0.3f64;
        let cb = ReferenceDistribution::continuous_bernoulli(p).unwrap();
        let c = 2.0 * (1.0 - 2.0 * p).atanh() / (1.0 - 2.0 * p);
        for x in [0.0, 0.25, 0.9] {
            assert_relative_eq!(cb.pdf(x), c * p.powf(x) * (1.0 - p).powf(1.0 - x), max_relative = 1e-12);
        }
    }

    #[test]
    fn truncated_exponential_sample_mean() {
        let d = ReferenceDistribution::truncated_exponential(2.0 / 3.0, 0.0, 4.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let mean = (0..n).map(|_| d.sample(&mut rng)).sum::<f64>() / n as f64;
        let sd = d.variance().sqrt();
        assert!((mean - d.raw_moment(1).unwrap()).abs() < 4.0 * sd / (n as f64).sqrt());
    }

    #[test]
    fn probability_integral_transform_is_uniform() {
        use crate::gof::ks_two_sample;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let reference: Vec<f64> = (0..10_000).map(|i| (i as f64 + 0.5) / 10_000.0).collect();
        for d in families() {
            let draws: Vec<f64> = (0..10_000).map(|_| d.cdf(d.sample(&mut rng))).collect();
            let rep = ks_two_sample(&draws, &reference).unwrap();
            let crit = crate::gof::ks_threshold(0.01, draws.len(), reference.len());
            assert!(rep.statistic < crit, "{d:?}: D = {}", rep.statistic);
        }
    }

    #[test]
    fn json_round_trip() {
        for d in families() {
            let v = d.to_json().unwrap();
            let back = ReferenceDistribution::from_json(&v).unwrap();
            assert_eq!(back.describe(), d.describe());
            assert_eq!(back.raw_moments(5).unwrap(), d.raw_moments(5).unwrap());
        }
        let n = ReferenceDistribution::normal(0.0, 1.0).unwrap();
        let text = serde_json::to_string(&n).unwrap();
        assert!(text.contains("\"-inf\"") && text.contains("\"inf\""), "{text}");
    }

    #[test]
    fn json_rejects_bad_descriptors() {
        for bad in [
            r#"{"family":"uniform"}"#,
            r#"{"family":"uniform","support":[1, 0]}"#,
            r#"{"family":"normal","params":{"mean":0}}"#,
            r#"{"family":"beta","params":{"alpha":1,"beta":3},"support":[0,2]}"#,
            r#"{"family":"cauchy","params":{}}"#,
            r#"{"family":"normal","params":{"mean":0,"variance":-1}}"#,
        ] {
            assert!(ReferenceDistribution::from_json_str(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn numeric_pdf_from_expression() {
        let d = ReferenceDistribution::from_json_str(
            r#"{"family":"numeric","params":{"expr":"2*x","normalize":false},"support":[0,1]}"#,
        );
        // 2x vanishes only at the endpoint, so it is accepted
        let d = d.unwrap();
        assert_relative_eq!(d.raw_moment(1).unwrap(), 2.0 / 3.0, max_relative = 1e-10);
        assert_relative_eq!(d.raw_moment(2).unwrap(), 0.5, max_relative = 1e-10);
        assert_abs_diff_eq!(d.cdf(0.5), 0.25, epsilon = 1e-10);
        assert_abs_diff_eq!(d.quantile(0.25), 0.5, epsilon = 1e-9);
        let round = ReferenceDistribution::from_json(&d.to_json().unwrap()).unwrap();
        assert_relative_eq!(round.pdf(0.3), d.pdf(0.3), max_relative = 1e-12);
    }

    #[test]
    fn numeric_pdf_validation() {
        assert!(NumericPdf::new(|x| x, 0.0, 1.0, false).is_err()); // integrates to 1/2
        assert!(NumericPdf::new(|x| x, 0.0, 1.0, true).is_ok());
        assert!(NumericPdf::new(|x| x - 0.5, 0.0, 1.0, true).is_err()); // negative part
        assert!(NumericPdf::new(|_| 1.0, 0.0, f64::INFINITY, true).is_err());
    }
}
