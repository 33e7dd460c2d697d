//! The generalized Kolmogorov distribution `D^beta`.
//!
//! `D^beta` is the larger of the sup-norms of two generalized Brownian
//! bridges that are independent given a shared standard normal `Z`:
//! `W1 ~ BB((1-b)/b, sqrt((1-b)/b) Z)` and `W2 ~ BB(b, sqrt(b(1-b)) Z)`.
//! Its cdf is a one-dimensional integral over `z` of a product of bridge
//! confinement probabilities [`psi`], evaluated here with a fixed-order
//! Gauss–Legendre rule. At `beta = 1` it is the Kolmogorov distribution.

mod quadrature;
mod table;

use std::f64::consts::PI;
use std::sync::Arc;

pub use quadrature::GaussLegendre;
pub(crate) use table::write_atomic;
pub use table::{tabulate, QuantileRow, QuantileTable, TableCache, CACHE_DIR_ENV};

use crate::error::{Error, Result};

const MAX_SERIES_TERMS: usize = 1_000_000;

/// Numeric knobs for evaluating `D^beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GkConfig {
    pub series_tol: f64,
    pub quad_nodes: usize,
    /// Sorting levels above this use the Kolmogorov series directly.
    pub beta_one_threshold: f64,
}

impl Default for GkConfig {
    fn default() -> Self {
        GkConfig {
            series_tol: 1e-12,
            quad_nodes: 256,
            beta_one_threshold: 1.0 - 1e-9,
        }
    }
}

/// Law of a Brownian motion on `[0, T]` pinned to end at `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeLaw {
    horizon: f64,
    terminal: f64,
}

impl BridgeLaw {
    pub fn new(horizon: f64, terminal: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) || !terminal.is_finite() {
            return Err(Error::param(format!(
                "bridge needs a finite horizon T > 0 and finite end point, got T={horizon}, a={terminal}"
            )));
        }
        Ok(BridgeLaw { horizon, terminal })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn terminal(&self) -> f64 {
        self.terminal
    }

    /// `P(sup |W| <= x)` for `W` with this law.
    pub fn confinement(&self, x: f64) -> Result<f64> {
        psi(x, self.horizon, self.terminal)
    }
}

/// `P(sup_{[0,T]} |W| <= x)` for `W ~ BB(T, a)`:
/// `sum_k (-1)^k exp(-2kx(kx - a)/T)` when `x > |a|`, else 0.
pub fn psi(x: f64, t: f64, a: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::param(format!("bridge horizon must be positive, got {t}")));
    }
    if !(x >= 0.0) {
        return Err(Error::param(format!("bound must be nonnegative, got {x}")));
    }
    Ok(psi_unchecked(x, t, a, GkConfig::default().series_tol))
}

pub(crate) fn psi_unchecked(x: f64, t: f64, a: f64, tol: f64) -> f64 {
    if x <= a.abs() {
        return 0.0;
    }
    let value = if x * x >= t {
        image_series(x, t, a, tol, MAX_SERIES_TERMS).0
    } else {
        spectral_series(x, t, a, tol)
    };
    value.clamp(0.0, 1.0)
}

/// Alternating image series, summed symmetrically in `k` until the
/// magnitude bound `exp(-2kx(kx - |a|)/T)` falls below `tol` (or the
/// budget of `max_k` is reached). Returns the sum and the last `k` used.
pub(crate) fn image_series(x: f64, t: f64, a: f64, tol: f64, max_k: usize) -> (f64, usize) {
    let mut sum = 1.0;
    let mut k = 0;
    while k < max_k {
        k += 1;
        let kx = k as f64 * x;
        let plus = (-2.0 * kx * (kx - a) / t).exp();
        let minus = (-2.0 * kx * (kx + a) / t).exp();
        let pair = plus + minus;
        if k % 2 == 1 {
            sum -= pair;
        } else {
            sum += pair;
        }
        if plus.max(minus) < tol {
            break;
        }
    }
    (sum, k)
}

/// Eigenfunction expansion of the killed heat kernel on `(-x, x)`, divided
/// by the free Gaussian density at `a`. Converges fast when `x^2 < T`,
/// which is where the image series needs many terms.
fn spectral_series(x: f64, t: f64, a: f64, tol: f64) -> f64 {
    let decay = PI * PI * t / (8.0 * x * x);
    let phase = PI * (a + x) / (2.0 * x);
    let mut sum = 0.0;
    let mut j = 0usize;
    loop {
        let m = (2 * j + 1) as f64;
        let weight = (-m * m * decay).exp();
        let sign = if j.is_multiple_of(2) { 1.0 } else { -1.0 };
        sum += sign * weight * (m * phase).sin();
        j += 1;
        if weight < tol * 1e-3 || j >= MAX_SERIES_TERMS {
            break;
        }
    }
    (2.0 * PI * t).sqrt() / x * (a * a / (2.0 * t)).exp() * sum
}

/// Kolmogorov cdf `1 - 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2)`; below
/// `x = 1` the equivalent theta-function form is summed instead.
pub fn kolmogorov_cdf(x: f64) -> f64 {
    kolmogorov_cdf_with_tol(x, GkConfig::default().series_tol)
}

pub fn kolmogorov_cdf_with_tol(x: f64, tol: f64) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    if x == f64::INFINITY {
        return 1.0;
    }
    let mut sum = 0.0;
    if x < 1.0 {
        let c = PI * PI / (8.0 * x * x);
        for k in 1..=MAX_SERIES_TERMS {
            let m = (2 * k - 1) as f64;
            let term = (-m * m * c).exp();
            sum += term;
            if term < tol * sum.max(f64::MIN_POSITIVE) || term == 0.0 {
                break;
            }
        }
        return ((2.0 * PI).sqrt() / x * sum).clamp(0.0, 1.0);
    }
    for k in 1..=MAX_SERIES_TERMS {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        if k % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
        if term < tol {
            break;
        }
    }
    (1.0 - 2.0 * sum).clamp(0.0, 1.0)
}

fn std_normal_pdf(z: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// The generalized Kolmogorov distribution at one sorting level.
#[derive(Debug, Clone)]
pub struct GkDist {
    beta: f64,
    config: GkConfig,
    rule: Arc<GaussLegendre>,
}

impl GkDist {
    pub fn new(beta: f64) -> Result<Self> {
        GkDist::with_config(beta, GkConfig::default())
    }

    pub fn with_config(beta: f64, config: GkConfig) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::param(format!("sorting level must lie in (0, 1], got {beta}")));
        }
        if !(config.series_tol > 0.0) || config.quad_nodes == 0 {
            return Err(Error::param("series_tol must be positive and quad_nodes nonzero"));
        }
        Ok(GkDist {
            beta,
            config,
            rule: Arc::new(GaussLegendre::new(config.quad_nodes)),
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn config(&self) -> GkConfig {
        self.config
    }

    /// True when evaluation goes through the plain Kolmogorov series.
    pub fn is_kolmogorov(&self) -> bool {
        self.beta > self.config.beta_one_threshold
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::param(format!("cdf argument must be nonnegative, got {x}")));
        }
        Ok(self.cdf_unchecked(x))
    }

    fn cdf_unchecked(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        if self.is_kolmogorov() {
            return kolmogorov_cdf_with_tol(x, self.config.series_tol);
        }
        if x.is_infinite() {
            return 1.0;
        }
        let upper = (self.beta / (1.0 - self.beta)).sqrt() * x;
        let v = 2.0 * self.rule.integrate(0.0, upper, |z| self.integrand(x, z));
        v.clamp(0.0, 1.0)
    }

    /// `Psi(x; T1, a1(z)) Psi(x; T2, a2(z)) phi(z)` at one node.
    pub fn integrand(&self, x: f64, z: f64) -> f64 {
        let b = self.beta;
        let t1 = (1.0 - b) / b;
        let t2 = b;
        let tol = self.config.series_tol;
        let w1 = psi_unchecked(x, t1, t1.sqrt() * z, tol);
        if w1 == 0.0 {
            return 0.0;
        }
        let w2 = psi_unchecked(x, t2, (b * (1.0 - b)).sqrt() * z, tol);
        w1 * w2 * std_normal_pdf(z)
    }

    /// Asymptotic p-value `P(D^beta > stat)`.
    pub fn pvalue(&self, stat: f64) -> Result<f64> {
        if !(stat >= 0.0) {
            return Err(Error::param(format!("statistic must be nonnegative, got {stat}")));
        }
        Ok(1.0 - self.cdf_unchecked(stat))
    }

    /// Solve `cdf(x) = p` by bisection on a bracket that
    /// starts at `[0, 10]` and doubles its upper end until it covers `p`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::param(format!("probability must lie in (0, 1), got {p}")));
        }
        let mut lo = 0.0;
        let mut hi = 10.0;
        while self.cdf_unchecked(hi) < p {
            lo = hi;
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::param(format!(
                    "quantile {p} not bracketed below {hi} at beta={}",
                    self.beta
                )));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let f = self.cdf_unchecked(mid);
            if (f - p).abs() <= 1e-12 || hi - lo <= 1e-14 * hi {
                return Ok(mid);
            }
            if f < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}
