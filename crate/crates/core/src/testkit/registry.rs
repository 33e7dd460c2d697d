//! Continuous reference distributions for the null hypothesis.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::distr::Open01;
use rand::Rng;
use statrs::distribution::{ContinuousCDF, LogNormal, Normal};

use crate::error::{Error, Result};

/// A named continuous distribution with cdf, generalized inverse cdf and
/// an inverse-cdf sampler.
#[derive(Debug, Clone)]
pub struct DistributionSpec {
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    Uniform { a: f64, b: f64 },
    Normal { mu: f64, sigma: f64, inner: Normal },
    Exponential { rate: f64 },
    LogNormal { mu: f64, sigma: f64, inner: LogNormal },
    Empirical(Arc<EmpiricalTable>),
}

impl DistributionSpec {
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::param(format!("uniform needs a < b, got a={a}, b={b}")));
        }
        Ok(DistributionSpec {
            kind: Kind::Uniform { a, b },
        })
    }

    pub fn standard_uniform() -> Self {
        DistributionSpec::uniform(0.0, 1.0).expect("valid parameters")
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        check_location_scale("normal", mu, sigma)?;
        let inner = Normal::new(mu, sigma).map_err(|e| Error::param(e.to_string()))?;
        Ok(DistributionSpec {
            kind: Kind::Normal { mu, sigma, inner },
        })
    }

    pub fn standard_normal() -> Self {
        DistributionSpec::normal(0.0, 1.0).expect("valid parameters")
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::param(format!("exponential needs rate > 0, got {rate}")));
        }
        Ok(DistributionSpec {
            kind: Kind::Exponential { rate },
        })
    }

    pub fn lognormal(mu: f64, sigma: f64) -> Result<Self> {
        check_location_scale("lognormal", mu, sigma)?;
        let inner = LogNormal::new(mu, sigma).map_err(|e| Error::param(e.to_string()))?;
        Ok(DistributionSpec {
            kind: Kind::LogNormal { mu, sigma, inner },
        })
    }

    pub fn empirical(table: EmpiricalTable) -> Self {
        DistributionSpec {
            kind: Kind::Empirical(Arc::new(table)),
        }
    }

    pub fn empirical_file(path: impl AsRef<Path>) -> Result<Self> {
        EmpiricalTable::from_file(path).map(DistributionSpec::empirical)
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            Kind::Uniform { .. } => "uniform",
            Kind::Normal { .. } => "normal",
            Kind::Exponential { .. } => "exponential",
            Kind::LogNormal { .. } => "lognormal",
            Kind::Empirical(_) => "empirical",
        }
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match &self.kind {
            Kind::Uniform { a, b } => vec![("a", *a), ("b", *b)],
            Kind::Normal { mu, sigma, .. } | Kind::LogNormal { mu, sigma, .. } => {
                vec![("mu", *mu), ("sigma", *sigma)]
            }
            Kind::Exponential { rate } => vec![("rate", *rate)],
            Kind::Empirical(_) => vec![],
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match &self.kind {
            Kind::Uniform { a, b } => ((x - a) / (b - a)).clamp(0.0, 1.0),
            Kind::Normal { inner, .. } => inner.cdf(x),
            Kind::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Kind::LogNormal { inner, .. } => inner.cdf(x),
            Kind::Empirical(t) => t.cdf(x),
        }
    }

    /// Generalized inverse `inf { x : cdf(x) >= u }` for `u` in `[0, 1]`.
    pub fn inv_cdf(&self, u: f64) -> f64 {
        match &self.kind {
            Kind::Uniform { a, b } => a + u * (b - a),
            Kind::Normal { inner, .. } => match u {
                u if u <= 0.0 => f64::NEG_INFINITY,
                u if u >= 1.0 => f64::INFINITY,
                u => inner.inverse_cdf(u),
            },
            Kind::Exponential { rate } => {
                if u >= 1.0 {
                    f64::INFINITY
                } else {
                    -(-u).ln_1p() / rate
                }
            }
            Kind::LogNormal { inner, .. } => match u {
                u if u <= 0.0 => 0.0,
                u if u >= 1.0 => f64::INFINITY,
                u => inner.inverse_cdf(u),
            },
            Kind::Empirical(t) => t.inv_cdf(u),
        }
    }

    /// Draw one value by inverting an open-interval uniform variate.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        self.inv_cdf(u)
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Kind::Empirical(t) = &self.kind {
            return match &t.source {
                Some(p) => write!(f, "empirical({})", p.display()),
                None => write!(f, "empirical"),
            };
        }
        let params: Vec<String> = self.params().iter().map(|(_, v)| v.to_string()).collect();
        write!(f, "{}({})", self.name(), params.join(","))
    }
}

fn check_location_scale(name: &str, mu: f64, sigma: f64) -> Result<()> {
    if !mu.is_finite() || !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::param(format!(
            "{name} needs finite mu and sigma > 0, got mu={mu}, sigma={sigma}"
        )));
    }
    Ok(())
}

/// Look up a distribution by name with named parameters. Parameters left
/// out take the standard values (`uniform(0,1)`, `normal(0,1)`,
/// `exponential(1)`, `lognormal(0,1)`).
pub fn registry_lookup(name: &str, params: &[(&str, f64)]) -> Result<DistributionSpec> {
    let names: &[&str] = match name {
        "uniform" => &["a", "b"],
        "normal" | "lognormal" => &["mu", "sigma"],
        "exponential" => &["rate"],
        other => return Err(Error::UnknownDistribution(other.to_string())),
    };
    for (key, _) in params {
        if !names.contains(key) && !(name == "exponential" && *key == "lambda") {
            return Err(Error::param(format!("unknown parameter `{key}` for {name}")));
        }
    }
    let get = |key: &str, default: f64| {
        params
            .iter()
            .rev()
            .find(|(k, _)| *k == key || (key == "rate" && *k == "lambda"))
            .map_or(default, |(_, v)| *v)
    };
    match name {
        "uniform" => DistributionSpec::uniform(get("a", 0.0), get("b", 1.0)),
        "normal" => DistributionSpec::normal(get("mu", 0.0), get("sigma", 1.0)),
        "lognormal" => DistributionSpec::lognormal(get("mu", 0.0), get("sigma", 1.0)),
        _ => DistributionSpec::exponential(get("rate", 1.0)),
    }
}

/// Parse textual specs such as `normal(0,1)`, `uniform(a=-1,b=1)`,
/// `exponential` or `empirical(path/to/table.csv)`.
pub fn parse_distribution(spec: &str) -> Result<DistributionSpec> {
    let spec = spec.trim();
    let (name, args) = match spec.find('(') {
        Some(open) => {
            let close = spec
                .strip_suffix(')')
                .ok_or_else(|| Error::param(format!("unbalanced parentheses in `{spec}`")))?;
            (spec[..open].trim(), &close[open + 1..])
        }
        None => (spec, ""),
    };
    let name = name.to_ascii_lowercase();
    if name == "empirical" || name == "empirical-table" {
        if args.trim().is_empty() {
            return Err(Error::param("empirical distribution needs a table path"));
        }
        return DistributionSpec::empirical_file(args.trim());
    }
    let positional: &[&str] = match name.as_str() {
        "uniform" => &["a", "b"],
        "normal" | "lognormal" => &["mu", "sigma"],
        "exponential" => &["rate"],
        _ => return Err(Error::UnknownDistribution(name)),
    };
    let mut params = Vec::new();
    for (i, raw) in args.split(',').map(str::trim).filter(|s| !s.is_empty()).enumerate() {
        let (key, value) = match raw.split_once('=') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => {
                let key = positional.get(i).ok_or_else(|| {
                    Error::param(format!("too many parameters for {name}: `{spec}`"))
                })?;
                (*key, raw)
            }
        };
        let value: f64 = value
            .parse()
            .map_err(|_| Error::param(format!("parameter `{key}` is not a number: `{value}`")))?;
        params.push((key, value));
    }
    registry_lookup(&name, &params)
}

/// A continuous cdf given by linear interpolation through tabulated
/// `(x, F(x))` points, with `F = 0` at the first point and `F = 1` at
/// the last.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalTable {
    xs: Vec<f64>,
    ps: Vec<f64>,
    source: Option<PathBuf>,
}

impl EmpiricalTable {
    pub fn new(xs: Vec<f64>, ps: Vec<f64>) -> Result<Self> {
        if xs.len() != ps.len() || xs.len() < 2 {
            return Err(Error::param("empirical table needs at least two (x, cdf) points"));
        }
        if xs.iter().chain(&ps).any(|v| !v.is_finite()) {
            return Err(Error::param("empirical table values must be finite"));
        }
        if !xs.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::param("empirical table locations must be strictly increasing"));
        }
        if !ps.windows(2).all(|w| w[0] <= w[1]) {
            return Err(Error::param("empirical table cdf values must be nondecreasing"));
        }
        if ps[0] != 0.0 || ps[ps.len() - 1] != 1.0 {
            return Err(Error::param("empirical table cdf must run from 0 to 1"));
        }
        Ok(EmpiricalTable {
            xs,
            ps,
            source: None,
        })
    }

    /// Read a two-column CSV (`x,cdf`), with an optional header row.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| csv_error(path, e))?;
        let (mut xs, mut ps) = (Vec::new(), Vec::new());
        for (row, record) in reader.records().enumerate() {
            let record = record.map_err(|e| csv_error(path, e))?;
            let line = record.position().map_or(row + 1, |p| p.line() as usize);
            let parse = |i: usize| record.get(i).and_then(|s| s.parse::<f64>().ok());
            match (parse(0), parse(1)) {
                (Some(x), Some(p)) => {
                    xs.push(x);
                    ps.push(p);
                }
                _ if row == 0 => continue,
                _ => {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line,
                        message: "expected two numeric columns `x,cdf`".into(),
                    })
                }
            }
        }
        let mut table = EmpiricalTable::new(xs, ps)?;
        table.source = Some(path.to_path_buf());
        Ok(table)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let j = self.xs.partition_point(|&v| v <= x);
        if j == 0 {
            return 0.0;
        }
        if j == self.xs.len() {
            return 1.0;
        }
        let (x0, x1) = (self.xs[j - 1], self.xs[j]);
        let (p0, p1) = (self.ps[j - 1], self.ps[j]);
        p0 + (p1 - p0) * (x - x0) / (x1 - x0)
    }

    pub fn inv_cdf(&self, u: f64) -> f64 {
        let j = self.ps.partition_point(|&p| p < u);
        if j == 0 {
            return self.xs[0];
        }
        if j == self.ps.len() {
            return self.xs[self.xs.len() - 1];
        }
        let (x0, x1) = (self.xs[j - 1], self.xs[j]);
        let (p0, p1) = (self.ps[j - 1], self.ps[j]);
        x0 + (u - p0) / (p1 - p0) * (x1 - x0)
    }
}

fn csv_error(path: &Path, err: csv::Error) -> Error {
    let line = err.position().map_or(0, |p| p.line() as usize);
    match err.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::Parse {
            path: path.to_path_buf(),
            line,
            message: format!("{other:?}"),
        },
    }
}
