//! Monte Carlo experiments: null-distribution convergence, the limiting
//! covariance, the bridge-simulation oracle for `D^beta`, and two power
//! studies (hidden-column sorting and service-time dependent scheduling).

mod bridge;
mod exec;
mod power;
mod queue;

pub use bridge::{
    bridge_oracle, bridge_oracle_with, bridge_path, conditional_bridge_covariance, simulate_bridge, SupMethod,
};
pub use exec::{map_reps, rep_rng, sub_seed, Execution};
pub use power::{
    example1_hidden_sort, example2_queue, hidden_sort_sample, power_csv, queue_sample, write_power_csv, PowerResult, PowerRow, TestKind, EXAMPLE1, EXAMPLE2,
};
pub use queue::{simulate_queue, Pick, QueueConfig, QueueRun};

use crate::error::{Error, Result};
use crate::gkdist::GkDist;
use crate::psort::{frontier_position, SortLevel};
use crate::testkit::{bubble_statistic, DistributionSpec};

/// Shared Monte Carlo parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub beta_grid: Vec<f64>,
    pub reps: usize,
    pub alpha: f64,
    pub base_seed: u64,
    /// 1 = sequential, 0 = all available threads.
    pub workers: usize,
}

impl SimConfig {
    pub fn new(n: usize, beta_grid: Vec<f64>, reps: usize) -> Self {
        SimConfig {
            n,
            beta_grid,
            reps,
            alpha: 0.1,
            base_seed: 0,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::param("sample size must be positive"));
        }
        if self.reps == 0 {
            return Err(Error::param("need at least one replication"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::param(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        for &b in &self.beta_grid {
            SortLevel::new(b)?;
        }
        Ok(())
    }

    pub fn execution(&self) -> Execution {
        Execution::from_workers(self.workers)
    }
}

/// Empirical cdf of a set of draws.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        EmpiricalCdf { sorted: values }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    /// Exact `sup |F_m - G|` against a continuous cdf `G`.
    pub fn sup_distance(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let m = self.sorted.len() as f64;
        let mut sup: f64 = 0.0;
        let mut i = 0;
        while i < self.sorted.len() {
            let x = self.sorted[i];
            let mut j = i + 1;
            while j < self.sorted.len() && self.sorted[j] == x {
                j += 1;
            }
            let g = cdf(x);
            sup = sup.max((j as f64 / m - g).abs()).max((g - i as f64 / m).abs());
            i = j;
        }
        sup
    }
}

/// Simulated null law of the bubble sort statistic at one sorting level.
#[derive(Debug, Clone)]
pub struct NullDistribution {
    pub beta: f64,
    pub statistics: EmpiricalCdf,
    /// `sup |F_reps - P(D^beta <= .)|`.
    pub sup_distance: f64,
    /// Fraction of replications with asymptotic p-value below alpha.
    pub reject_rate: f64,
}

/// Draw `reps` iid samples of size `n` from `f0` and collect the bubble
/// sort statistic for every sorting level on the grid.
pub fn null_statistic_distribution(cfg: &SimConfig, f0: &DistributionSpec) -> Result<Vec<NullDistribution>> {
    cfg.validate()?;
    let dists: Vec<GkDist> = cfg.beta_grid.iter().map(|&b| GkDist::new(b)).collect::<Result<_>>()?;
    let levels: Vec<SortLevel> = cfg.beta_grid.iter().map(|&b| SortLevel::new(b)).collect::<Result<_>>()?;
    let alpha = cfg.alpha;
    let per_rep = map_reps(cfg.execution(), cfg.reps, |rep| {
        let mut rng = rep_rng(cfg.base_seed, rep as u64);
        let data: Vec<f64> = (0..cfg.n).map(|_| f0.sample(&mut rng)).collect();
        levels
            .iter()
            .zip(&dists)
            .map(|(&level, dist)| {
                let stat = bubble_statistic(&data, f0, level);
                let p = dist.pvalue(stat).expect("statistic is nonnegative");
                (stat, p < alpha)
            })
            .collect::<Vec<_>>()
    });
    let out = dists
        .iter()
        .enumerate()
        .map(|(j, dist)| {
            let stats: Vec<f64> = per_rep.iter().map(|r| r[j].0).collect();
            let rejections = per_rep.iter().filter(|r| r[j].1).count();
            let statistics = EmpiricalCdf::new(stats);
            let sup_distance = statistics.sup_distance(|x| dist.cdf(x).expect("x >= 0"));
            NullDistribution {
                beta: dist.beta(),
                statistics,
                sup_distance,
                reject_rate: rejections as f64 / cfg.reps as f64,
            }
        })
        .collect();
    Ok(out)
}

/// Covariance of the limiting fluctuation process `Y` at `x <= y`, with the
/// regimes split at the breakpoint `x* = F0^{-1}(1 - beta)`.
pub fn limit_covariance(f0: &DistributionSpec, beta: f64, x: f64, y: f64) -> f64 {
    let (x, y) = if x <= y { (x, y) } else { (y, x) };
    let xstar = f0.inv_cdf(1.0 - beta);
    let (fx, fy) = (f0.cdf(x), f0.cdf(y));
    if x >= xstar {
        fx * (1.0 - fy)
    } else if y < xstar {
        beta * fx / ((1.0 - fx) * (1.0 - fx))
    } else {
        beta * fx * (1.0 - fy) / ((1.0 - fx) * (1.0 - fx))
    }
}

/// Monte Carlo covariance next to its limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovariancePair {
    pub x: f64,
    pub y: f64,
    pub empirical: f64,
    pub theoretical: f64,
}

impl CovariancePair {
    pub fn relative_error(&self) -> f64 {
        ((self.empirical - self.theoretical) / self.theoretical).abs()
    }
}

/// Estimate `cov(sqrt(n)(B_n(x) - B0(x)), sqrt(n)(B_n(y) - B0(y)))` for all
/// pairs of `points`, returned row-major.
pub fn covariance_check(
    n: usize,
    beta: f64,
    f0: &DistributionSpec,
    points: &[f64],
    reps: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<CovariancePair>> {
    let level = SortLevel::new(beta)?;
    if n == 0 || reps < 2 {
        return Err(Error::param("covariance check needs n >= 1 and reps >= 2"));
    }
    let k = level.iterations(n);
    let nf = n as f64;
    let centers: Vec<f64> = points
        .iter()
        .map(|&x| crate::curves::bubble_value(f0.cdf(x), beta))
        .collect();
    let draws = map_reps(exec, reps, |rep| {
        let mut rng = rep_rng(seed, rep as u64);
        let data: Vec<f64> = (0..n).map(|_| f0.sample(&mut rng)).collect();
        points
            .iter()
            .zip(&centers)
            .map(|(&x, &b0)| {
                let bn = (frontier_position(&data, x, k) - 1) as f64 / nf;
                nf.sqrt() * (bn - b0)
            })
            .collect::<Vec<f64>>()
    });
    let m = points.len();
    let r = reps as f64;
    let means: Vec<f64> = (0..m).map(|i| draws.iter().map(|d| d[i]).sum::<f64>() / r).collect();
    let mut out = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in 0..m {
            let cov = draws
                .iter()
                .map(|d| (d[i] - means[i]) * (d[j] - means[j]))
                .sum::<f64>()
                / (r - 1.0);
            out.push(CovariancePair {
                x: points[i],
                y: points[j],
                empirical: cov,
                theoretical: limit_covariance(f0, beta, points[i], points[j]),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limit_covariance_examples() {
        let u11 = DistributionSpec::uniform(-1.0, 1.0).unwrap();
        assert!((limit_covariance(&u11, 0.25, 0.0, 0.0) - 0.5).abs() < 1e-15);
        assert_eq!(limit_covariance(&u11, 0.25, -1.0, -1.0), 0.0);
        let u = DistributionSpec::standard_uniform();
        assert!((limit_covariance(&u, 0.25, 0.8, 0.9) - 0.08).abs() < 1e-15);
        assert!((limit_covariance(&u, 0.25, 0.9, 0.8) - 0.08).abs() < 1e-15);
        // straddling the breakpoint at 0.75
        assert!((limit_covariance(&u, 0.25, 0.6, 0.8) - 0.25 * 0.6 * 0.2 / 0.16).abs() < 1e-15);
        // beta = 1 is the Brownian bridge covariance
        assert!((limit_covariance(&u, 1.0, 0.3, 0.6) - 0.3 * 0.4).abs() < 1e-15);
    }

    #[test]
    fn empirical_cdf_sup_distance() {
        let e = EmpiricalCdf::new(vec![0.5]);
        assert_eq!(e.sup_distance(|x| x), 0.5);
        let q: Vec<f64> = (1..=10).map(|i| (i as f64 - 0.5) / 10.0).collect();
        assert!((EmpiricalCdf::new(q).sup_distance(|x| x) - 0.05).abs() < 1e-15);
        let e = EmpiricalCdf::new(vec![3.0, 1.0, 2.0]);
        assert_eq!(e.eval(2.0), 2.0 / 3.0);
        assert_eq!(e.values(), [1.0, 2.0, 3.0]);
    }

    #[test]
    fn single_rep_is_degenerate_but_valid() {
        let mut cfg = SimConfig::new(50, vec![0.5], 1);
        cfg.workers = 1;
        let out = null_statistic_distribution(&cfg, &DistributionSpec::standard_uniform()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].statistics.len(), 1);
        assert!(out[0].sup_distance > 0.0 && out[0].sup_distance <= 1.0);
        assert!(out[0].reject_rate == 0.0 || out[0].reject_rate == 1.0);
    }

    #[test]
    fn null_distribution_deterministic_across_workers() {
        let f0 = DistributionSpec::standard_normal();
        let mut cfg = SimConfig::new(100, vec![0.25, 1.0], 64);
        cfg.base_seed = 17;
        cfg.workers = 1;
        let a = null_statistic_distribution(&cfg, &f0).unwrap();
        cfg.workers = 3;
        let b = null_statistic_distribution(&cfg, &f0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.statistics, y.statistics);
            assert_eq!(x.sup_distance, y.sup_distance);
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = SimConfig::new(10, vec![0.5], 10);
        assert!(cfg.validate().is_ok());
        cfg.beta_grid.push(0.0);
        assert!(cfg.validate().is_err());
        let cfg = SimConfig::new(10, vec![0.5], 0);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn small_covariance_run() {
        let u = DistributionSpec::standard_uniform();
        let pairs = covariance_check(2000, 0.25, &u, &[0.5, 0.9], 400, 3, Execution::Sequential).unwrap();
        assert_eq!(pairs.len(), 4);
        assert_eq!(pairs[1].empirical, pairs[2].empirical);
        for p in &pairs {
            assert!(p.relative_error() < 0.5, "{p:?}");
        }
    }
}
