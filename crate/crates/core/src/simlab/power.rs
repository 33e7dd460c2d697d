//! Power studies: data sorted on a hidden correlated column, and job
//! service times observed through a min-or-max scheduler.

use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::exec::{map_reps, rep_rng};
use super::queue::{simulate_queue, Pick, QueueConfig};
use super::SimConfig;
use crate::error::{Error, Result};
use crate::gkdist::{kolmogorov_cdf, GkDist};
use crate::psort::SortLevel;
use crate::testkit::{bubble_statistic, ks_statistic, runs_summary, DistributionSpec};

pub const EXAMPLE1: &str = "example1";
pub const EXAMPLE2: &str = "example2";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestKind {
    Bubble { beta: f64 },
    Ks,
    Ww,
}

/// Rejection rate of one test at one parameter value.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerRow {
    pub test: TestKind,
    pub rejections: usize,
    pub reps: usize,
}

impl PowerRow {
    pub fn reject_rate(&self) -> f64 {
        self.rejections as f64 / self.reps as f64
    }

    /// Binomial standard error of the rate.
    pub fn stderr(&self) -> f64 {
        let p = self.reject_rate();
        (p * (1.0 - p) / self.reps as f64).sqrt()
    }
}

/// All rows of one experiment at one parameter value (rho or sigma).
#[derive(Debug, Clone, PartialEq)]
pub struct PowerResult {
    pub experiment: String,
    pub param: f64,
    pub rows: Vec<PowerRow>,
}

impl PowerResult {
    pub fn bubble(&self, beta: f64) -> Option<&PowerRow> {
        self.rows
            .iter()
            .find(|r| matches!(r.test, TestKind::Bubble { beta: b } if b == beta))
    }

    pub fn ks(&self) -> Option<&PowerRow> {
        self.rows.iter().find(|r| r.test == TestKind::Ks)
    }

    pub fn ww(&self) -> Option<&PowerRow> {
        self.rows.iter().find(|r| r.test == TestKind::Ww)
    }

    pub fn bubble_rows(&self) -> impl Iterator<Item = (f64, &PowerRow)> {
        self.rows.iter().filter_map(|r| match r.test {
            TestKind::Bubble { beta } => Some((beta, r)),
            _ => None,
        })
    }
}

/// Rejection decisions of all tests for one replication, in the order
/// bubble (per beta), KS, WW.
fn decide(data: &[f64], f0: &DistributionSpec, dists: &[GkDist], alpha: f64) -> Vec<bool> {
    let mut out: Vec<bool> = dists
        .iter()
        .map(|d| {
            let level = SortLevel::new(d.beta()).expect("validated");
            let p = d.pvalue(bubble_statistic(data, f0, level)).expect("nonnegative");
            p < alpha
        })
        .collect();
    out.push(1.0 - kolmogorov_cdf(ks_statistic(data, f0)) < alpha);
    // a sample with no spread about its median carries no runs evidence
    out.push(match runs_summary(data) {
        Ok(s) => crate::testkit::two_sided_normal_pvalue(s.z) < alpha,
        Err(_) => false,
    });
    out
}

fn run_power<F>(cfg: &SimConfig, experiment: &str, param: f64, f0: &DistributionSpec, draw: F) -> Result<PowerResult>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> Vec<f64> + Sync + Send,
{
    cfg.validate()?;
    let dists: Vec<GkDist> = cfg.beta_grid.iter().map(|&b| GkDist::new(b)).collect::<Result<_>>()?;
    let decisions = map_reps(cfg.execution(), cfg.reps, |rep| {
        let mut rng = rep_rng(cfg.base_seed, rep as u64);
        let data = draw(&mut rng);
        decide(&data, f0, &dists, cfg.alpha)
    });
    let tests = cfg
        .beta_grid
        .iter()
        .map(|&beta| TestKind::Bubble { beta })
        .chain([TestKind::Ks, TestKind::Ww]);
    let rows = tests
        .enumerate()
        .map(|(j, test)| PowerRow {
            test,
            rejections: decisions.iter().filter(|d| d[j]).count(),
            reps: cfg.reps,
        })
        .collect();
    Ok(PowerResult {
        experiment: experiment.to_string(),
        param,
        rows,
    })
}

/// `n` standard normal values ordered by the magnitude of a hidden
/// partner with correlation `rho`.
pub fn hidden_sort_sample<R: Rng + ?Sized>(n: usize, rho: f64, rng: &mut R) -> Vec<f64> {
    let c = (1.0 - rho * rho).sqrt();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let hidden: f64 = StandardNormal.sample(rng);
            let eps: f64 = StandardNormal.sample(rng);
            (hidden.abs(), rho * hidden + c * eps)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().map(|p| p.1).collect()
}

/// Rejection rates against N(0,1) for data sorted by a hidden column.
pub fn example1_hidden_sort(cfg: &SimConfig, rho: f64) -> Result<PowerResult> {
    if !(rho.abs() < 1.0) {
        return Err(Error::param(format!("rho must satisfy |rho| < 1, got {rho}")));
    }
    let f0 = DistributionSpec::standard_normal();
    let n = cfg.n;
    run_power(cfg, EXAMPLE1, rho, &f0, |rng| hidden_sort_sample(n, rho, rng))
}

/// Service times in departure order for one simulated queue.
pub fn queue_sample<R: Rng + ?Sized>(qcfg: &QueueConfig, rng: &mut R) -> Vec<f64> {
    let n = qcfg.n_jobs;
    let arrivals: Vec<f64> = (0..n)
        .map(|_| {
            let a: f64 = StandardNormal.sample(rng);
            (qcfg.arrival_log_mean + qcfg.sigma * a).exp()
        })
        .collect();
    let services: Vec<f64> = (0..n).map(|_| qcfg.service.sample(rng)).collect();
    let run = simulate_queue(&arrivals, &services, || {
        if rng.random::<bool>() {
            Pick::Shortest
        } else {
            Pick::Longest
        }
    })
    .expect("finite inputs");
    run.services
}

/// Rejection rates against the service distribution for departure-ordered
/// service times. `cfg.n` is ignored in favour of `qcfg.n_jobs`.
pub fn example2_queue(cfg: &SimConfig, qcfg: &QueueConfig) -> Result<PowerResult> {
    qcfg.validate()?;
    let cfg = SimConfig {
        n: qcfg.n_jobs,
        ..cfg.clone()
    };
    run_power(&cfg, EXAMPLE2, qcfg.sigma, &qcfg.service, |rng| queue_sample(qcfg, rng))
}

/// Long-format CSV: `experiment,beta,param,reps,reject_rate,stderr`.
/// Bubble rows carry the experiment name, KS and WW rows append `_ks` and
/// `_ww`; WW rows leave `beta` empty and KS rows report `beta = 1`.
pub fn power_csv(results: &[PowerResult]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["experiment", "beta", "param", "reps", "reject_rate", "stderr"])
        .expect("in-memory write");
    for res in results {
        for row in &res.rows {
            let (name, beta) = match row.test {
                TestKind::Bubble { beta } => (res.experiment.clone(), beta.to_string()),
                TestKind::Ks => (format!("{}_ks", res.experiment), "1".to_string()),
                TestKind::Ww => (format!("{}_ww", res.experiment), String::new()),
            };
            w.write_record([
                name,
                beta,
                res.param.to_string(),
                row.reps.to_string(),
                row.reject_rate().to_string(),
                row.stderr().to_string(),
            ])
            .expect("in-memory write");
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("csv output is utf-8")
}

/// [`power_csv`] written atomically to `path`.
pub fn write_power_csv(path: impl AsRef<Path>, results: &[PowerResult]) -> Result<()> {
    crate::gkdist::write_atomic(path.as_ref(), power_csv(results).as_bytes())
}
