//! Single-server queue that serves either the shortest or the longest
//! waiting job.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::testkit::DistributionSpec;

/// Parameters of the scheduling experiment.
#[derive(Debug, Clone)]
pub struct QueueConfig {
    pub n_jobs: usize,
    /// Standard deviation of the log arrival times.
    pub sigma: f64,
    pub service: DistributionSpec,
    pub arrival_log_mean: f64,
}

impl QueueConfig {
    /// Uniform(0,1) services and log arrival mean `ln(n_jobs)`.
    pub fn new(n_jobs: usize, sigma: f64) -> Result<Self> {
        let cfg = QueueConfig {
            n_jobs,
            sigma,
            service: DistributionSpec::standard_uniform(),
            arrival_log_mean: (n_jobs as f64).ln(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_jobs < 2 {
            return Err(Error::param("queue needs at least two jobs"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::param(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !self.arrival_log_mean.is_finite() {
            return Err(Error::param("arrival log mean must be finite"));
        }
        Ok(())
    }
}

/// Which waiting job the server takes next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pick {
    Shortest,
    Longest,
}

/// Outcome of one queue simulation, in departure order.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueRun {
    /// Job indices (into the input slices).
    pub order: Vec<usize>,
    pub services: Vec<f64>,
    pub starts: Vec<f64>,
    pub departures: Vec<f64>,
}

impl QueueRun {
    /// Replay the event log and check conservation and that service
    /// intervals never overlap.
    pub fn verify(&self, arrivals: &[f64], services: &[f64]) -> Result<()> {
        let n = arrivals.len();
        let bad = |m: String| Err(Error::param(format!("queue log inconsistent: {m}")));
        if self.order.len() != n || self.departures.len() != n {
            return bad(format!("{} departures for {n} arrivals", self.departures.len()));
        }
        let mut seen = vec![false; n];
        let mut free_at = f64::NEG_INFINITY;
        for (i, &job) in self.order.iter().enumerate() {
            if job >= n || std::mem::replace(&mut seen[job], true) {
                return bad(format!("job {job} served twice or unknown"));
            }
            if self.services[i] != services[job] {
                return bad(format!("job {job} service time altered"));
            }
            if self.starts[i] < arrivals[job] {
                return bad(format!("job {job} started before arriving"));
            }
            if self.starts[i] < free_at {
                return bad(format!("job {job} started while the server was busy"));
            }
            if self.departures[i] != self.starts[i] + services[job] {
                return bad(format!("job {job} departure does not match its service"));
            }
            free_at = self.departures[i];
        }
        if self.departures.windows(2).any(|w| w[1] < w[0]) {
            return bad("departure times decrease".into());
        }
        Ok(())
    }
}

fn total_key(x: f64) -> u64 {
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

/// Event-driven simulation. The server starts at the first arrival and,
/// whenever it is free with jobs waiting, takes the job chosen by `pick`
/// (called only when two or more jobs wait). Simultaneous arrivals enter
/// in index order; equal service times go to the earlier arrival.
pub fn simulate_queue(arrivals: &[f64], services: &[f64], mut pick: impl FnMut() -> Pick) -> Result<QueueRun> {
    let n = arrivals.len();
    if services.len() != n {
        return Err(Error::param(format!(
            "{} arrival times but {} service times",
            n,
            services.len()
        )));
    }
    if let Some(i) = (0..n).find(|&i| !arrivals[i].is_finite() || !(services[i] >= 0.0) || !services[i].is_finite()) {
        return Err(Error::param(format!("job {i} has an invalid arrival or service time")));
    }
    let mut by_arrival: Vec<usize> = (0..n).collect();
    by_arrival.sort_by(|&a, &b| arrivals[a].total_cmp(&arrivals[b]).then(a.cmp(&b)));

    let mut run = QueueRun {
        order: Vec::with_capacity(n),
        services: Vec::with_capacity(n),
        starts: Vec::with_capacity(n),
        departures: Vec::with_capacity(n),
    };
    // (service key, arrival rank, job)
    let mut waiting: BTreeSet<(u64, usize, usize)> = BTreeSet::new();
    let mut next = 0;
    let mut clock = f64::NEG_INFINITY;
    while run.order.len() < n {
        if waiting.is_empty() {
            clock = clock.max(arrivals[by_arrival[next]]);
        }
        while next < n && arrivals[by_arrival[next]] <= clock {
            let job = by_arrival[next];
            waiting.insert((total_key(services[job]), next, job));
            next += 1;
        }
        let chosen = if waiting.len() == 1 {
            *waiting.first().expect("nonempty")
        } else {
            match pick() {
                Pick::Shortest => *waiting.first().expect("nonempty"),
                Pick::Longest => {
                    let top = waiting.last().expect("nonempty").0;
                    *waiting.range((top, 0, 0)..).next().expect("nonempty")
                }
            }
        };
        waiting.remove(&chosen);
        let job = chosen.2;
        run.order.push(job);
        run.services.push(services[job]);
        run.starts.push(clock);
        clock += services[job];
        run.departures.push(clock);
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simlab::rep_rng;
    use rand::Rng;

    #[test]
    fn hand_example() {
        let arrivals = [0.0; 3];
        let services = [0.5, 0.2, 0.9];
        let run = simulate_queue(&arrivals, &services, || Pick::Shortest).unwrap();
        assert_eq!(run.services, [0.2, 0.5, 0.9]);
        assert_eq!(run.departures, [0.2, 0.7, 1.6]);
        run.verify(&arrivals, &services).unwrap();

        let mut coins = [Pick::Longest, Pick::Shortest].into_iter();
        let run = simulate_queue(&arrivals, &services, || coins.next().unwrap()).unwrap();
        assert_eq!(run.services, [0.9, 0.2, 0.5]);
    }

    #[test]
    fn idle_server_waits_for_next_arrival() {
        let arrivals = [1.0, 5.0, 5.1];
        let services = [1.0, 2.0, 0.5];
        let mut calls = 0;
        let run = simulate_queue(&arrivals, &services, || {
            calls += 1;
            Pick::Shortest
        })
        .unwrap();
        assert_eq!(run.order, [0, 1, 2]);
        assert_eq!(run.starts, [1.0, 5.0, 7.0]);
        assert_eq!(calls, 0);
    }

    #[test]
    fn ties_go_to_earlier_arrival() {
        let arrivals = [0.0, 0.0, 0.0, 0.0];
        let services = [0.3, 0.7, 0.3, 0.7];
        let run = simulate_queue(&arrivals, &services, || Pick::Shortest).unwrap();
        assert_eq!(run.order, [0, 2, 1, 3]);
        let run = simulate_queue(&arrivals, &services, || Pick::Longest).unwrap();
        assert_eq!(run.order, [1, 3, 0, 2]);
    }

    #[test]
    fn random_runs_replay_cleanly() {
        for rep in 0..50 {
            let mut rng = rep_rng(8, rep);
            let n = 1 + rep as usize * 3;
            let arrivals: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 10.0).collect();
            let services: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let run = simulate_queue(&arrivals, &services, || {
                if rng.random::<bool>() {
                    Pick::Shortest
                } else {
                    Pick::Longest
                }
            })
            .unwrap();
            run.verify(&arrivals, &services).unwrap();
        }
    }

    #[test]
    fn rejects_mismatched_input() {
        assert!(simulate_queue(&[0.0], &[1.0, 2.0], || Pick::Shortest).is_err());
        assert!(simulate_queue(&[0.0], &[f64::NAN], || Pick::Shortest).is_err());
        assert!(QueueConfig::new(100, 0.0).is_err());
    }
}
