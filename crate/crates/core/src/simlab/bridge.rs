//! Direct simulation of `D^beta` from its two conditionally independent
//! generalized Brownian bridges, used as an oracle for the quadrature.

use rand::Rng;
use rand_distr::{Distribution, Open01, StandardNormal};

use super::exec::{map_reps, rep_rng, Execution};
use super::EmpiricalCdf;
use crate::error::{Error, Result};

/// How the supremum of a simulated path is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SupMethod {
    /// Maximum of `|W|` over the grid points only.
    Grid,
    /// Between grid points, draw the maximum and minimum of the bridge
    /// joining the two endpoint values from their exact laws.
    #[default]
    Interpolated,
}

/// `sup |W|` for one path of `BB(horizon, terminal)` on `steps` equal steps.
pub fn simulate_bridge<R: Rng + ?Sized>(
    horizon: f64,
    terminal: f64,
    steps: usize,
    method: SupMethod,
    rng: &mut R,
) -> f64 {
    let h = horizon / steps as f64;
    let mut w = 0.0_f64;
    let mut sup: f64 = 0.0;
    for i in 0..steps {
        let remaining = horizon - i as f64 * h;
        let next = if i + 1 == steps {
            terminal
        } else {
            let mean = w + (terminal - w) * h / remaining;
            let sd = (h * (remaining - h) / remaining).sqrt();
            let z: f64 = StandardNormal.sample(rng);
            mean + sd * z
        };
        sup = match method {
            SupMethod::Grid => sup.max(next.abs()),
            SupMethod::Interpolated => {
                let (hi, lo) = interval_extremes(w, next, h, rng);
                sup.max(hi).max(-lo)
            }
        };
        w = next;
    }
    sup
}

fn interval_extremes<R: Rng + ?Sized>(u: f64, v: f64, h: f64, rng: &mut R) -> (f64, f64) {
    let d2 = (u - v) * (u - v);
    let u1: f64 = Open01.sample(rng);
    let u2: f64 = Open01.sample(rng);
    let (e1, e2) = (-u1.ln(), -u2.ln());
    let hi = 0.5 * (u + v + (d2 + 2.0 * h * e1).sqrt());
    let lo = 0.5 * (u + v - (d2 + 2.0 * h * e2).sqrt());
    (hi, lo)
}

/// Grid values `W(0), W(h), ..., W(horizon)` of one bridge path.
pub fn bridge_path<R: Rng + ?Sized>(horizon: f64, terminal: f64, steps: usize, rng: &mut R) -> Vec<f64> {
    let h = horizon / steps as f64;
    let mut path = Vec::with_capacity(steps + 1);
    let mut w = 0.0_f64;
    path.push(w);
    for i in 0..steps {
        let remaining = horizon - i as f64 * h;
        w = if i + 1 == steps {
            terminal
        } else {
            let z: f64 = StandardNormal.sample(rng);
            w + (terminal - w) * h / remaining + (h * (remaining - h) / remaining).sqrt() * z
        };
        path.push(w);
    }
    path
}

fn check(beta: f64, grid_steps: usize) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::param(format!("bridge oracle needs beta in (0, 1), got {beta}")));
    }
    if grid_steps < 64 {
        return Err(Error::param(format!("grid_steps must be at least 64, got {grid_steps}")));
    }
    Ok(())
}

/// One draw of `D^beta` together with its driving `Z`.
fn draw<R: Rng + ?Sized>(beta: f64, steps: usize, method: SupMethod, rng: &mut R) -> (f64, f64) {
    let t1 = (1.0 - beta) / beta;
    let z: f64 = StandardNormal.sample(rng);
    let s1 = simulate_bridge(t1, t1.sqrt() * z, steps, method, rng);
    let s2 = simulate_bridge(beta, (beta * (1.0 - beta)).sqrt() * z, steps, method, rng);
    (s1.max(s2), z)
}

/// Empirical cdf of `draws` simulated values of `D^beta`, each path on
/// `grid_steps` steps with the supremum refined between grid points.
pub fn bridge_oracle(beta: f64, draws: usize, grid_steps: usize, seed: u64) -> Result<EmpiricalCdf> {
    bridge_oracle_with(beta, draws, grid_steps, seed, SupMethod::default(), Execution::Parallel { workers: 0 })
}

pub fn bridge_oracle_with(
    beta: f64,
    draws: usize,
    grid_steps: usize,
    seed: u64,
    method: SupMethod,
    exec: Execution,
) -> Result<EmpiricalCdf> {
    check(beta, grid_steps)?;
    let values = map_reps(exec, draws, |rep| {
        let mut rng = rep_rng(seed, rep as u64);
        draw(beta, grid_steps, method, &mut rng).0
    });
    Ok(EmpiricalCdf::new(values))
}

/// Monte Carlo `cov(W2(beta/4), W2(beta/2) | Z = z)` paired with its
/// target `t1 (beta - t2) / beta`.
pub fn conditional_bridge_covariance(
    beta: f64,
    z: f64,
    draws: usize,
    grid_steps: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check(beta, grid_steps)?;
    if !grid_steps.is_multiple_of(4) || draws < 2 {
        return Err(Error::param("grid_steps must be a multiple of 4 and draws at least 2"));
    }
    let terminal = (beta * (1.0 - beta)).sqrt() * z;
    let (i1, i2) = (grid_steps / 4, grid_steps / 2);
    let pairs = map_reps(Execution::Parallel { workers: 0 }, draws, |rep| {
        let mut rng = rep_rng(seed, rep as u64);
        let path = bridge_path(beta, terminal, grid_steps, &mut rng);
        (path[i1], path[i2])
    });
    let n = draws as f64;
    let ma = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let mb = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let cov = pairs.iter().map(|p| (p.0 - ma) * (p.1 - mb)).sum::<f64>() / (n - 1.0);
    let (t1, t2) = (beta / 4.0, beta / 2.0);
    Ok((cov, t1 * (beta - t2) / beta))
}
