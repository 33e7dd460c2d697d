//! The bubble sort test, the Kolmogorov–Smirnov test and the
//! Wald–Wolfowitz runs test.

mod registry;
mod report;

use std::f64::consts::FRAC_1_SQRT_2;

pub use registry::{parse_distribution, registry_lookup, DistributionSpec, EmpiricalTable};
pub use report::TestReport;

use crate::curves::{bubble_value, sup_distance_by, StepFunction};
use crate::error::{Error, Result};
use crate::gkdist::{kolmogorov_cdf, GkDist};
use crate::psort::{running_max_after_k, Sample, SortLevel};

pub const BUBBLE_TEST: &str = "bubble_sort";
pub const KS_TEST: &str = "kolmogorov_smirnov";
pub const WW_TEST: &str = "wald_wolfowitz";

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// `sqrt(n) sup |B_n - B0|` for raw (unsorted) data.
///
/// The running maximum of the partially sorted data is obtained without
/// performing the passes (see [`running_max_after_k`]); it holds exactly
/// the values the passes would produce.
pub fn bubble_statistic(data: &[f64], f0: &DistributionSpec, level: SortLevel) -> f64 {
    let n = data.len();
    let k = level.iterations(n);
    let frontier = StepFunction::ecdf_of_nondecreasing(&running_max_after_k(data, k));
    let beta = level.beta();
    (n as f64).sqrt() * sup_distance_by(&frontier, |x| bubble_value(f0.cdf(x), beta))
}

/// Steps 1–5 of the bubble sort test with an asymptotic p-value.
pub fn bubble_sort_test(data: &Sample, f0: &DistributionSpec, beta: f64, alpha: f64) -> Result<TestReport> {
    let dist = GkDist::new(beta)?;
    bubble_sort_test_with(data, f0, &dist, alpha)
}

/// As [`bubble_sort_test`] with a preconfigured null distribution.
pub fn bubble_sort_test_with(
    data: &Sample,
    f0: &DistributionSpec,
    dist: &GkDist,
    alpha: f64,
) -> Result<TestReport> {
    check_alpha(alpha)?;
    let level = SortLevel::new(dist.beta())?;
    let n = data.len();
    let statistic = bubble_statistic(data.values(), f0, level);
    let p_value = dist.pvalue(statistic)?;
    let mut report = TestReport::new(BUBBLE_TEST, n, statistic, p_value, alpha);
    report.beta = Some(dist.beta());
    report.f0 = Some(f0.to_string());
    if level.iterations(n) == 0 {
        report
            .warnings
            .push(format!("beta={} gives zero bubble sort iterations for n={n}", dist.beta()));
    }
    Ok(report)
}

/// `sqrt(n) sup |F_n - F0|`, exact over the order statistics.
pub fn ks_statistic(data: &[f64], f0: &DistributionSpec) -> f64 {
    let mut sorted = data.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let nf = n as f64;
    let mut sup: f64 = 0.0;
    let mut below = 0.0;
    let mut i = 0;
    while i < n {
        let x = sorted[i];
        let mut j = i + 1;
        while j < n && sorted[j] == x {
            j += 1;
        }
        let level = j as f64 / nf;
        let f = f0.cdf(x);
        sup = sup.max((level - f).abs()).max((below - f).abs());
        below = level;
        i = j;
    }
    nf.sqrt() * sup
}

pub fn ks_test(data: &Sample, f0: &DistributionSpec, alpha: f64) -> Result<TestReport> {
    check_alpha(alpha)?;
    let statistic = ks_statistic(data.values(), f0);
    let mut report = TestReport::new(KS_TEST, data.len(), statistic, 1.0 - kolmogorov_cdf(statistic), alpha);
    report.f0 = Some(f0.to_string());
    Ok(report)
}

/// Runs about the sample median.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunsSummary {
    pub runs: usize,
    pub above: usize,
    pub below: usize,
    pub z: f64,
}

/// Count runs above/below the sample median (ties with the median are
/// dropped) and standardize with the normal approximation.
pub fn runs_summary(data: &[f64]) -> Result<RunsSummary> {
    if data.len() < 2 {
        return Err(Error::param("runs test needs at least two observations"));
    }
    let median = sample_median(data);
    let signs: Vec<bool> = data.iter().filter(|&&x| x != median).map(|&x| x > median).collect();
    let above = signs.iter().filter(|&&s| s).count();
    let below = signs.len() - above;
    if above == 0 || below == 0 {
        return Err(Error::param("runs test needs observations on both sides of the median"));
    }
    let runs = 1 + signs.windows(2).filter(|w| w[0] != w[1]).count();
    let (np, nm) = (above as f64, below as f64);
    let n = np + nm;
    let mean = 1.0 + 2.0 * np * nm / n;
    let var = 2.0 * np * nm * (2.0 * np * nm - n) / (n * n * (n - 1.0));
    if !(var > 0.0) {
        return Err(Error::param("runs test variance is degenerate for this sample"));
    }
    Ok(RunsSummary {
        runs,
        above,
        below,
        z: (runs as f64 - mean) / var.sqrt(),
    })
}

/// Wald–Wolfowitz runs test, two-sided normal approximation. The reported
/// statistic is the standardized run count `z`.
pub fn ww_runs_test(data: &Sample, alpha: f64) -> Result<TestReport> {
    check_alpha(alpha)?;
    let summary = runs_summary(data.values())?;
    let p = two_sided_normal_pvalue(summary.z);
    Ok(TestReport::new(WW_TEST, data.len(), summary.z, p, alpha))
}

pub(crate) fn two_sided_normal_pvalue(z: f64) -> f64 {
    statrs::function::erf::erfc(z.abs() * FRAC_1_SQRT_2)
}

/// Midpoint of the central order statistics for even sizes.
pub fn sample_median(data: &[f64]) -> f64 {
    let mut v = data.to_vec();
    let n = v.len();
    let mid = n / 2;
    let (_, &mut upper, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    if n % 2 == 1 {
        upper
    } else {
        let lower = v[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{empirical_bubble_curve, sup_distance, BubbleCurve};
    use crate::psort::partial_bubble_sort;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample(v: Vec<f64>) -> Sample {
        Sample::new(v).unwrap()
    }

    #[test]
    fn ks_examples() {
        let u = DistributionSpec::standard_uniform();
        assert_eq!(ks_statistic(&[0.5], &u), 0.5);
        let n = DistributionSpec::standard_normal();
        assert!((ks_statistic(&[0.0], &n) - 0.5).abs() < 1e-15);

        for size in [1usize, 4, 25, 100] {
            let q: Vec<f64> = (1..=size).map(|i| n.inv_cdf((i as f64 - 0.5) / size as f64)).collect();
            let stat = ks_statistic(&q, &n);
            let want = (size as f64).sqrt() * 0.5 / size as f64;
            assert!((stat - want).abs() < 1e-9, "size={size}");
        }

        let c = 0.3;
        let stat = ks_statistic(&[c; 16], &u);
        assert_eq!(stat, 4.0 * 0.7);
    }

    #[test]
    fn bubble_matches_pipeline_through_partial_sort() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f0 = DistributionSpec::normal(1.0, 2.0).unwrap();
        for _ in 0..50 {
            let n = rng.random_range(1..300);
            let data: Vec<f64> = (0..n).map(|_| f0.sample(&mut rng)).collect();
            let beta = rng.random_range(0.01..=1.0);
            let level = SortLevel::new(beta).unwrap();
            let sorted = partial_bubble_sort(&data, level.iterations(n));
            let curve = BubbleCurve::new(f0.clone(), beta).unwrap();
            let slow = (n as f64).sqrt() * sup_distance(&empirical_bubble_curve(&sorted), &curve);
            assert_eq!(bubble_statistic(&data, &f0, level).to_bits(), slow.to_bits());
        }
    }

    #[test]
    fn full_sort_reduces_to_ks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f0 = DistributionSpec::exponential(0.7).unwrap();
        for _ in 0..1000 {
            let n = rng.random_range(1..200);
            let data: Vec<f64> = (0..n).map(|_| f0.sample(&mut rng)).collect();
            let r = bubble_sort_test(&sample(data.clone()), &f0, 1.0, 0.05).unwrap();
            assert_eq!(r.statistic.to_bits(), ks_statistic(&data, &f0).to_bits());
        }
    }

    #[test]
    fn constant_sequence() {
        let f0 = DistributionSpec::standard_normal();
        let c = 0.4;
        let r = bubble_sort_test(&sample(vec![c; 25]), &f0, 1.0, 0.05).unwrap();
        let f = f0.cdf(c);
        assert_eq!(r.statistic, 5.0 * f.max(1.0 - f));
        assert!(r.reject);
    }

    #[test]
    fn report_fields() {
        let f0 = DistributionSpec::standard_uniform();
        let data = sample(vec![0.1, 0.7, 0.3, 0.9, 0.5]);
        let r = bubble_sort_test(&data, &f0, 0.5, 0.1).unwrap();
        assert_eq!(r.test_name, BUBBLE_TEST);
        assert_eq!(r.n, 5);
        assert_eq!(r.beta, Some(0.5));
        assert_eq!(r.f0.as_deref(), Some("uniform(0,1)"));
        assert!((0.0..=1.0).contains(&r.p_value));
        assert_eq!(r.reject, r.p_value < r.alpha);
        assert!(r.warnings.is_empty());

        let json = serde_json::to_value(&r).unwrap();
        let keys: Vec<&str> = json.as_object().unwrap().keys().map(String::as_str).collect();
        assert_eq!(keys.len(), 9);
        for k in ["test_name", "n", "beta", "statistic", "p_value", "alpha", "reject", "seed", "f0"] {
            assert!(keys.contains(&k), "{k}");
        }

        let tiny = bubble_sort_test(&sample(vec![0.2, 0.4]), &f0, 0.1, 0.1).unwrap();
        assert_eq!(tiny.warnings.len(), 1);

        assert!(bubble_sort_test(&data, &f0, 0.5, 0.0).is_err());
        assert!(bubble_sort_test(&data, &f0, 0.0, 0.1).is_err());
    }

    #[test]
    fn runs_examples() {
        let alternating: Vec<f64> = (0..20).map(|i| if i % 2 == 0 { 1.0 + i as f64 } else { -1.0 - i as f64 }).collect();
        let s = runs_summary(&alternating).unwrap();
        assert_eq!(s.runs, 20);
        assert!(s.z > 3.0);
        let r = ww_runs_test(&sample(alternating), 0.05).unwrap();
        assert!(r.p_value < 0.001);

        let sorted: Vec<f64> = (0..20).map(f64::from).collect();
        let s = runs_summary(&sorted).unwrap();
        assert_eq!(s.runs, 2);
        // mean 11, variance 2*100*180/(400*19) = 180/38
        let want = (2.0 - 11.0) / (180.0f64 / 38.0).sqrt();
        assert!((s.z - want).abs() < 1e-12);
        assert!(ww_runs_test(&sample(sorted), 0.05).unwrap().p_value < 0.001);

        assert!(runs_summary(&[1.0, 2.0]).is_err());
        assert!(runs_summary(&[3.0, 3.0, 3.0]).is_err());
        assert!(runs_summary(&[1.0]).is_err());
    }

    #[test]
    fn median_conventions() {
        assert_eq!(sample_median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(sample_median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
        // points equal to the median are dropped
        let s = runs_summary(&[1.0, 5.0, 3.0, 0.0, 6.0]).unwrap();
        assert_eq!((s.above, s.below, s.runs), (2, 2, 4));
    }
}
