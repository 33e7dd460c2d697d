//! Empirical and limiting bubble sort curves.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::psort::running_max;
use crate::testkit::DistributionSpec;

/// Right-continuous nondecreasing step function starting at 0, stored as
/// strictly increasing jump locations with the value reached at each jump.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    jumps: Vec<f64>,
    levels: Vec<f64>,
}

impl StepFunction {
    pub fn new(jumps: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if jumps.len() != levels.len() {
            return Err(Error::param("jumps and levels differ in length"));
        }
        let increasing = jumps.windows(2).all(|w| w[0] < w[1]);
        let rising = levels.windows(2).all(|w| w[0] < w[1]);
        let bounded = levels.first().is_none_or(|&l| l > 0.0) && levels.last().is_none_or(|&l| l <= 1.0);
        if !(increasing && rising && bounded) {
            return Err(Error::param("step function must rise strictly within (0, 1]"));
        }
        Ok(StepFunction { jumps, levels })
    }

    /// Ecdf of a nondecreasing sequence; runs of equal values form a single
    /// jump.
    pub fn ecdf_of_nondecreasing(values: &[f64]) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        let n = values.len() as f64;
        let mut jumps = Vec::new();
        let mut levels = Vec::new();
        for (i, &v) in values.iter().enumerate() {
            if i + 1 == values.len() || values[i + 1] > v {
                jumps.push(v);
                levels.push((i + 1) as f64 / n);
            }
        }
        StepFunction { jumps, levels }
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.jumps.partition_point(|&j| j <= x) {
            0 => 0.0,
            i => self.levels[i - 1],
        }
    }

    /// Two-column `location,level` CSV.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "location,level")?;
        for (x, l) in self.jumps.iter().zip(&self.levels) {
            writeln!(out, "{x},{l}")?;
        }
        Ok(())
    }
}

/// Empirical bubble sort curve: the ecdf of the running maximum of an
/// already partially sorted sample.
pub fn empirical_bubble_curve(sorted: &[f64]) -> StepFunction {
    StepFunction::ecdf_of_nondecreasing(&running_max(sorted))
}

/// Limiting bubble sort curve for a reference cdf `F` at a given
/// probability level: `beta F / (1 - F)` below the breakpoint and `F` at or
/// above it, i.e. `min(beta/(1-F), 1) - min(beta, 1-F)`.
pub fn bubble_value(f: f64, beta: f64) -> f64 {
    let tail = 1.0 - f;
    if tail <= beta {
        f
    } else {
        beta * f / tail
    }
}

/// The limit `B0` of the empirical bubble sort curve under the null.
#[derive(Debug, Clone)]
pub struct BubbleCurve {
    f0: DistributionSpec,
    beta: f64,
    xstar: f64,
}

impl BubbleCurve {
    pub fn new(f0: DistributionSpec, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::param(format!("sorting level must lie in (0, 1], got {beta}")));
        }
        let xstar = f0.inv_cdf(1.0 - beta);
        Ok(BubbleCurve { f0, beta, xstar })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn f0(&self) -> &DistributionSpec {
        &self.f0
    }

    /// Breakpoint `F0^{-1}(1 - beta)`.
    pub fn xstar(&self) -> f64 {
        self.xstar
    }

    pub fn eval(&self, x: f64) -> f64 {
        bubble_value(self.f0.cdf(x), self.beta)
    }

    /// Invert the odds transform left of the breakpoint to get `F0(x)` back.
    pub fn recover_cdf(&self, x: f64) -> Result<f64> {
        if x >= self.xstar {
            return Err(Error::param(format!(
                "cdf can only be recovered below the breakpoint {}, got x={x}",
                self.xstar
            )));
        }
        let b = self.eval(x);
        Ok(b / (self.beta + b))
    }
}

/// Exact `sup_x |S(x) - B0(x)|` for a step function against a continuous
/// nondecreasing curve: only the one-sided gaps at the jumps matter.
pub fn sup_distance(empirical: &StepFunction, curve: &BubbleCurve) -> f64 {
    sup_distance_by(empirical, |x| curve.eval(x))
}

pub(crate) fn sup_distance_by(empirical: &StepFunction, curve: impl Fn(f64) -> f64) -> f64 {
    let mut prev = 0.0;
    let mut sup: f64 = 0.0;
    for (&x, &level) in empirical.jumps.iter().zip(&empirical.levels) {
        let b = curve(x);
        sup = sup.max((level - b).abs()).max((prev - b).abs());
        prev = level;
    }
    sup
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psort::{partial_bubble_sort, SortLevel};
    use proptest::prelude::*;

    fn unif(beta: f64) -> BubbleCurve {
        BubbleCurve::new(DistributionSpec::standard_uniform(), beta).unwrap()
    }

    #[test]
    fn empirical_curve_examples() {
        let sorted = [1.0, 2.0, 2.5, 4.0];
        let ecdf = empirical_bubble_curve(&sorted);
        assert_eq!(ecdf.jumps(), sorted);
        assert_eq!(ecdf.levels(), [0.25, 0.5, 0.75, 1.0]);

        let c = empirical_bubble_curve(&[2.0, 1.0, 3.0]);
        assert_eq!(c.jumps(), [2.0, 3.0]);
        assert_eq!(c.levels(), [2.0 / 3.0, 1.0]);

        let flat = empirical_bubble_curve(&[5.0; 7]);
        assert_eq!(flat.jumps(), [5.0]);
        assert_eq!(flat.levels(), [1.0]);
    }

    #[test]
    fn step_eval_is_right_continuous() {
        let c = empirical_bubble_curve(&[2.0, 1.0, 3.0]);
        assert_eq!(c.eval(1.999), 0.0);
        assert_eq!(c.eval(2.0), 2.0 / 3.0);
        assert_eq!(c.eval(3.0), 1.0);
        assert_eq!(c.eval(99.0), 1.0);
        assert!(StepFunction::new(vec![1.0, 0.0], vec![0.5, 1.0]).is_err());
        assert!(StepFunction::new(vec![0.0, 1.0], vec![0.5, 1.5]).is_err());
    }

    #[test]
    fn bubble_curve_examples() {
        assert_eq!(unif(0.25).eval(0.5), 0.25);
        let c = BubbleCurve::new(DistributionSpec::uniform(-1.0, 1.0).unwrap(), 0.25).unwrap();
        assert_eq!(c.xstar(), 0.5);
        let n = BubbleCurve::new(DistributionSpec::standard_normal(), 1.0).unwrap();
        for x in [-2.0, -0.3, 0.0, 1.1] {
            assert_eq!(n.eval(x), DistributionSpec::standard_normal().cdf(x));
        }
        // F = 1 handled by the min-form
        assert_eq!(unif(0.3).eval(1.0), 1.0);
        assert_eq!(unif(0.3).eval(2.0), 1.0);
        assert_eq!(unif(0.3).eval(-1.0), 0.0);
    }

    #[test]
    fn explicit_form_matches_min_form() {
        for &beta in &[0.05, 0.25, 0.5, 0.9, 1.0] {
            for i in 0..=1000 {
                let f = i as f64 / 1000.0;
                let min_form = (beta / (1.0 - f)).min(1.0) - beta.min(1.0 - f);
                assert!((bubble_value(f, beta) - min_form).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn recover_cdf_examples() {
        assert!((unif(0.25).recover_cdf(0.5).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(unif(0.25).recover_cdf(0.0).unwrap(), 0.0);
        let b = unif(0.5).eval(0.25);
        assert!((b - 1.0 / 6.0).abs() < 1e-15);
        assert!((unif(0.5).recover_cdf(0.25).unwrap() - 0.25).abs() < 1e-15);
        assert!(unif(0.25).recover_cdf(0.75).is_err());
        assert!(unif(0.25).recover_cdf(0.9).is_err());
    }

    #[test]
    fn recover_inverts_eval_for_normal() {
        let beta = 0.3;
        let f0 = DistributionSpec::normal(1.0, 2.0).unwrap();
        let c = BubbleCurve::new(f0.clone(), beta).unwrap();
        let mut x = -8.0;
        while x < c.xstar() {
            assert!((c.recover_cdf(x).unwrap() - f0.cdf(x)).abs() < 1e-12);
            x += 0.01;
        }
    }

    #[test]
    fn sup_distance_examples() {
        let single = empirical_bubble_curve(&[0.3]);
        assert_eq!(sup_distance(&single, &unif(1.0)), 0.7);
        let single = empirical_bubble_curve(&[0.8]);
        assert_eq!(sup_distance(&single, &unif(1.0)), 0.8);

        for n in [1usize, 2, 7, 50] {
            let q: Vec<f64> = (1..=n).map(|i| (i as f64 - 0.5) / n as f64).collect();
            let d = sup_distance(&empirical_bubble_curve(&q), &unif(1.0));
            assert!((d - 0.5 / n as f64).abs() < 1e-14, "n={n} d={d}");
        }
    }

    fn brute_sup(step: &StepFunction, curve: &BubbleCurve, lo: f64, hi: f64) -> f64 {
        // dense grid plus both sides of every jump
        let mut sup: f64 = 0.0;
        let m = 20_000;
        for i in 0..=m {
            let x = lo + (hi - lo) * i as f64 / m as f64;
            sup = sup.max((step.eval(x) - curve.eval(x)).abs());
        }
        for &j in step.jumps() {
            let left = j - 1e-12;
            sup = sup.max((step.eval(left) - curve.eval(left)).abs());
            sup = sup.max((step.eval(j) - curve.eval(j)).abs());
        }
        sup
    }

    proptest! {
        #[test]
        fn sup_distance_matches_brute_force(v in prop::collection::vec(0.0f64..1.0, 1..40), beta in 0.05f64..=1.0) {
            let k = SortLevel::new(beta).unwrap().iterations(v.len());
            let step = empirical_bubble_curve(&partial_bubble_sort(&v, k));
            let curve = unif(beta);
            let exact = sup_distance(&step, &curve);
            let brute = brute_sup(&step, &curve, -0.1, 1.1);
            prop_assert!(exact >= brute - 1e-9);
            prop_assert!(exact - brute < 1e-6);
        }

        #[test]
        fn curve_is_monotone_and_bounded(beta in 0.01f64..=1.0, mut xs in prop::collection::vec(-4.0f64..4.0, 2..50)) {
            xs.sort_by(f64::total_cmp);
            let c = BubbleCurve::new(DistributionSpec::standard_normal(), beta).unwrap();
            let vals: Vec<f64> = xs.iter().map(|&x| c.eval(x)).collect();
            prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(vals.iter().all(|&b| (0.0..=1.0).contains(&b)));
            for (&x, &b) in xs.iter().zip(&vals) {
                let f = c.f0().cdf(x);
                if x >= c.xstar() {
                    prop_assert_eq!(b, f);
                } else {
                    prop_assert!(b <= f);
                }
            }
        }

        #[test]
        fn monotone_transform_leaves_distance_unchanged(
            u in prop::collection::vec(0.001f64..0.999, 1..80),
            beta in 0.05f64..=1.0,
        ) {
            // data pushed through the registry's inverse cdf against F0,
            // versus the probability-integral values against Uniform(0,1)
            let f0 = DistributionSpec::exponential(2.0).unwrap();
            let x: Vec<f64> = u.iter().map(|&v| f0.inv_cdf(v)).collect();
            let pit: Vec<f64> = x.iter().map(|&v| f0.cdf(v)).collect();
            let k = SortLevel::new(beta).unwrap().iterations(u.len());
            let dx = sup_distance(&empirical_bubble_curve(&partial_bubble_sort(&x, k)), &BubbleCurve::new(f0, beta).unwrap());
            let du = sup_distance(&empirical_bubble_curve(&partial_bubble_sort(&pit, k)), &unif(beta));
            prop_assert_eq!(dx.to_bits(), du.to_bits());
        }
    }

    #[test]
    fn csv_output() {
        let c = empirical_bubble_curve(&[2.0, 1.0, 3.0]);
        let mut buf = Vec::new();
        c.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "location,level\n2,0.6666666666666666\n3,1\n");
    }
}
