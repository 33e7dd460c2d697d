use serde::{Deserialize, Serialize};

/// Outcome of one hypothesis test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test_name: String,
    pub n: usize,
    pub beta: Option<f64>,
    pub statistic: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub reject: bool,
    pub seed: Option<u64>,
    pub f0: Option<String>,
    /// Diagnostics such as a degenerate iteration count; not serialized.
    #[serde(skip)]
    pub warnings: Vec<String>,
}

impl TestReport {
    pub(crate) fn new(test_name: &str, n: usize, statistic: f64, p_value: f64, alpha: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        TestReport {
            test_name: test_name.to_string(),
            n,
            beta: None,
            statistic,
            p_value,
            alpha,
            reject: p_value < alpha,
            seed: None,
            f0: None,
            warnings: Vec::new(),
        }
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }
}
