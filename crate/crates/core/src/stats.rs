//! Deterministic reductions and Monte Carlo summaries.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Pairwise (tree) summation. The association order depends only on the length,
/// so results are bit-identical however the inputs were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

pub fn pairwise_sum_complex(xs: &[Complex64]) -> Complex64 {
    match xs.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => xs[0],
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum_complex(a) + pairwise_sum_complex(b)
        }
    }
}

/// Sample mean and standard error of the mean.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n == 1 {
        return (mean, f64::INFINITY);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// A Monte Carlo estimate, optionally compared against a target value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub estimate: f64,
    pub stderr: f64,
    pub n: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
}

impl McReport {
    pub fn from_samples(xs: &[f64], seed: u64) -> Self {
        let (estimate, stderr) = mean_stderr(xs);
        Self { estimate, stderr, n: xs.len(), seed, target: None, z: None }
    }

    /// Attaches a target and the z-score `(estimate - target) / stderr`.
    pub fn against(mut self, target: f64) -> Self {
        self.target = Some(target);
        self.z = Some(z_score(self.estimate - target, self.stderr));
        self
    }

    pub fn to_json(&self, params: &serde_json::Value) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v["params"] = params.clone();
        v
    }
}

/// `diff / stderr`, with `0/0 = 0` (an exactly reproduced value has no noise).
pub fn z_score(diff: f64, stderr: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else {
        diff / stderr
    }
}
