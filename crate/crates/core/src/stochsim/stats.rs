//! Streaming cross-path moments.

use serde::{Deserialize, Serialize};

/// Welford accumulators, one per recorded time.
///
/// Paths are pushed one at a time; pushing them in a fixed order makes the
/// result bit-reproducible regardless of how the paths were produced.
#[derive(Debug, Clone, Default)]
pub struct StreamingMoments {
    count: Vec<u64>,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl StreamingMoments {
    pub fn new(len: usize) -> Self {
        Self {
            count: vec![0; len],
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    /// Adds one path. `values` may be shorter than the grid (a path that
    /// stopped early contributes only to the times it reached).
    pub fn push(&mut self, values: &[f64]) {
        for (k, &x) in values.iter().enumerate().take(self.count.len()) {
            self.count[k] += 1;
            let n = self.count[k] as f64;
            let delta = x - self.mean[k];
            self.mean[k] += delta / n;
            self.m2[k] += delta * (x - self.mean[k]);
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.count
    }

    pub fn means(&self) -> &[f64] {
        &self.mean
    }

    /// Unbiased sample variances; zero where fewer than two samples exist.
    pub fn variances(&self) -> Vec<f64> {
        self.count
            .iter()
            .zip(&self.m2)
            .map(|(&c, &m2)| if c < 2 { 0.0 } else { (m2 / (c - 1) as f64).max(0.0) })
            .collect()
    }
}

/// Cross-path mean and variance of the aggregated prevalence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub mean_path: Vec<f64>,
    pub var_path: Vec<f64>,
    /// Number of paths still alive at each recorded time.
    pub counts: Vec<u64>,
    pub n_paths: usize,
    pub n_diverged: usize,
    /// Set when every path had diverged before the end of the grid; the
    /// series then stop at the last time with a live path.
    pub truncated: bool,
}

impl EnsembleStats {
    pub fn from_moments(times: &[f64], moments: &StreamingMoments, n_paths: usize, n_diverged: usize) -> Self {
        let live = moments.counts().iter().take_while(|&&c| c > 0).count();
        let truncated = live < times.len();
        let mut var_path = moments.variances();
        var_path.truncate(live);
        Self {
            times: times[..live].to_vec(),
            mean_path: moments.means()[..live].to_vec(),
            var_path,
            counts: moments.counts()[..live].to_vec(),
            n_paths,
            n_diverged,
            truncated,
        }
    }

    /// True when some recorded time has fewer than two samples, so its
    /// variance is reported as zero by convention.
    pub fn undersampled(&self) -> bool {
        self.counts.iter().any(|&c| c < 2)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}
