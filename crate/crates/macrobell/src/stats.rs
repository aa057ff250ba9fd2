//! Covariance estimation: a two-pass reference implementation and a
//! streaming accumulator with order-stable parallel merging.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sample covariance with 1/(n-1) normalization, computed in two passes.
///
/// Errors on length mismatch or fewer than two observations.
pub fn covariance(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::invalid(format!(
            "covariance inputs must have equal length, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::invalid(format!(
            "covariance needs at least 2 observations, got {}",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut acc = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        acc += (x - mean_x) * (y - mean_y);
    }
    Ok(acc / (n - 1.0))
}

/// Streaming bivariate moment accumulator (Welford update, Chan merge).
///
/// Tracks the running means of both coordinates and the centered
/// co-moment `C = sum (x - mean_x)(y - mean_y)`, which is numerically far
/// more stable than raw product sums. Merging two accumulators combines
/// partial results exactly; merges must be applied in a fixed order for
/// bit-identical reproducibility.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CovarianceAccumulator {
    count: u64,
    mean_x: f64,
    mean_y: f64,
    comoment: f64,
    m2_x: f64,
    m2_y: f64,
}

impl CovarianceAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64, y: f64) {
        self.count += 1;
        let n = self.count as f64;
        let dx = x - self.mean_x;
        self.mean_x += dx / n;
        let dy = y - self.mean_y;
        self.mean_y += dy / n;
        // dx uses the old mean, (y - mean_y) the updated one
        self.comoment += dx * (y - self.mean_y);
        self.m2_x += dx * (x - self.mean_x);
        self.m2_y += dy * (y - self.mean_y);
    }

    /// Merge another accumulator into this one (Chan et al. update).
    pub fn merge(&mut self, other: &CovarianceAccumulator) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n1 = self.count as f64;
        let n2 = other.count as f64;
        let n = n1 + n2;
        let dx = other.mean_x - self.mean_x;
        let dy = other.mean_y - self.mean_y;
        self.comoment += other.comoment + dx * dy * n1 * n2 / n;
        self.m2_x += other.m2_x + dx * dx * n1 * n2 / n;
        self.m2_y += other.m2_y + dy * dy * n1 * n2 / n;
        self.mean_x += dx * n2 / n;
        self.mean_y += dy * n2 / n;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean_x(&self) -> f64 {
        self.mean_x
    }

    pub fn mean_y(&self) -> f64 {
        self.mean_y
    }

    /// Sample covariance (1/(n-1)); errors if fewer than two observations.
    pub fn sample_covariance(&self) -> Result<f64> {
        if self.count < 2 {
            return Err(Error::insufficient(format!(
                "sample covariance needs at least 2 observations, have {}",
                self.count
            )));
        }
        Ok(self.comoment / (self.count - 1) as f64)
    }

    pub fn sample_variance_x(&self) -> Result<f64> {
        if self.count < 2 {
            return Err(Error::insufficient("sample variance needs at least 2 observations"));
        }
        Ok(self.m2_x / (self.count - 1) as f64)
    }

    pub fn sample_variance_y(&self) -> Result<f64> {
        if self.count < 2 {
            return Err(Error::insufficient("sample variance needs at least 2 observations"));
        }
        Ok(self.m2_y / (self.count - 1) as f64)
    }
}

/// Mean and sample standard deviation of a slice (used for bootstrap spread).
pub fn mean_and_sample_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
