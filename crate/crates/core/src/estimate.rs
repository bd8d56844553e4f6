use serde::Serialize;

/// Normal quantile for a two-sided 95% interval.
pub const Z95: f64 = 1.959_963_984_540_054;

/// A metric value with its estimator metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricEstimate {
    pub value: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
    /// Trials behind the estimate; zero for deterministic quadrature.
    pub n: u64,
}

impl MetricEstimate {
    /// A deterministic value (quadrature result).
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            stderr: 0.0,
            ci95: (value, value),
            n: 0,
        }
    }

    /// Normal-approximation interval around a sample mean.
    pub fn from_mean(value: f64, stderr: f64, n: u64) -> Self {
        Self {
            value,
            stderr,
            ci95: (value - Z95 * stderr, value + Z95 * stderr),
            n,
        }
    }

    /// Wald interval for a proportion, clamped to `[0, 1]`.
    pub fn from_proportion(successes: u64, n: u64) -> Self {
        let p = successes as f64 / n as f64;
        let stderr = (p * (1.0 - p) / n as f64).sqrt();
        Self {
            value: p,
            stderr,
            ci95: ((p - Z95 * stderr).max(0.0), (p + Z95 * stderr).min(1.0)),
            n,
        }
    }

    /// Multiplies value, error and interval by a nonnegative constant.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            stderr: self.stderr * factor,
            ci95: (self.ci95.0 * factor, self.ci95.1 * factor),
            n: self.n,
        }
    }

    /// `|self − other|` in units of the combined standard error. Two exact
    /// values that differ give infinity; equal ones give zero.
    pub fn z_distance(&self, other: &MetricEstimate) -> f64 {
        let diff = (self.value - other.value).abs();
        let se = self.stderr.hypot(other.stderr);
        if se > 0.0 {
            diff / se
        } else if diff <= 1e-12 * self.value.abs().max(1.0) {
            0.0
        } else {
            f64::INFINITY
        }
    }
}
