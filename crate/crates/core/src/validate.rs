//! Cross-engine validation: every metric from every engine, compared pairwise
//! in units of the combined standard error.

use std::fmt::Write as _;

use crate::analysis::Scenario;
use crate::error::{Error, Result};
use crate::estimate::MetricEstimate;
use crate::montecarlo::Workers;
use crate::sweep::{Engine, Metric};

/// Largest accepted distance between two engines, in combined standard
/// errors.
pub const MAX_Z: f64 = 4.0;

pub const MIN_TRIALS: u64 = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub metric: Metric,
    pub engines: (Engine, Engine),
    pub first: MetricEstimate,
    pub second: MetricEstimate,
    /// `|first − second| / √(se₁² + se₂²)`.
    pub z: f64,
}

impl Comparison {
    pub fn passed(&self) -> bool {
        self.z <= MAX_Z
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub scenario: String,
    pub n_trials: u64,
    pub seed: u64,
    pub comparisons: Vec<Comparison>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.comparisons.iter().all(Comparison::passed)
    }

    /// Fixed-width text table, one comparison per line.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario {} ({} trials, seed {})", self.scenario, self.n_trials, self.seed);
        let _ = writeln!(
            out,
            "{:<13} {:<26} {:>14} {:>14} {:>12} {:>8}  {}",
            "metric", "engines", "first", "second", "combined_se", "z", "status"
        );
        for c in &self.comparisons {
            let se = c.first.stderr.hypot(c.second.stderr);
            let _ = writeln!(
                out,
                "{:<13} {:<26} {:>14.6e} {:>14.6e} {:>12.3e} {:>8.3}  {}",
                c.metric.name(),
                format!("{} vs {}", c.engines.0.name(), c.engines.1.name()),
                c.first.value,
                c.second.value,
                se,
                c.z,
                if c.passed() { "ok" } else { "FAIL" }
            );
        }
        out
    }
}

/// Runs all three engines on `scenario` and compares them.
pub fn validate(scenario: &Scenario, n_trials: u64, seed: u64, workers: &Workers) -> Result<ValidationReport> {
    compare(scenario, scenario, n_trials, seed, workers)
}

/// Like [`validate`], but the analytic engine sees `analytic` while the
/// sampling engines see `sampled`. With two different scenarios this checks
/// that the harness notices the mismatch.
pub fn compare(analytic: &Scenario, sampled: &Scenario, n_trials: u64, seed: u64, workers: &Workers) -> Result<ValidationReport> {
    if n_trials < MIN_TRIALS {
        return Err(Error::invalid("n_trials", format!("validation needs at least {MIN_TRIALS} trials")));
    }
    let exact = Engine::Analytic.evaluate(analytic, n_trials, seed, workers)?;
    let mc = Engine::MonteCarlo.evaluate(sampled, n_trials, seed, workers)?;
    let semi = Engine::SemiAnalytic.evaluate(sampled, n_trials, seed, workers)?;

    let get = |list: &[(Metric, MetricEstimate)], m: Metric| list.iter().find(|(k, _)| *k == m).map(|(_, e)| *e);
    let mut comparisons = Vec::new();
    let mut push = |metric, engines, first: Option<MetricEstimate>, second: Option<MetricEstimate>| {
        if let (Some(first), Some(second)) = (first, second) {
            comparisons.push(Comparison {
                metric,
                engines,
                z: first.z_distance(&second),
                first,
                second,
            });
        }
    };
    for m in Metric::ALL {
        push(m, (Engine::Analytic, Engine::MonteCarlo), get(&exact, m), get(&mc, m));
    }
    let c = Metric::Coverage;
    push(c, (Engine::Analytic, Engine::SemiAnalytic), get(&exact, c), get(&semi, c));
    push(c, (Engine::SemiAnalytic, Engine::MonteCarlo), get(&semi, c), get(&mc, c));

    Ok(ValidationReport {
        scenario: sampled.label.clone(),
        n_trials,
        seed,
        comparisons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Preset;

    #[test]
    fn too_few_trials_is_rejected() {
        let sc = Scenario::preset(Preset::Mid);
        assert!(validate(&sc, 100, 1, &Workers::new(1).unwrap()).is_err());
    }
}
