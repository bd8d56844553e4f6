//! Parameter sweeps: every (scenario, engine, axis value) cell of a grid,
//! evaluated on the worker pool and written as CSV in a fixed order.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{semianalytic_coverage, Analyzer, Scenario};
use crate::config::ConfigFile;
use crate::error::{Error, Result};
use crate::estimate::MetricEstimate;
use crate::montecarlo::{simulate, TrialPlan, Workers};
use crate::numerics::RandomStream;

/// Stream id of the semi-analytic estimator's root, kept apart from the
/// simulator's so the two estimates are independent for the same seed.
const SEMIANALYTIC_STREAM: u64 = 1;

pub const CSV_HEADER: [&str; 9] = [
    "scenario", "engine", "axis", "axis_value", "metric", "value", "stderr", "ci_lo", "ci_hi",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    TxPower,
    JamPower,
    Intensity,
    Threshold,
}

impl Axis {
    pub const ALL: [Axis; 4] = [Axis::TxPower, Axis::JamPower, Axis::Intensity, Axis::Threshold];

    pub fn name(self) -> &'static str {
        match self {
            Axis::TxPower => "tx_power",
            Axis::JamPower => "jam_power",
            Axis::Intensity => "intensity",
            Axis::Threshold => "threshold",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }

    /// Default grid: 5 to 100 W in steps of 5 for the powers,
    /// {0.01, 0.03} jammers/km² and thresholds {2, 4}.
    pub fn default_values(self) -> Vec<f64> {
        match self {
            Axis::TxPower | Axis::JamPower => (1..=20).map(|k| 5.0 * k as f64).collect(),
            Axis::Intensity => vec![0.01, 0.03],
            Axis::Threshold => vec![2.0, 4.0],
        }
    }

    /// `scenario` with this axis set to `value`.
    pub fn apply(self, scenario: &Scenario, value: f64) -> Scenario {
        let mut sc = scenario.clone();
        match self {
            Axis::TxPower => sc.link.tx_power = value,
            Axis::JamPower => sc.field.jam_power = value,
            Axis::Intensity => sc.field.intensity_per_km2 = value,
            Axis::Threshold => sc.link.sjnr_threshold = value,
        }
        sc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Analytic,
    MonteCarlo,
    SemiAnalytic,
}

impl Engine {
    pub const ALL: [Engine; 3] = [Engine::Analytic, Engine::MonteCarlo, Engine::SemiAnalytic];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::MonteCarlo => "montecarlo",
            Engine::SemiAnalytic => "semianalytic",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    /// Metrics this engine produces, in output order.
    pub fn metrics(self) -> &'static [Metric] {
        match self {
            Engine::Analytic | Engine::MonteCarlo => &Metric::ALL,
            Engine::SemiAnalytic => &[Metric::Coverage],
        }
    }

    /// Evaluates `scenario`. `n_trials` and `seed` are ignored by the
    /// analytic engine.
    pub fn evaluate(self, scenario: &Scenario, n_trials: u64, seed: u64, workers: &Workers) -> Result<Vec<(Metric, MetricEstimate)>> {
        match self {
            Engine::Analytic => {
                let a = Analyzer::new(scenario)?;
                let coverage = a.coverage()?;
                let rate = a.average_rate()?;
                let ee = crate::analysis::energy_efficiency_from_rate(scenario, rate.spectral_efficiency);
                Ok(vec![
                    (Metric::Coverage, MetricEstimate::exact(coverage)),
                    (Metric::AvgRateSe, MetricEstimate::exact(rate.spectral_efficiency)),
                    (Metric::AvgRateBps, MetricEstimate::exact(rate.bits_per_second)),
                    (Metric::Ee, MetricEstimate::exact(ee)),
                ])
            }
            Engine::MonteCarlo => {
                let plan = TrialPlan {
                    n_trials,
                    seed,
                    scenario: scenario.clone(),
                };
                let s = simulate(&plan, workers)?;
                Ok(vec![
                    (Metric::Coverage, s.coverage),
                    (Metric::AvgRateSe, s.rate),
                    (Metric::AvgRateBps, s.rate_bps),
                    (Metric::Ee, s.energy_efficiency),
                ])
            }
            Engine::SemiAnalytic => {
                let root = RandomStream {
                    seed,
                    stream_id: SEMIANALYTIC_STREAM,
                };
                let c = semianalytic_coverage(scenario, n_trials, root, workers)?;
                Ok(vec![(Metric::Coverage, c)])
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Coverage,
    AvgRateSe,
    AvgRateBps,
    Ee,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Coverage, Metric::AvgRateSe, Metric::AvgRateBps, Metric::Ee];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Coverage => "coverage",
            Metric::AvgRateSe => "avg_rate_se",
            Metric::AvgRateBps => "avg_rate_bps",
            Metric::Ee => "ee",
        }
    }
}

/// One output line. `axis` is `"none"` and `axis_value` absent outside
/// sweeps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub scenario: String,
    pub engine: &'static str,
    pub axis: &'static str,
    pub axis_value: Option<f64>,
    pub metric: &'static str,
    pub value: f64,
    pub stderr: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl ResultRow {
    pub fn new(scenario: &str, engine: Engine, axis: Option<(Axis, f64)>, metric: Metric, est: &MetricEstimate) -> Self {
        Self {
            scenario: scenario.to_string(),
            engine: engine.name(),
            axis: axis.map_or("none", |(a, _)| a.name()),
            axis_value: axis.map(|(_, v)| v),
            metric: metric.name(),
            value: est.value,
            stderr: est.stderr,
            ci_lo: est.ci95.0,
            ci_hi: est.ci95.1,
        }
    }

    /// Rows of one engine run, in metric order.
    pub fn from_metrics(scenario: &str, engine: Engine, axis: Option<(Axis, f64)>, metrics: &[(Metric, MetricEstimate)]) -> Vec<Self> {
        metrics
            .iter()
            .map(|(m, est)| Self::new(scenario, engine, axis, *m, est))
            .collect()
    }
}

/// The `[sweep]` table of a config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepTable {
    pub axis: String,
    pub values: Option<Vec<f64>>,
    pub scenarios: Option<Vec<String>>,
    pub engines: Option<Vec<String>>,
    pub n_trials: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
    pub scenarios: Vec<Scenario>,
    pub engines: Vec<Engine>,
    pub n_trials: u64,
    pub seed: u64,
}

pub const DEFAULT_SWEEP_TRIALS: u64 = 100_000;
pub const DEFAULT_SWEEP_SEED: u64 = 1;

impl SweepSpec {
    /// Builds the spec from a config file's `[sweep]` table; scenario names
    /// resolve through [`ConfigFile::scenario_named`].
    pub fn from_config(file: &ConfigFile) -> Result<Self> {
        let table = file
            .sweep
            .as_ref()
            .ok_or_else(|| Error::Config("no [sweep] table".to_string()))?;
        let axis = Axis::parse(&table.axis).ok_or_else(|| {
            Error::invalid("axis", format!("expected tx_power, jam_power, intensity or threshold, got `{}`", table.axis))
        })?;
        let names = table
            .scenarios
            .clone()
            .unwrap_or_else(|| ["shallow", "mid", "deep"].map(String::from).to_vec());
        let scenarios = names
            .iter()
            .map(|n| file.scenario_named(n))
            .collect::<Result<Vec<_>>>()?;
        let engines = match &table.engines {
            None => vec![Engine::Analytic],
            Some(list) => list
                .iter()
                .map(|e| {
                    Engine::parse(e).ok_or_else(|| {
                        Error::invalid("engines", format!("expected analytic, montecarlo or semianalytic, got `{e}`"))
                    })
                })
                .collect::<Result<Vec<_>>>()?,
        };
        let spec = Self {
            axis,
            values: table.values.clone().unwrap_or_else(|| axis.default_values()),
            scenarios,
            engines,
            n_trials: table.n_trials.unwrap_or(DEFAULT_SWEEP_TRIALS),
            seed: table.seed.unwrap_or(DEFAULT_SWEEP_SEED),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid("values", "at least one axis value is required"));
        }
        if self.values.windows(2).any(|w| !(w[0] < w[1])) || self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values", "must be finite and strictly increasing"));
        }
        if self.engines.is_empty() {
            return Err(Error::invalid("engines", "at least one engine is required"));
        }
        if self.scenarios.is_empty() {
            return Err(Error::invalid("scenarios", "at least one scenario is required"));
        }
        if self.engines.iter().any(|e| *e != Engine::Analytic) && self.n_trials < 1 {
            return Err(Error::invalid("n_trials", "must be >= 1"));
        }
        for v in &self.values {
            for sc in &self.scenarios {
                self.axis.apply(sc, *v).validate()?;
            }
        }
        Ok(())
    }
}

/// A cell that could not be evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub scenario: String,
    pub engine: Engine,
    pub axis_value: f64,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct SweepOutcome {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<CellFailure>,
}

/// Evaluates every cell. Monte Carlo cells at different axis values reuse
/// the same seed, so neighbouring points share their random numbers. A
/// failed cell yields NaN rows and a [`CellFailure`].
pub fn run_sweep(spec: &SweepSpec, workers: &Workers) -> Result<SweepOutcome> {
    spec.validate()?;
    let cells: Vec<(&Scenario, Engine, f64)> = spec
        .scenarios
        .iter()
        .flat_map(|sc| {
            spec.engines
                .iter()
                .flat_map(move |&e| spec.values.iter().map(move |&v| (sc, e, v)))
        })
        .collect();

    let results: Vec<Result<Vec<(Metric, MetricEstimate)>>> = workers.install(|| {
        cells
            .par_iter()
            .map(|&(sc, engine, v)| engine.evaluate(&spec.axis.apply(sc, v), spec.n_trials, spec.seed, workers))
            .collect()
    });

    let mut out = SweepOutcome::default();
    for ((sc, engine, v), result) in cells.into_iter().zip(results) {
        let axis = Some((spec.axis, v));
        match result {
            Ok(metrics) => out.rows.extend(ResultRow::from_metrics(&sc.label, engine, axis, &metrics)),
            Err(e) => {
                let nan = MetricEstimate {
                    value: f64::NAN,
                    stderr: f64::NAN,
                    ci95: (f64::NAN, f64::NAN),
                    n: 0,
                };
                for &m in engine.metrics() {
                    out.rows.push(ResultRow::new(&sc.label, engine, axis, m, &nan));
                }
                out.failures.push(CellFailure {
                    scenario: sc.label.clone(),
                    engine,
                    axis_value: v,
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(out)
}

/// Writes `rows` as CSV under [`CSV_HEADER`].
pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(CSV_HEADER).map_err(err)?;
    for r in rows {
        w.write_record([
            r.scenario.clone(),
            r.engine.to_string(),
            r.axis.to_string(),
            r.axis_value.map_or(String::new(), format_number),
            r.metric.to_string(),
            format_number(r.value),
            format_number(r.stderr),
            format_number(r.ci_lo),
            format_number(r.ci_hi),
        ])
        .map_err(err)?;
    }
    w.flush()?;
    Ok(())
}

/// Runs the sweep and writes the CSV to `path`.
pub fn run_sweep_to_file(spec: &SweepSpec, path: &Path, workers: &Workers) -> Result<SweepOutcome> {
    let outcome = run_sweep(spec, workers)?;
    let file = std::fs::File::create(path)?;
    write_csv(&outcome.rows, std::io::BufWriter::new(file))?;
    Ok(outcome)
}

/// Shortest decimal that parses back to the same `f64`, independent of
/// locale.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x}")
    }
}
