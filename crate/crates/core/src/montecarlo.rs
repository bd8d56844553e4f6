//! Monte Carlo engine.
//!
//! One trial is one deployment: a transmitter distance, the legitimate
//! fading, a jammer field and the fading of every jammer, all drawn from
//! the trial's own substream `split_stream(seed, trial_index)`. Trials are
//! grouped into fixed-size chunks and chunk sums are combined in index
//! order, so results are bit-identical for any number of workers.

use std::ops::Range;

use rayon::prelude::*;

use crate::analysis::{energy_efficiency_from_rate, neumaier_add, Scenario};
use crate::error::{Error, Result};
use crate::estimate::MetricEstimate;
use crate::numerics::{split_stream, RandomStream};
use crate::stochgeom::{aggregate_interference, sample_field_into, JammerRealization};
use crate::uwchannel::{noise_power, sample_fading, PathLossModel};

/// Trials per work item. Part of the reproducibility contract: changing it
/// changes the floating-point summation order.
pub const CHUNK_TRIALS: u64 = 2048;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "UWAJAM_THREADS";

/// A worker pool of fixed size.
pub struct Workers {
    pool: rayon::ThreadPool,
}

impl Workers {
    pub fn new(threads: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build()
            .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))?;
        Ok(Self { pool })
    }

    /// Size from `UWAJAM_THREADS`, else the hardware parallelism.
    pub fn from_env() -> Result<Self> {
        let threads = match std::env::var(THREADS_ENV) {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?,
            Err(_) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        };
        Self::new(threads)
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }
}

/// Runs `work` over `0..n` in chunks of [`CHUNK_TRIALS`] and adds the
/// per-chunk sums in chunk order.
pub fn run_chunked<const K: usize, F>(n: u64, workers: &Workers, work: F) -> Result<[f64; K]>
where
    F: Fn(Range<u64>) -> Result<[f64; K]> + Sync,
{
    let chunks = n.div_ceil(CHUNK_TRIALS);
    let partial: Vec<[f64; K]> = workers.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| work(c * CHUNK_TRIALS..((c + 1) * CHUNK_TRIALS).min(n)))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut sum = [0.0; K];
    let mut comp = [0.0; K];
    for p in &partial {
        for k in 0..K {
            neumaier_add(&mut sum[k], &mut comp[k], p[k]);
        }
    }
    for k in 0..K {
        sum[k] += comp[k];
    }
    Ok(sum)
}

#[derive(Debug, Clone)]
pub struct TrialPlan {
    pub n_trials: u64,
    pub seed: u64,
    pub scenario: Scenario,
}

impl TrialPlan {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials < 1 {
            return Err(Error::invalid("n_trials", "at least one trial is required"));
        }
        self.scenario.validate()
    }

    pub fn root(&self) -> RandomStream {
        RandomStream::new(self.seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub sjnr: f64,
    pub d_km: f64,
}

/// Per-scenario constants of the trial loop.
struct Simulator<'a> {
    scenario: &'a Scenario,
    sigma2: f64,
    signal_power: f64,
    pathloss: PathLossModel,
    fixed_distance_km: Option<f64>,
}

impl<'a> Simulator<'a> {
    fn new(scenario: &'a Scenario) -> Result<Self> {
        scenario.validate()?;
        Ok(Self {
            scenario,
            sigma2: noise_power(&scenario.env),
            signal_power: scenario.env.source_power(scenario.link.tx_power),
            pathloss: PathLossModel::new(&scenario.env)?,
            fixed_distance_km: None,
        })
    }

    fn at_distance(mut self, d_km: f64) -> Result<Self> {
        let law = self.scenario.distance_law();
        if !(d_km >= law.dmin_km && d_km <= law.dmax_km) {
            return Err(Error::Domain(format!(
                "distance {d_km} km outside [{}, {}] km",
                law.dmin_km, law.dmax_km
            )));
        }
        self.fixed_distance_km = Some(d_km);
        Ok(self)
    }

    fn trial(&self, stream: RandomStream, jammers: &mut JammerRealization) -> Result<TrialOutcome> {
        let sc = self.scenario;
        let mut rng = stream.generator();
        // The distance draw is consumed even when it is fixed, so a fixed-d
        // run sees the same fading and fields as the full simulation.
        let drawn = sc.distance_law().sample(&mut rng);
        let d_km = self.fixed_distance_km.unwrap_or(drawn);
        let gain = sample_fading(&sc.fading(), &mut rng);
        let zeta = self.signal_power * gain / self.pathloss.linear(1000.0 * d_km);
        sample_field_into(&sc.field, &mut rng, jammers);
        let jam = aggregate_interference(jammers, &sc.field, &sc.env, &mut rng)?;
        Ok(TrialOutcome {
            sjnr: zeta / (jam + self.sigma2),
            d_km,
        })
    }
}

/// One deployment drawn from `rng`.
pub fn run_trial(scenario: &Scenario, rng: RandomStream) -> Result<TrialOutcome> {
    Simulator::new(scenario)?.trial(rng, &mut JammerRealization::default())
}

/// All Monte Carlo metrics from one set of trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationSummary {
    pub coverage: MetricEstimate,
    /// bits/s/Hz
    pub rate: MetricEstimate,
    /// bits/s
    pub rate_bps: MetricEstimate,
    /// bits/J
    pub energy_efficiency: MetricEstimate,
}

pub fn simulate(plan: &TrialPlan, workers: &Workers) -> Result<SimulationSummary> {
    plan.validate()?;
    summarize(plan, &Simulator::new(&plan.scenario)?, workers)
}

/// [`simulate`] with the transmitter held at distance `d_km`.
pub fn simulate_at_distance(plan: &TrialPlan, d_km: f64, workers: &Workers) -> Result<SimulationSummary> {
    plan.validate()?;
    summarize(plan, &Simulator::new(&plan.scenario)?.at_distance(d_km)?, workers)
}

fn summarize(plan: &TrialPlan, sim: &Simulator<'_>, workers: &Workers) -> Result<SimulationSummary> {
    let tau = plan.scenario.link.sjnr_threshold;
    let root = plan.root();
    let sums = run_chunked(plan.n_trials, workers, |range| -> Result<[f64; 3]> {
        let mut jammers = JammerRealization::default();
        let mut covered = 0.0;
        let (mut rate, mut rate_c) = (0.0, 0.0);
        let (mut sq, mut sq_c) = (0.0, 0.0);
        for i in range {
            let t = sim.trial(split_stream(root, i), &mut jammers)?;
            if t.sjnr >= tau {
                covered += 1.0;
            }
            let r = t.sjnr.ln_1p() / std::f64::consts::LN_2;
            neumaier_add(&mut rate, &mut rate_c, r);
            neumaier_add(&mut sq, &mut sq_c, r * r);
        }
        Ok([covered, rate + rate_c, sq + sq_c])
    })?;

    let n = plan.n_trials;
    let nf = n as f64;
    let coverage = MetricEstimate::from_proportion(sums[0] as u64, n);
    let mean = sums[1] / nf;
    let var = if n > 1 {
        ((sums[2] - nf * mean * mean) / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    let rate = MetricEstimate::from_mean(mean, (var / nf).sqrt(), n);
    let sc = &plan.scenario;
    let ee_factor = energy_efficiency_from_rate(sc, 1.0);
    let mut energy_efficiency = rate.scaled(ee_factor);
    energy_efficiency.value = energy_efficiency_from_rate(sc, rate.value);
    Ok(SimulationSummary {
        coverage,
        rate,
        rate_bps: rate.scaled(sc.env.bandwidth_hz),
        energy_efficiency,
    })
}

pub fn estimate_coverage(plan: &TrialPlan, workers: &Workers) -> Result<MetricEstimate> {
    Ok(simulate(plan, workers)?.coverage)
}

/// Mean of `log₂(1 + SJNR)`, bits/s/Hz.
pub fn estimate_rate(plan: &TrialPlan, workers: &Workers) -> Result<MetricEstimate> {
    Ok(simulate(plan, workers)?.rate)
}

/// `Δf · rate / (S_p + P_t)`.
pub fn estimate_ee(plan: &TrialPlan, workers: &Workers) -> Result<MetricEstimate> {
    let sc = &plan.scenario;
    if !(sc.link.static_power + sc.link.tx_power > 0.0) {
        return Err(Error::invalid("static_power", "S_p + P_t must be positive"));
    }
    Ok(simulate(plan, workers)?.energy_efficiency)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Preset;

    fn plan(n: u64) -> TrialPlan {
        TrialPlan {
            n_trials: n,
            seed: 3,
            scenario: Scenario::preset(Preset::Shallow),
        }
    }

    #[test]
    fn chunked_sum_is_order_stable() {
        let w1 = Workers::new(1).unwrap();
        let w3 = Workers::new(3).unwrap();
        let f = |r: Range<u64>| -> Result<[f64; 1]> { Ok([r.map(|i| 1.0 / (1.0 + i as f64)).sum()]) };
        let a = run_chunked(50_000, &w1, f).unwrap();
        let b = run_chunked(50_000, &w3, f).unwrap();
        assert_eq!(a[0].to_bits(), b[0].to_bits());
    }

    #[test]
    fn trial_is_deterministic() {
        let p = plan(1);
        let s = split_stream(p.root(), 17);
        assert_eq!(run_trial(&p.scenario, s).unwrap(), run_trial(&p.scenario, s).unwrap());
    }

    #[test]
    fn zero_transmit_power_gives_zero_sjnr_and_rate() {
        let mut p = plan(3000);
        p.scenario.link.tx_power = 0.0;
        for i in 0..50 {
            assert_eq!(run_trial(&p.scenario, split_stream(p.root(), i)).unwrap().sjnr, 0.0);
        }
        let w = Workers::new(1).unwrap();
        let r = estimate_rate(&p, &w).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.stderr, 0.0);
    }

    #[test]
    fn zero_threshold_is_always_covered() {
        let mut p = plan(5000);
        p.scenario.link.sjnr_threshold = 0.0;
        let c = estimate_coverage(&p, &Workers::new(2).unwrap()).unwrap();
        assert_eq!(c.value, 1.0);
        assert_eq!(c.stderr, 0.0);
    }

    #[test]
    fn no_jammers_means_snr() {
        let mut p = plan(1);
        p.scenario.field.intensity_per_km2 = 0.0;
        let sc = &p.scenario;
        let stream = split_stream(p.root(), 4);
        let t = run_trial(sc, stream).unwrap();
        let mut g = stream.generator();
        let d = sc.distance_law().sample(&mut g);
        let h = sample_fading(&sc.fading(), &mut g);
        let pl = PathLossModel::new(&sc.env).unwrap().linear(1000.0 * d);
        let expect = sc.env.source_power(sc.link.tx_power) * h / pl / noise_power(&sc.env);
        assert_eq!(t.sjnr, expect);
        assert_eq!(t.d_km, d);
    }

    #[test]
    fn ee_is_scaled_rate() {
        let p = plan(4096);
        let s = simulate(&p, &Workers::new(2).unwrap()).unwrap();
        let sc = &p.scenario;
        assert_eq!(
            s.energy_efficiency.value,
            sc.env.bandwidth_hz * s.rate.value / (sc.link.static_power + sc.link.tx_power)
        );
    }

    #[test]
    fn fixed_distance_is_respected() {
        let p = plan(3000);
        let w = Workers::new(1).unwrap();
        let near = simulate_at_distance(&p, 0.5, &w).unwrap();
        let far = simulate_at_distance(&p, 9.0, &w).unwrap();
        assert!(near.rate.value > far.rate.value);
        assert!(simulate_at_distance(&p, 20.0, &w).is_err());
    }

    #[test]
    fn rejects_empty_plan() {
        assert!(simulate(&plan(0), &Workers::new(1).unwrap()).is_err());
    }
}
