//! Analytic engine: coverage probability by Gil-Pelaez inversion, average
//! rate by Hamdi's lemma and energy efficiency, all as deterministic
//! quadratures over the Laplace transforms of the received signal and of
//! the aggregate jamming.
//!
//! Coverage at distance `d` is `P[ζ − τJ > τσ²]`; the characteristic
//! function of `U = ζ − τJ` factors as `L_ζ(−it) · L_J(iτt)` because the
//! legitimate fading and the jammer field are independent. The average rate
//! at distance `d` is
//!
//! ```text
//! ∫₀^∞ L_J(s) (1 − L_ζ(s)) e^{−σ²s} / s ds      (nats)
//! ```
//!
//! Both inner integrals run over many decades of their variable and are
//! evaluated in logarithmic coordinates with decade panel edges, so that
//! the jamming transform, which does not depend on `d`, is requested at
//! the same arguments for every distance and can be cached.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::LN_2;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::estimate::MetricEstimate;
use crate::montecarlo::{run_chunked, Workers};
use crate::numerics::{
    integrate_panels, marcum_q1, sample_uniform, split_stream, try_gil_pelaez_tail, QuadratureSpec,
    RandomStream,
};
use crate::stochgeom::{aggregate_interference, sample_field_into, InterferenceKernel, JammerField, JammerRealization, DEFAULT_TRUNC_RADIUS_KM};
use crate::uwchannel::{
    lt_fading, noise_power, one_minus_lt_fading, psi_from_taps, EnvironmentConfig, FadingParams, PathLossModel,
    TapProfile, REFERENCE_DISTANCE_M,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkConfig {
    /// Transmit power, watts.
    pub tx_power: f64,
    /// Target SJNR (linear).
    pub sjnr_threshold: f64,
    /// Static power consumption, watts.
    pub static_power: f64,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            tx_power: 20.0,
            sjnr_threshold: 2.0,
            static_power: 1.5,
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tx_power >= 0.0 && self.tx_power.is_finite()) {
            return Err(Error::invalid("tx_power", "must be finite and >= 0"));
        }
        if !(self.sjnr_threshold >= 0.0 && self.sjnr_threshold.is_finite()) {
            return Err(Error::invalid("sjnr_threshold", "must be finite and >= 0"));
        }
        if !(self.static_power >= 0.0 && self.static_power.is_finite()) {
            return Err(Error::invalid("static_power", "must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Water-depth presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Preset {
    Shallow,
    Mid,
    Deep,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Shallow, Preset::Mid, Preset::Deep];

    pub fn depth_km(self) -> f64 {
        match self {
            Preset::Shallow => 0.1,
            Preset::Mid => 1.0,
            Preset::Deep => 2.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Shallow => "shallow",
            Preset::Mid => "mid",
            Preset::Deep => "deep",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything needed to evaluate one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub label: String,
    pub env: EnvironmentConfig,
    pub field: JammerField,
    pub link: LinkConfig,
    pub taps: TapProfile,
}

impl Scenario {
    /// Defaults for a depth preset: 20 W transmitter and jammers, τ = 2,
    /// 0.01 jammers/km², jammer fading equal to the link's.
    pub fn preset(preset: Preset) -> Self {
        let env = EnvironmentConfig::at_depth(preset.depth_km());
        let taps = TapProfile::default();
        let psi = psi_from_taps(&taps, env.frequency_khz);
        Self {
            label: preset.name().to_string(),
            env,
            field: JammerField {
                intensity_per_km2: 0.01,
                jam_power: 20.0,
                depth_km: env.depth_km,
                trunc_radius_km: DEFAULT_TRUNC_RADIUS_KM,
                jammer_fading: psi,
            },
            link: LinkConfig::default(),
            taps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.field.validate()?;
        self.link.validate()?;
        self.taps.validate()?;
        if self.env.depth_km != self.field.depth_km {
            return Err(Error::invalid("depth_km", "environment and jammer field disagree on depth"));
        }
        Ok(())
    }

    /// Non-centrality of the legitimate link.
    pub fn fading(&self) -> FadingParams {
        psi_from_taps(&self.taps, self.env.frequency_khz)
    }

    pub fn distance_law(&self) -> DistanceLaw {
        DistanceLaw {
            dmin_km: REFERENCE_DISTANCE_M / 1000.0,
            dmax_km: self.env.dmax_km,
        }
    }
}

/// Uniform law of the transmitter-receiver distance, bounded below by the
/// path-loss reference distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceLaw {
    pub dmin_km: f64,
    pub dmax_km: f64,
}

impl DistanceLaw {
    pub fn density(&self) -> f64 {
        1.0 / (self.dmax_km - self.dmin_km)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.dmin_km + (self.dmax_km - self.dmin_km) * sample_uniform(rng)
    }
}

/// Tolerances of the three nesting levels.
#[derive(Debug, Clone, Copy)]
pub struct AnalysisOptions {
    /// Distance average.
    pub outer: QuadratureSpec,
    /// Gil-Pelaez and Hamdi integrals.
    pub inner: QuadratureSpec,
    /// Radial integral inside the jamming transform.
    pub radial: QuadratureSpec,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            outer: QuadratureSpec::with_tol(1e-7, 1e-9),
            inner: QuadratureSpec::with_tol(1e-9, 1e-10),
            radial: QuadratureSpec::with_tol(1e-10, 1e-14),
        }
    }
}

/// Average rate in both reporting units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateValue {
    /// bits/s/Hz
    pub spectral_efficiency: f64,
    /// bits/s, i.e. `Δf ×` spectral efficiency
    pub bits_per_second: f64,
}

/// Evaluates the analytic metrics of one scenario, caching jamming
/// transform values across distances.
pub struct Analyzer<'a> {
    scenario: &'a Scenario,
    opts: AnalysisOptions,
    sigma2: f64,
    fading: FadingParams,
    signal_power: f64,
    pathloss: PathLossModel,
    kernel: InterferenceKernel,
    law: DistanceLaw,
    cache: RefCell<HashMap<(u64, u64), Complex64>>,
}

impl<'a> Analyzer<'a> {
    pub fn new(scenario: &'a Scenario) -> Result<Self> {
        Self::with_options(scenario, AnalysisOptions::default())
    }

    /// The analytic engine needs a strictly positive transmit power and
    /// threshold; the limits at zero are left to the simulator.
    pub fn with_options(scenario: &'a Scenario, opts: AnalysisOptions) -> Result<Self> {
        scenario.validate()?;
        if scenario.link.tx_power <= 0.0 {
            return Err(Error::invalid("tx_power", "must be positive for the analytic engine"));
        }
        if scenario.link.sjnr_threshold <= 0.0 {
            return Err(Error::invalid("sjnr_threshold", "must be positive for the analytic engine"));
        }
        Ok(Self {
            scenario,
            opts,
            sigma2: noise_power(&scenario.env),
            fading: scenario.fading(),
            signal_power: scenario.env.source_power(scenario.link.tx_power),
            pathloss: PathLossModel::new(&scenario.env)?,
            kernel: InterferenceKernel::new(&scenario.field, &scenario.env)?,
            law: scenario.distance_law(),
            cache: RefCell::new(HashMap::new()),
        })
    }

    pub fn noise_power(&self) -> f64 {
        self.sigma2
    }

    /// Mean received signal scale `κ = P_t / PL(d)`.
    pub fn signal_kappa(&self, d_km: f64) -> Result<f64> {
        let d_m = d_km * 1000.0;
        if !(d_m >= REFERENCE_DISTANCE_M) || !(d_km <= self.law.dmax_km * (1.0 + 1e-12)) {
            return Err(Error::Domain(format!(
                "distance {d_km} km outside [{}, {}] km",
                self.law.dmin_km, self.law.dmax_km
            )));
        }
        Ok(self.signal_power / self.pathloss.linear(d_m))
    }

    /// `L_J(s)`, memoised on the exact argument.
    pub fn lt_jamming(&self, s: Complex64) -> Result<Complex64> {
        let key = (s.re.to_bits(), s.im.to_bits());
        if let Some(v) = self.cache.borrow().get(&key) {
            return Ok(*v);
        }
        let v = self.kernel.lt(s, &self.opts.radial)?;
        self.cache.borrow_mut().insert(key, v);
        Ok(v)
    }

    pub fn conditional_coverage(&self, d_km: f64) -> Result<f64> {
        let kappa = self.signal_kappa(d_km)?;
        let tau = self.scenario.link.sjnr_threshold;
        let u = tau * self.sigma2;
        let psi = self.fading.psi;
        let cf = |t: f64| -> Result<Complex64> {
            let signal = lt_fading(Complex64::new(0.0, -t), &FadingParams { psi }, kappa)?;
            let jam = self.lt_jamming(Complex64::new(0.0, tau * t))?;
            Ok(signal * jam)
        };
        let tail = try_gil_pelaez_tail(cf, u, u, &self.opts.inner)
            .map_err(|e| e.context(format!("coverage inversion at d = {d_km} km")))?;
        if tail.clamp_departure(self.opts.inner.rel_tol) {
            log::warn!(
                "coverage inversion at d = {d_km} km left [0, 1]: raw {} clamped to {}",
                tail.raw,
                tail.value
            );
        }
        Ok(tail.value)
    }

    pub fn coverage(&self) -> Result<f64> {
        self.distance_average(|d| self.conditional_coverage(d))
    }

    /// Conditional average rate in bits/s/Hz.
    pub fn conditional_rate(&self, d_km: f64) -> Result<f64> {
        let kappa = self.signal_kappa(d_km)? / self.sigma2;
        let psi = self.fading.psi;
        let growth = self.fading.mean() * kappa;
        // Below 10^lo the integrand is (2 + ψ)κ s to within the tolerance.
        let lo = ((1e-3 * self.opts.inner.abs_tol / growth).log10().floor() as i32).min(-1);
        let integrand = |w: f64| -> Result<f64> {
            let s = w.exp();
            let jam = self.lt_jamming(Complex64::new(s / self.sigma2, 0.0))?;
            let gain = one_minus_lt_fading(Complex64::new(s, 0.0), psi, kappa);
            Ok((jam * gain).re * (-s).exp())
        };
        let points: Vec<f64> = (lo..=2).map(|k| 10f64.powi(k).ln()).collect();
        let patch = integrand(points[0])?;
        let q = integrate_panels(integrand, &points, &self.opts.inner)
            .map_err(|e| e.context(format!("rate integral at d = {d_km} km")))?;
        Ok((patch + q.value) / LN_2)
    }

    pub fn average_rate(&self) -> Result<RateValue> {
        let se = self.distance_average(|d| self.conditional_rate(d))?;
        Ok(RateValue {
            spectral_efficiency: se,
            bits_per_second: se * self.scenario.env.bandwidth_hz,
        })
    }

    /// Delivered bits per joule: `Δf · AR / (S_p + P_t)`.
    pub fn energy_efficiency(&self) -> Result<f64> {
        Ok(energy_efficiency_from_rate(self.scenario, self.average_rate()?.spectral_efficiency))
    }

    fn distance_average<F>(&self, mut f: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let (lo, hi) = (self.law.dmin_km, self.law.dmax_km);
        let points: Vec<f64> = (0..=4).map(|i| lo + (hi - lo) * i as f64 / 4.0).collect();
        let q = integrate_panels(|d: f64| f(d.min(hi)), &points, &self.opts.outer)?;
        Ok(q.value * self.law.density())
    }
}

pub(crate) fn energy_efficiency_from_rate(scenario: &Scenario, spectral_efficiency: f64) -> f64 {
    scenario.env.bandwidth_hz * spectral_efficiency / (scenario.link.static_power + scenario.link.tx_power)
}

pub fn conditional_coverage(d_km: f64, scenario: &Scenario) -> Result<f64> {
    Analyzer::new(scenario)?.conditional_coverage(d_km)
}

pub fn coverage(scenario: &Scenario) -> Result<f64> {
    Analyzer::new(scenario)?.coverage()
}

pub fn conditional_rate(d_km: f64, scenario: &Scenario) -> Result<f64> {
    Analyzer::new(scenario)?.conditional_rate(d_km)
}

pub fn average_rate(scenario: &Scenario) -> Result<RateValue> {
    Analyzer::new(scenario)?.average_rate()
}

pub fn energy_efficiency(scenario: &Scenario) -> Result<f64> {
    Analyzer::new(scenario)?.energy_efficiency()
}

/// Coverage as the expectation, over sampled distances and jammer fields,
/// of the closed-form Marcum tail of the legitimate fading:
/// `E[Q₁(√ψ, √(PL(d)·τ·(J + σ²)/P_t))]`.
///
/// This shares no code path with the Gil-Pelaez inversion beyond the
/// channel model, and serves as a third estimator.
pub fn semianalytic_coverage(scenario: &Scenario, n_fields: u64, rng: RandomStream, workers: &Workers) -> Result<MetricEstimate> {
    scenario.validate()?;
    if n_fields < 1000 {
        return Err(Error::invalid("n_fields", "at least 1000 field draws are required"));
    }
    let sigma2 = noise_power(&scenario.env);
    let a = scenario.fading().psi.sqrt();
    let tau = scenario.link.sjnr_threshold;
    let signal_power = scenario.env.source_power(scenario.link.tx_power);
    let pathloss = PathLossModel::new(&scenario.env)?;
    let law = scenario.distance_law();

    let sums = run_chunked(n_fields, workers, |range| -> Result<[f64; 2]> {
        let mut acc = [0.0f64; 2];
        let mut comp = [0.0f64; 2];
        let mut field = JammerRealization::default();
        for i in range {
            let mut g = split_stream(rng, i).generator();
            let d = law.sample(&mut g);
            sample_field_into(&scenario.field, &mut g, &mut field);
            let jam = aggregate_interference(&field, &scenario.field, &scenario.env, &mut g)?;
            let b2 = pathloss.linear(1000.0 * d) * tau * (jam + sigma2) / signal_power;
            let q = marcum_q1(a, b2.sqrt())?;
            neumaier_add(&mut acc[0], &mut comp[0], q);
            neumaier_add(&mut acc[1], &mut comp[1], q * q);
        }
        Ok([acc[0] + comp[0], acc[1] + comp[1]])
    })?;
    let n = n_fields as f64;
    let mean = sums[0] / n;
    let var = ((sums[1] - n * mean * mean) / (n - 1.0)).max(0.0);
    let mut est = MetricEstimate::from_mean(mean, (var / n).sqrt(), n_fields);
    est.ci95 = (est.ci95.0.max(0.0), est.ci95.1.min(1.0));
    Ok(est)
}

#[inline]
pub(crate) fn neumaier_add(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_defaults() {
        let s = Scenario::preset(Preset::Shallow);
        assert_eq!(s.env.depth_km, 0.1);
        assert!((s.env.dmax_km - 100.01f64.sqrt()).abs() < 1e-12);
        let d = Scenario::preset(Preset::Deep);
        assert!((d.env.dmax_km - 104f64.sqrt()).abs() < 1e-12);
        assert!(s.validate().is_ok());
    }

    #[test]
    fn scenario_rejects_depth_mismatch() {
        let mut s = Scenario::preset(Preset::Mid);
        s.field.depth_km = 0.5;
        assert!(s.validate().is_err());
    }

    #[test]
    fn link_validation() {
        let bad = LinkConfig { tx_power: -1.0, ..Default::default() };
        assert!(matches!(bad.validate(), Err(Error::Invalid { field: "tx_power", .. })));
        let bad = LinkConfig { static_power: -1.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn distance_outside_law_is_rejected() {
        let s = Scenario::preset(Preset::Shallow);
        let a = Analyzer::new(&s).unwrap();
        assert!(a.conditional_coverage(0.0).is_err());
        assert!(a.conditional_coverage(20.0).is_err());
    }

    #[test]
    fn neumaier_recovers_small_terms() {
        let (mut s, mut c) = (0.0, 0.0);
        for x in [1e16, 1.0, -1e16, 1.0] {
            neumaier_add(&mut s, &mut c, x);
        }
        assert_eq!(s + c, 2.0);
    }

    #[test]
    fn ee_doubles_when_power_halves() {
        let mut s = Scenario::preset(Preset::Shallow);
        s.link.static_power = 1.5;
        s.link.tx_power = 20.0;
        let a = energy_efficiency_from_rate(&s, 3.0);
        s.link.static_power = 3.0;
        s.link.tx_power = 40.0;
        let b = energy_efficiency_from_rate(&s, 3.0);
        assert!((a / b - 2.0).abs() < 1e-15);
    }
}
