//! Underwater acoustic propagation and the fading model of a single link.
//!
//! Path loss is spreading plus Thorp absorption, referenced to 1 m. Ambient
//! noise is a single-slope power spectral density evaluated at the carrier
//! and multiplied by the bandwidth. The squared channel magnitude `|H|²` is
//! non-central chi-squared with two degrees of freedom (unit per-component
//! variance) and non-centrality `ψ` set by the multipath tap profile.
//!
//! Transmit and jamming powers are given in watts and converted to the
//! noise reference scale with a source level of `source_level_db`
//! dB per watt (170.8 dB re µPa @ 1 m for an omnidirectional projector).

use std::f64::consts::{LN_10, PI};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{marcum_q1_pair, sample_normal};

/// Path-loss reference distance in meters.
pub const REFERENCE_DISTANCE_M: f64 = 1.0;

/// Horizontal reach of the legitimate link; `d_max = √(reach² + ρ²)`.
pub const LINK_REACH_KM: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentConfig {
    pub frequency_khz: f64,
    pub bandwidth_hz: f64,
    pub spreading_factor: f64,
    /// Noise PSD at 1 kHz, dB.
    pub noise_level_db: f64,
    /// Noise PSD slope, in dB per `10·log₁₀(f)` unit.
    pub noise_decay: f64,
    /// Source level produced by one watt of acoustic power, dB.
    pub source_level_db: f64,
    pub depth_km: f64,
    pub dmax_km: f64,
}

impl EnvironmentConfig {
    /// Defaults at water depth `depth_km`, with `d_max = √(10² + ρ²)` km.
    pub fn at_depth(depth_km: f64) -> Self {
        Self {
            frequency_khz: 22.0,
            bandwidth_hz: 10_000.0,
            spreading_factor: 1.5,
            noise_level_db: 50.0,
            noise_decay: 1.8,
            source_level_db: 170.8,
            depth_km,
            dmax_km: default_dmax_km(depth_km),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frequency_khz > 0.0 && self.frequency_khz.is_finite()) {
            return Err(Error::invalid("frequency_khz", "must be positive and finite"));
        }
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return Err(Error::invalid("bandwidth_hz", "must be positive and finite"));
        }
        if !(1.0..=2.0).contains(&self.spreading_factor) {
            return Err(Error::invalid(
                "spreading_factor",
                format!("must lie in [1, 2], got {}", self.spreading_factor),
            ));
        }
        if !self.noise_level_db.is_finite() {
            return Err(Error::invalid("noise_level_db", "must be finite"));
        }
        if !self.noise_decay.is_finite() {
            return Err(Error::invalid("noise_decay", "must be finite"));
        }
        if !self.source_level_db.is_finite() {
            return Err(Error::invalid("source_level_db", "must be finite"));
        }
        if !(self.depth_km * 1000.0 >= REFERENCE_DISTANCE_M && self.depth_km.is_finite()) {
            return Err(Error::invalid("depth_km", "must be at least the 1 m reference distance"));
        }
        if !(self.dmax_km >= self.depth_km && self.dmax_km.is_finite()) {
            return Err(Error::invalid("dmax_km", "must be finite and >= depth_km"));
        }
        Ok(())
    }

    /// Linear power on the noise reference scale for `watts` of acoustic power.
    pub fn source_power(&self, watts: f64) -> f64 {
        watts * 10f64.powf(self.source_level_db / 10.0)
    }
}

pub fn default_dmax_km(depth_km: f64) -> f64 {
    (LINK_REACH_KM * LINK_REACH_KM + depth_km * depth_km).sqrt()
}

/// Thorp absorption in dB/km, `f` in kHz.
pub fn absorption_db_per_km(f_khz: f64) -> Result<f64> {
    if !(f_khz > 0.0 && f_khz.is_finite()) {
        return Err(Error::Domain(format!("frequency must be positive and finite, got {f_khz}")));
    }
    let f2 = f_khz * f_khz;
    Ok(0.11 * f2 / (1.0 + f2) + 44.0 * f2 / (4100.0 + f2) + 2.75e-4 * f2 + 0.003)
}

/// Spreading plus absorption loss in dB at a 3D distance of `d_m` meters.
pub fn pathloss_db(env: &EnvironmentConfig, d_m: f64) -> Result<f64> {
    if !(d_m >= REFERENCE_DISTANCE_M) || !d_m.is_finite() {
        return Err(Error::Domain(format!(
            "distance {d_m} m is below the {REFERENCE_DISTANCE_M} m reference distance"
        )));
    }
    let alpha = absorption_db_per_km(env.frequency_khz)?;
    Ok(env.spreading_factor * 10.0 * d_m.log10() + d_m / 1000.0 * alpha)
}

/// Linear path loss evaluated without going through decibels; used on
/// the Monte Carlo and quadrature hot paths.
#[derive(Debug, Clone, Copy)]
pub struct PathLossModel {
    spreading: f64,
    /// Absorption in nepers of power per km.
    absorption_per_km: f64,
}

impl PathLossModel {
    pub fn new(env: &EnvironmentConfig) -> Result<Self> {
        Ok(Self {
            spreading: env.spreading_factor,
            absorption_per_km: absorption_db_per_km(env.frequency_khz)? * LN_10 / 10.0,
        })
    }

    /// `PL(d)` as a power ratio; `d_m` must be at least 1 m.
    #[inline]
    pub fn linear(&self, d_m: f64) -> f64 {
        d_m.powf(self.spreading) * (self.absorption_per_km * d_m * 1e-3).exp()
    }
}

/// Total in-band noise power `σ² = Δf · 10^{N(f)/10}`.
pub fn noise_power(env: &EnvironmentConfig) -> f64 {
    let psd_db = env.noise_level_db - env.noise_decay * 10.0 * env.frequency_khz.log10();
    env.bandwidth_hz * 10f64.powf(psd_db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tap {
    pub delay_s: f64,
    pub mean_gain: f64,
}

/// Multipath taps of one link; per-path variance is fixed to one.
#[derive(Debug, Clone, PartialEq)]
pub struct TapProfile {
    pub taps: Vec<Tap>,
}

impl Default for TapProfile {
    /// Five paths, 1 ms apart, mean gains halving from 1.
    fn default() -> Self {
        Self {
            taps: (0..5)
                .map(|l| Tap {
                    delay_s: l as f64 * 1e-3,
                    mean_gain: 0.5f64.powi(l),
                })
                .collect(),
        }
    }
}

impl TapProfile {
    pub fn from_parts(delays_s: &[f64], gains: &[f64]) -> Result<Self> {
        if delays_s.len() != gains.len() {
            return Err(Error::invalid("taps", "delay and gain lists differ in length"));
        }
        let p = Self {
            taps: delays_s
                .iter()
                .zip(gains)
                .map(|(&delay_s, &mean_gain)| Tap { delay_s, mean_gain })
                .collect(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.taps.is_empty() {
            return Err(Error::invalid("taps", "at least one tap is required"));
        }
        if self.taps.iter().any(|t| !(t.delay_s >= 0.0 && t.delay_s.is_finite())) {
            return Err(Error::invalid("tap_delays_s", "delays must be finite and >= 0"));
        }
        if self.taps.iter().any(|t| !t.mean_gain.is_finite()) {
            return Err(Error::invalid("tap_gains", "gains must be finite"));
        }
        Ok(())
    }
}

/// Non-centrality of `|H|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingParams {
    pub psi: f64,
}

impl FadingParams {
    pub fn new(psi: f64) -> Result<Self> {
        if !(psi >= 0.0 && psi.is_finite()) {
            return Err(Error::invalid("psi", format!("must be finite and >= 0, got {psi}")));
        }
        Ok(Self { psi })
    }

    pub fn mean(&self) -> f64 {
        2.0 + self.psi
    }
}

/// `ψ = (2/L)·|Σ_l c_l E{h_l}|²` with `c_l = e^{−j2πfξ_l}`.
pub fn psi_from_taps(taps: &TapProfile, f_khz: f64) -> FadingParams {
    let f_hz = 1000.0 * f_khz;
    let sum: Complex64 = taps
        .taps
        .iter()
        .map(|t| Complex64::from_polar(t.mean_gain, -2.0 * PI * f_hz * t.delay_s))
        .sum();
    FadingParams {
        psi: 2.0 / taps.taps.len() as f64 * sum.norm_sqr(),
    }
}

/// One draw of `|H|² = (Z₁ + √ψ)² + Z₂²`.
pub fn sample_fading<R: Rng + ?Sized>(params: &FadingParams, rng: &mut R) -> f64 {
    let re = sample_normal(rng) + params.psi.sqrt();
    let im = sample_normal(rng);
    re * re + im * im
}

/// `P[|H|² ≤ x] = 1 − Q₁(√ψ, √x)`.
pub fn fading_cdf(x: f64, params: &FadingParams) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    Ok(marcum_q1_pair(params.psi.sqrt(), x.sqrt())?.1)
}

/// `E[exp(−s·κ|H|²)] = exp(−ψκs/(1+2κs)) / (1+2κs)`.
pub fn lt_fading(s: Complex64, params: &FadingParams, kappa: f64) -> Result<Complex64> {
    let z = s * kappa;
    let den = 1.0 + 2.0 * z;
    if !(den.re > 0.0) {
        return Err(Error::Domain(format!("Re(1 + 2κs) = {} is not positive", den.re)));
    }
    Ok((-params.psi * z / den).exp() / den)
}

/// `1 − E[exp(−s·κ|H|²)]` without cancellation for small `κs`.
/// Caller guarantees `Re(1 + 2κs) > 0`.
#[inline]
pub fn one_minus_lt_fading(s: Complex64, psi: f64, kappa: f64) -> Complex64 {
    let z = s * kappa;
    let den = 1.0 + 2.0 * z;
    let a = -psi * z / den;
    (2.0 * z - expm1_complex(a)) / den
}

#[inline]
fn expm1_complex(a: Complex64) -> Complex64 {
    let half = (0.5 * a.im).sin();
    Complex64::new(
        a.re.exp_m1() * a.im.cos() - 2.0 * half * half,
        a.re.exp() * a.im.sin(),
    )
}
