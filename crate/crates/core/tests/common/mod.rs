//! Oracles shared by the integration tests, written independently of the
//! library's own numerics.

#![allow(dead_code)]

use std::f64::consts::PI;

use uwajam::analysis::Scenario;
use uwajam::uwchannel::TapProfile;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `e^x E₁(x)` for `x > 0`: power series up to 1, continued fraction above.
pub fn exp_e1(x: f64) -> f64 {
    assert!(x > 0.0);
    if x <= 1.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..60 {
            term *= -x / k as f64;
            sum += term / k as f64;
        }
        (-EULER_GAMMA - x.ln() - sum) * x.exp()
    } else {
        // Modified Lentz on 1/(x+1− 1²/(x+3− 2²/(x+5− ...))).
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..1000 {
            let a = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h
    }
}

/// `I₀(x)·e^{−x}` from the power series (fine for x ≤ 60).
pub fn bessel_i0_scaled(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..400 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum * (-x).exp()
}

/// Density of the non-central chi-squared law, 2 degrees of freedom.
pub fn ncx2_pdf(x: f64, psi: f64) -> f64 {
    let z = (psi * x).sqrt();
    0.5 * (-(x + psi) / 2.0 + z).exp() * bessel_i0_scaled(z)
}

/// Composite Simpson rule on `n` (even) intervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// `P[X ≤ b²]` for the non-central chi-squared, by Simpson on the density
/// in `y = √x`.
pub fn ncx2_cdf_by_quadrature(b2: f64, psi: f64) -> f64 {
    simpson(|y| 2.0 * y * ncx2_pdf(y * y, psi), 0.0, b2.sqrt(), 20_000)
}

pub fn normal_tail(x: f64) -> f64 {
    0.5 * erfc(x / 2f64.sqrt())
}

pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 3.0 {
        let mut term = x;
        let mut sum = x;
        for n in 1..200 {
            term *= -x * x / n as f64;
            let add = term / (2 * n + 1) as f64;
            sum += add;
            if add.abs() < 1e-17 {
                break;
            }
        }
        1.0 - 2.0 / PI.sqrt() * sum
    } else {
        let tiny = 1e-300;
        let mut f = x;
        let mut c = x;
        let mut d = 0.0;
        for n in 1..500 {
            let a = n as f64 / 2.0;
            d = x + a * d;
            d = if d == 0.0 { tiny } else { 1.0 / d };
            c = x + a / c;
            let del = c * d;
            f *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        (-x * x).exp() / PI.sqrt() / f
    }
}

/// `base` with a Rayleigh (ψ = 0) legitimate link and no jammers.
pub fn rayleigh_no_jammers(base: &Scenario) -> Scenario {
    let mut sc = base.clone();
    sc.taps = TapProfile::from_parts(&[0.0], &[0.0]).unwrap();
    sc.field.intensity_per_km2 = 0.0;
    sc
}

/// `base` without jammers.
pub fn no_jammers(base: &Scenario) -> Scenario {
    let mut sc = base.clone();
    sc.field.intensity_per_km2 = 0.0;
    sc
}

/// `|a − b|` in units of `se`.
pub fn z(a: f64, b: f64, se: f64) -> f64 {
    (a - b).abs() / se
}

/// Sample mean and standard error.
pub fn mean_se(xs: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let (mut n, mut s, mut s2) = (0.0, 0.0, 0.0);
    for x in xs {
        n += 1.0;
        s += x;
        s2 += x * x;
    }
    let m = s / n;
    let var = ((s2 - n * m * m) / (n - 1.0)).max(0.0);
    (m, (var / n).sqrt())
}

/// Linear path loss from the formulas directly (`d_m` in meters).
pub fn pathloss_oracle(env: &uwajam::uwchannel::EnvironmentConfig, d_m: f64) -> f64 {
    let f2 = env.frequency_khz * env.frequency_khz;
    let alpha = 0.11 * f2 / (1.0 + f2) + 44.0 * f2 / (4100.0 + f2) + 2.75e-4 * f2 + 0.003;
    10f64.powf((env.spreading_factor * 10.0 * d_m.log10() + d_m / 1000.0 * alpha) / 10.0)
}

/// `σ²` from the formulas directly.
pub fn noise_oracle(env: &uwajam::uwchannel::EnvironmentConfig) -> f64 {
    env.bandwidth_hz * 10f64.powf((env.noise_level_db - env.noise_decay * 10.0 * env.frequency_khz.log10()) / 10.0)
}

/// Mean received signal scale `P_t / PL(d)` on the noise scale.
pub fn kappa_signal(sc: &Scenario, d_km: f64) -> f64 {
    sc.env.source_power(sc.link.tx_power) / pathloss_oracle(&sc.env, 1000.0 * d_km)
}

/// No-jammer coverage at distance `d`: `Q₁(√ψ, √(τσ²/κ))`.
pub fn coverage_no_jammers(sc: &Scenario, d_km: f64) -> f64 {
    let psi = sc.fading().psi;
    let b2 = sc.link.sjnr_threshold * noise_oracle(&sc.env) / kappa_signal(sc, d_km);
    uwajam::numerics::marcum_q1(psi.sqrt(), b2.sqrt()).unwrap()
}

/// Rayleigh, no-jammer rate at distance `d` in bits/s/Hz:
/// `e^{x}E₁(x)/ln 2` with `x = σ²/(2κ)`.
pub fn rate_rayleigh_no_jammers(sc: &Scenario, d_km: f64) -> f64 {
    let x = noise_oracle(&sc.env) / (2.0 * kappa_signal(sc, d_km));
    exp_e1(x) / std::f64::consts::LN_2
}

/// Average of `f(d)` under the uniform distance law, by Simpson.
pub fn distance_average(sc: &Scenario, f: impl Fn(f64) -> f64) -> f64 {
    let (lo, hi) = (0.001, sc.env.dmax_km);
    simpson(f, lo, hi, 20_000) / (hi - lo)
}
