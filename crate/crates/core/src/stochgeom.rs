//! Seabed jammer field: a homogeneous Poisson point process on the plane at
//! depth `ρ`, centred on the surface receiver's vertical projection.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{integrate_panels, sample_poisson, sample_uniform, QuadratureSpec};
use crate::uwchannel::{one_minus_lt_fading, pathloss_db, sample_fading, EnvironmentConfig, FadingParams, PathLossModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JammerField {
    /// Jammers per km² of seabed.
    pub intensity_per_km2: f64,
    /// Jamming power per node, watts.
    pub jam_power: f64,
    pub depth_km: f64,
    /// Radius of the disk sampled in simulation and integrated analytically.
    pub trunc_radius_km: f64,
    pub jammer_fading: FadingParams,
}

pub const DEFAULT_TRUNC_RADIUS_KM: f64 = 50.0;

impl JammerField {
    pub fn validate(&self) -> Result<()> {
        if !(self.intensity_per_km2 >= 0.0 && self.intensity_per_km2.is_finite()) {
            return Err(Error::invalid("intensity_per_km2", "must be finite and >= 0"));
        }
        if !(self.jam_power >= 0.0 && self.jam_power.is_finite()) {
            return Err(Error::invalid("jam_power", "must be finite and >= 0"));
        }
        if !(self.trunc_radius_km > 0.0 && self.trunc_radius_km.is_finite()) {
            return Err(Error::invalid("trunc_radius_km", "must be positive and finite"));
        }
        if !(self.depth_km * 1000.0 >= 1.0 && self.depth_km.is_finite()) {
            return Err(Error::invalid("depth_km", "must be at least the 1 m reference distance"));
        }
        FadingParams::new(self.jammer_fading.psi).map(|_| ())
    }

    /// Expected number of jammers inside the truncation disk.
    pub fn mean_count(&self) -> f64 {
        self.intensity_per_km2 * PI * self.trunc_radius_km * self.trunc_radius_km
    }
}

/// Horizontal distances (km) of one field draw.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct JammerRealization {
    pub radii_km: Vec<f64>,
}

pub fn sample_field<R: Rng + ?Sized>(field: &JammerField, rng: &mut R) -> JammerRealization {
    let mut out = JammerRealization::default();
    sample_field_into(field, rng, &mut out);
    out
}

/// [`sample_field`] reusing `out`'s allocation.
pub fn sample_field_into<R: Rng + ?Sized>(field: &JammerField, rng: &mut R, out: &mut JammerRealization) {
    out.radii_km.clear();
    let n = sample_poisson(field.mean_count(), rng);
    let radius = field.trunc_radius_km;
    out.radii_km.extend((0..n).map(|_| {
        // 1 − U keeps the draw in (0, R].
        radius * (1.0 - sample_uniform(rng)).sqrt()
    }));
}

pub fn jammer_pathloss_db(r_km: f64, field: &JammerField, env: &EnvironmentConfig) -> Result<f64> {
    if !(r_km >= 0.0) {
        return Err(Error::Domain(format!("horizontal distance must be >= 0, got {r_km}")));
    }
    pathloss_db(env, 1000.0 * r_km.hypot(field.depth_km))
}

/// `J = P_J Σ_j |H_j|² / PL_j(r_j)` with fresh fading per jammer.
pub fn aggregate_interference<R: Rng + ?Sized>(
    realization: &JammerRealization,
    field: &JammerField,
    env: &EnvironmentConfig,
    rng: &mut R,
) -> Result<f64> {
    let pl = PathLossModel::new(env)?;
    let power = env.source_power(field.jam_power);
    Ok(realization
        .radii_km
        .iter()
        .map(|&r| {
            let gain = sample_fading(&field.jammer_fading, rng);
            power * gain / pl.linear(1000.0 * r.hypot(field.depth_km))
        })
        .sum())
}

/// Precomputed radial kernel of the jamming Laplace transform,
/// `ln L_J(s) = −2πλ ∫₀^R [1 − L_{|H|²}(s·κ(r))] r dr`, `κ(r) = P_J / PL_j(r)`.
#[derive(Debug, Clone)]
pub struct InterferenceKernel {
    intensity: f64,
    psi: f64,
    power: f64,
    depth_km: f64,
    pathloss: PathLossModel,
    breaks: Vec<f64>,
}

impl InterferenceKernel {
    pub fn new(field: &JammerField, env: &EnvironmentConfig) -> Result<Self> {
        field.validate()?;
        let radius = field.trunc_radius_km;
        // Geometric panel edges: the transition radius where κ(r)|s| ≈ 1
        // moves over several decades as s varies.
        let mut breaks = vec![0.0];
        let mut edge = field.depth_km.min(0.05);
        while edge < radius {
            breaks.push(edge);
            edge *= 2.0;
        }
        breaks.push(radius);
        Ok(Self {
            intensity: field.intensity_per_km2,
            psi: field.jammer_fading.psi,
            power: env.source_power(field.jam_power),
            depth_km: field.depth_km,
            pathloss: PathLossModel::new(env)?,
            breaks,
        })
    }

    /// `κ(r)` for a jammer at horizontal distance `r_km`.
    #[inline]
    pub fn kappa(&self, r_km: f64) -> f64 {
        self.power / self.pathloss.linear(1000.0 * r_km.hypot(self.depth_km))
    }

    /// `ln L_J(s)`.
    pub fn log_lt(&self, s: Complex64, spec: &QuadratureSpec) -> Result<Complex64> {
        if self.intensity == 0.0 || self.power == 0.0 || s == Complex64::new(0.0, 0.0) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if s.re < 0.0 && 1.0 + 2.0 * self.kappa(0.0) * s.re <= 0.0 {
            return Err(Error::Domain(format!(
                "jamming transform undefined at s = {s}: Re(1 + 2κs) <= 0 for the nearest jammers"
            )));
        }
        let q = integrate_panels(
            |r: f64| Ok(one_minus_lt_fading(s, self.psi, self.kappa(r)) * r),
            &self.breaks,
            spec,
        )?;
        Ok(-2.0 * PI * self.intensity * q.value)
    }

    pub fn lt(&self, s: Complex64, spec: &QuadratureSpec) -> Result<Complex64> {
        Ok(self.log_lt(s, spec)?.exp())
    }
}

/// `L_J(s) = E[e^{−sJ}]` via the probability generating functional of the
/// PPP, integrated radially over the truncation disk.
pub fn lt_interference(
    s: Complex64,
    field: &JammerField,
    env: &EnvironmentConfig,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    InterferenceKernel::new(field, env)?.lt(s, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RandomStream;
    use crate::uwchannel::absorption_db_per_km;

    fn field(lambda: f64) -> JammerField {
        JammerField {
            intensity_per_km2: lambda,
            jam_power: 20.0,
            depth_km: 2.0,
            trunc_radius_km: DEFAULT_TRUNC_RADIUS_KM,
            jammer_fading: FadingParams::new(1.5).unwrap(),
        }
    }

    #[test]
    fn pathloss_geometry() {
        let env = EnvironmentConfig::at_depth(2.0);
        let f = field(0.01);
        let below = jammer_pathloss_db(0.0, &f, &env).unwrap();
        assert!((below - pathloss_db(&env, 2000.0).unwrap()).abs() < 1e-12);
        let diag = jammer_pathloss_db(2.0, &f, &env).unwrap();
        assert!((diag - pathloss_db(&env, 2000.0 * 2f64.sqrt()).unwrap()).abs() < 1e-9);
        // ρ = 2, r = 3: 15·log10(3605.55) + 3.60555·α(22) = 53.354 + 17.638
        let d = 13f64.sqrt();
        let expect = 15.0 * (1000.0 * d).log10() + d * absorption_db_per_km(22.0).unwrap();
        let got = jammer_pathloss_db(3.0, &f, &env).unwrap();
        assert!((got - expect).abs() < 1e-10);
        assert!((got - 70.9915).abs() < 1e-3);
    }

    #[test]
    fn empty_field() {
        let env = EnvironmentConfig::at_depth(2.0);
        let f = field(0.0);
        let mut rng = RandomStream::new(5).generator();
        for _ in 0..100 {
            let real = sample_field(&f, &mut rng);
            assert!(real.radii_km.is_empty());
            assert_eq!(aggregate_interference(&real, &f, &env, &mut rng).unwrap(), 0.0);
        }
        let spec = QuadratureSpec::default();
        for s in [0.0, 1e-6, 1.0] {
            assert_eq!(lt_interference(Complex64::new(s, 0.0), &f, &env, &spec).unwrap(), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn radii_stay_inside_disk() {
        let f = JammerField { trunc_radius_km: 3.0, ..field(0.5) };
        let mut rng = RandomStream::new(9).generator();
        for _ in 0..200 {
            let real = sample_field(&f, &mut rng);
            assert!(real.radii_km.iter().all(|&r| r > 0.0 && r <= 3.0));
        }
    }

    #[test]
    fn single_jammer_term() {
        let env = EnvironmentConfig::at_depth(2.0);
        let f = field(0.01);
        let real = JammerRealization { radii_km: vec![1.5] };
        // A fading with zero variance is not available; check linearity instead:
        // J / gain equals P_J / PL_j(r).
        let mut rng = RandomStream::new(1).generator();
        let j = aggregate_interference(&real, &f, &env, &mut rng).unwrap();
        let mut rng = RandomStream::new(1).generator();
        let gain = sample_fading(&f.jammer_fading, &mut rng);
        let pl = 10f64.powf(jammer_pathloss_db(1.5, &f, &env).unwrap() / 10.0);
        assert!((j / (env.source_power(20.0) * gain / pl) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transform_at_zero_is_one() {
        let env = EnvironmentConfig::at_depth(2.0);
        let v = lt_interference(Complex64::new(0.0, 0.0), &field(0.03), &env, &QuadratureSpec::default()).unwrap();
        assert_eq!(v, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn rejects_left_half_plane_beyond_analyticity() {
        let env = EnvironmentConfig::at_depth(2.0);
        let err = lt_interference(Complex64::new(-1.0, 0.0), &field(0.03), &env, &QuadratureSpec::default());
        assert!(matches!(err, Err(Error::Domain(_))));
    }

    #[test]
    fn field_validation() {
        assert!(field(-1.0).validate().is_err());
        assert!(JammerField { trunc_radius_km: 0.0, ..field(0.1) }.validate().is_err());
        assert!(JammerField { depth_km: 0.0, ..field(0.1) }.validate().is_err());
    }
}
