//! Tail probabilities from characteristic functions by Gil-Pelaez inversion,
//!
//! ```text
//! P[X > u] = 1/2 + (1/π) ∫₀^∞ Im[e^{−itu} φ(t)] / t dt
//! ```
//!
//! The integral is split at `t = scale` (the caller's characteristic
//! magnitude of `X`). Below the split it is evaluated in `w = ln t`, where
//! the `1/t` weight disappears and features of very different scales become
//! equally wide; decades of `t` are used as fixed panel edges. Near `t = 0`
//! the integrand tends to `E[X] − u` and the remaining sliver is replaced by
//! that limit. Above the split the oscillatory remainder is summed over
//! half-period panels and the partial sums are extrapolated with Wynn's
//! epsilon algorithm.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::quad::{integrate_panels, QuadratureSpec};
use crate::error::{Error, Result};

/// Partial sums fed to the extrapolation.
const ACCEL_WINDOW: usize = 16;
const MAX_PANELS: usize = 5000;
/// Bounds on the local angular frequency used to size tail panels.
const MIN_FREQUENCY: f64 = 0.05;
const MAX_FREQUENCY: f64 = 1e3;

#[derive(Debug, Clone, Copy)]
pub struct TailProbability {
    /// Probability clamped to `[0, 1]`.
    pub value: f64,
    /// Unclamped inversion result.
    pub raw: f64,
    /// Error estimate of `raw`.
    pub error: f64,
    pub evals: usize,
}

impl TailProbability {
    /// Whether clamping moved the result by more than `10·rel_tol`.
    pub fn clamp_departure(&self, rel_tol: f64) -> bool {
        (self.raw - self.value).abs() > 10.0 * rel_tol
    }
}

/// `P[X > u]` for a random variable with characteristic function `cf`.
///
/// `scale` is a typical magnitude of `X` (or of the threshold) used to
/// normalise the inversion variable; it only affects efficiency.
pub fn gil_pelaez_tail<F>(mut cf: F, u: f64, scale: f64, spec: &QuadratureSpec) -> Result<TailProbability>
where
    F: FnMut(f64) -> Complex64,
{
    try_gil_pelaez_tail(|t| Ok(cf(t)), u, scale, spec)
}

/// [`gil_pelaez_tail`] for characteristic functions that can fail.
pub fn try_gil_pelaez_tail<F>(mut cf: F, u: f64, scale: f64, spec: &QuadratureSpec) -> Result<TailProbability>
where
    F: FnMut(f64) -> Result<Complex64>,
{
    spec.validate()?;
    if !u.is_finite() {
        return Err(Error::Domain(format!("threshold must be finite, got {u}")));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::Domain(format!("scale must be positive and finite, got {scale}")));
    }
    let u_norm = u / scale;
    let mut evals = 0usize;

    // e^{−iu t} φ(t) with v = t·scale; its imaginary part is v·g(v), the
    // integrand in the logarithmic variable.
    let mut rotated = |v: f64| -> Result<Complex64> {
        let phi = cf(v / scale)?;
        if !(phi.re.is_finite() && phi.im.is_finite()) {
            return Err(Error::NonFinite(v / scale));
        }
        Ok(Complex64::from_polar(1.0, -u_norm * v) * phi)
    };

    // Lower cut-off: walk down by decades until the small-t limit has set in.
    let patch_tol = 1e-3 * spec.abs_tol;
    let mut lo_decade: i32 = -6;
    let patch = loop {
        let here = rotated(10f64.powi(lo_decade))?.im;
        let above = rotated(10f64.powi(lo_decade + 1))?.im;
        evals += 2;
        if (here.abs() <= patch_tol && above.abs() <= 10.0 * patch_tol) || lo_decade <= -300 {
            break here;
        }
        lo_decade -= 3;
    };

    let points: Vec<f64> = (lo_decade..=0).map(|k| 10f64.powi(k).ln()).collect();
    let mut inner_spec = *spec;
    inner_spec.max_evals = spec.max_evals.saturating_sub(evals).max(100);
    let log_part = integrate_panels(|w: f64| Ok(rotated(w.exp())?.im), &points, &inner_spec)?;
    evals += log_part.evals;

    // Oscillatory remainder on [1, ∞), panel by panel. Each panel spans
    // half a period of the integrand's local phase, so the partial sums
    // alternate and the epsilon algorithm extrapolates them.
    let mut panel_spec = *spec;
    panel_spec.abs_tol = 0.1 * spec.abs_tol;
    let mut partial = Vec::<f64>::new();
    let mut running = 0.0;
    let mut lin_err = 0.0;
    let mut settled = 0;
    let mut previous: Option<f64> = None;
    let mut start = 1.0;
    let lin_value = loop {
        if evals + 100 > spec.max_evals || partial.len() >= MAX_PANELS {
            return Err(Error::Quadrature {
                evals,
                estimate: running,
                error: lin_err,
                target: spec.abs_tol,
            });
        }
        let h = 1e-6 * start;
        let (z0, z1) = (rotated(start)?, rotated(start + h)?);
        evals += 2;
        let omega = ((z1 / z0).arg() / h).abs();
        // A vanished integrand has no phase; any panel width will do.
        let omega = if omega.is_finite() { omega.clamp(MIN_FREQUENCY, MAX_FREQUENCY) } else { 1.0 };
        let end = start + PI / omega;
        panel_spec.max_evals = spec.max_evals - evals;
        let q = integrate_panels(|v: f64| Ok(rotated(v)?.im / v), &[start, end], &panel_spec)?;
        evals += q.evals;
        running += q.value;
        lin_err += q.error;
        partial.push(running);
        start = end;

        if partial.len() >= 3 {
            let window = &partial[partial.len().saturating_sub(ACCEL_WINDOW)..];
            let accel = wynn_epsilon(window);
            if let Some(prev) = previous {
                if (accel - prev).abs() <= 0.1 * spec.abs_tol.max(spec.rel_tol * accel.abs()) {
                    settled += 1;
                } else {
                    settled = 0;
                }
                if settled >= 3 {
                    lin_err += (accel - prev).abs();
                    break accel;
                }
            }
            previous = Some(accel);
        }
    };

    let integral = patch + log_part.value + lin_value;
    let raw = 0.5 + integral / PI;
    Ok(TailProbability {
        value: raw.clamp(0.0, 1.0),
        raw,
        error: (log_part.error + lin_err + patch.abs() * 1e-3) / PI,
        evals,
    })
}

/// Wynn's epsilon algorithm: limit estimate of a sequence of partial sums.
fn wynn_epsilon(sums: &[f64]) -> f64 {
    let mut prev = vec![0.0; sums.len() + 1];
    let mut cur = sums.to_vec();
    let mut best = *sums.last().unwrap_or(&0.0);
    let mut column = 0;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for i in 0..cur.len() - 1 {
            let d = cur[i + 1] - cur[i];
            if d == 0.0 {
                // Converged exactly; the current column holds the limit.
                return cur[i + 1];
            }
            next.push(prev[i + 1] + 1.0 / d);
        }
        prev = cur;
        cur = next;
        column += 1;
        if column % 2 == 0 {
            best = *cur.last().unwrap();
        }
    }
    best
}
