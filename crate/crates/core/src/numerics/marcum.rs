//! First-order Marcum Q function.
//!
//! With `λ = a²/2` and `y = b²/2`, the non-central chi-squared tail is a
//! Poisson mixture of central ones, which gives
//! `Q₁(a, b) = P[N ≤ K]` for independent `N ~ Poisson(y)`, `K ~ Poisson(λ)`.
//! Both `P[N ≤ K]` and its complement `P[N > K]` are sums of positive
//! terms, so whichever is smaller is summed directly and the other is
//! obtained by subtraction; neither side suffers cancellation.

use crate::error::{Error, Result};

/// Largest argument accepted when `a` and `b` are close enough that the
/// series must actually be summed.
pub const MARCUM_MAX_ARG: f64 = 100.0;

/// Beyond this separation `Q₁` is 0 or 1 to double precision
/// (`Q₁(a, b) ≤ exp(−(b − a)²/2)` for `b > a`).
const SATURATION_GAP: f64 = 40.0;

/// `Q₁(a, b) = P[(Z₁ + a)² + Z₂² > b²]`.
pub fn marcum_q1(a: f64, b: f64) -> Result<f64> {
    marcum_q1_pair(a, b).map(|(q, _)| q)
}

/// `(Q₁(a, b), 1 − Q₁(a, b))`, each accurate to full relative precision.
pub fn marcum_q1_pair(a: f64, b: f64) -> Result<(f64, f64)> {
    if !(a >= 0.0 && a.is_finite()) || !(b >= 0.0 && b.is_finite()) {
        return Err(Error::Domain(format!("Marcum Q needs finite a, b >= 0 (a = {a}, b = {b})")));
    }
    if b == 0.0 {
        return Ok((1.0, 0.0));
    }
    if b - a > SATURATION_GAP {
        return Ok((0.0, 1.0));
    }
    if a - b > SATURATION_GAP {
        return Ok((1.0, 0.0));
    }
    let y = 0.5 * b * b;
    if a == 0.0 {
        return Ok(((-y).exp(), -(-y).exp_m1()));
    }
    if a > MARCUM_MAX_ARG || b > MARCUM_MAX_ARG {
        return Err(Error::Domain(format!(
            "Marcum Q arguments beyond supported range (a = {a}, b = {b}, limit {MARCUM_MAX_ARG})"
        )));
    }
    let lambda = 0.5 * a * a;
    if y > lambda {
        let q = mixture_sum(lambda, y, 0);
        Ok((q, 1.0 - q))
    } else {
        let c = mixture_sum(y, lambda, 1);
        Ok((1.0 - c, c))
    }
}

/// `Σ_k p(k; outer) · F(k − shift; inner)` with `p` the Poisson pmf and `F`
/// the Poisson cdf, i.e. `P[X_inner ≤ X_outer − shift]`.
fn mixture_sum(outer: f64, inner: f64, shift: usize) -> f64 {
    let kmax = (outer + 20.0 * outer.sqrt() + 60.0).ceil() as usize;
    let ln_outer = outer.ln();
    let ln_inner = inner.ln();
    let mut ln_fact = 0.0;
    let mut inner_cdf = 0.0;
    let mut pending = 0.0; // inner pmf not yet folded into the cdf (shift = 1)
    let mut total = 0.0;
    for k in 0..=kmax {
        if k > 0 {
            ln_fact += (k as f64).ln();
        }
        let kf = k as f64;
        let inner_pmf = if inner > 0.0 {
            (-inner + kf * ln_inner - ln_fact).exp()
        } else if k == 0 {
            1.0
        } else {
            0.0
        };
        let outer_pmf = if outer > 0.0 {
            (-outer + kf * ln_outer - ln_fact).exp()
        } else if k == 0 {
            1.0
        } else {
            0.0
        };
        if shift == 0 {
            inner_cdf += inner_pmf;
        } else {
            inner_cdf += pending;
            pending = inner_pmf;
        }
        total += outer_pmf * inner_cdf;
    }
    total.min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_values() {
        assert_eq!(marcum_q1(1.3, 0.0).unwrap(), 1.0);
        for b in [0.1, 1.0, 3.0, 7.0] {
            let q = marcum_q1(0.0, b).unwrap();
            assert!((q - (-b * b / 2.0).exp()).abs() < 1e-15);
        }
    }

    #[test]
    fn complement_is_accurate_in_the_lower_tail() {
        // 1 − Q₁(a, b) ~ b²/2·e^{−a²/2} for tiny b
        let (a, b) = (1.0f64, 1e-6f64);
        let (_, c) = marcum_q1_pair(a, b).unwrap();
        let approx = 0.5 * b * b * (-0.5 * a * a).exp();
        assert!((c / approx - 1.0).abs() < 1e-6);
    }

    #[test]
    fn saturates_far_from_the_mean() {
        assert_eq!(marcum_q1(1.0, 1e4).unwrap(), 0.0);
        assert_eq!(marcum_q1(60.0, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn rejects_out_of_range_arguments() {
        assert!(marcum_q1(-1.0, 1.0).is_err());
        assert!(marcum_q1(1.0, f64::NAN).is_err());
        assert!(marcum_q1(150.0, 150.0).is_err());
    }

    #[test]
    fn symmetric_identity() {
        // Q₁(a,b) + Q₁(b,a) = 1 + e^{−(a²+b²)/2} I₀(ab)
        // Check with I₀ from its power series.
        let (a, b) = (1.7f64, 2.3f64);
        let z = a * b;
        let mut i0 = 0.0;
        let mut term = 1.0;
        for k in 0..60 {
            if k > 0 {
                term *= (z / 2.0).powi(2) / (k as f64 * k as f64);
            }
            i0 += term;
        }
        let lhs = marcum_q1(a, b).unwrap() + marcum_q1(b, a).unwrap();
        let rhs = 1.0 + (-(a * a + b * b) / 2.0).exp() * i0;
        assert!((lhs - rhs).abs() < 1e-13);
    }
}
