use num_complex::Complex64;
use proptest::prelude::*;

use uwajam::numerics::*;
use uwajam::uwchannel::*;
use uwajam::MetricEstimate;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn absorption_increases_with_frequency(f in 0.1f64..200.0, df in 0.01f64..10.0) {
        prop_assert!(absorption_db_per_km(f + df).unwrap() > absorption_db_per_km(f).unwrap());
    }

    #[test]
    fn pathloss_increases_with_distance(depth in 0.01f64..5.0, d in 1.0f64..50_000.0, dd in 0.1f64..1000.0) {
        let env = EnvironmentConfig::at_depth(depth);
        prop_assert!(pathloss_db(&env, d + dd).unwrap() > pathloss_db(&env, d).unwrap());
    }

    #[test]
    fn marcum_is_a_decreasing_probability(a in 0.0f64..8.0, b in 0.0f64..10.0, db in 0.001f64..2.0) {
        let q = marcum_q1(a, b).unwrap();
        let q2 = marcum_q1(a, b + db).unwrap();
        prop_assert!((0.0..=1.0).contains(&q));
        prop_assert!(q2 <= q);
    }

    #[test]
    fn fading_cdf_is_monotone(psi in 0.0f64..20.0, x in 0.0f64..50.0, dx in 0.001f64..5.0) {
        let p = FadingParams::new(psi).unwrap();
        let lo = fading_cdf(x, &p).unwrap();
        let hi = fading_cdf(x + dx, &p).unwrap();
        prop_assert!((0.0..=1.0).contains(&lo) && lo <= hi);
    }

    #[test]
    fn fading_transform_is_bounded(psi in 0.0f64..20.0, s in 0.0f64..1e3, kappa in 1e-3f64..1e3) {
        let p = FadingParams::new(psi).unwrap();
        let l = lt_fading(Complex64::new(s, 0.0), &p, kappa).unwrap();
        prop_assert!(l.im.abs() < 1e-15);
        prop_assert!(l.re > 0.0 && l.re <= 1.0);
        // Jensen: L(s) ≥ e^{−s E[X]}.
        prop_assert!(l.re >= (-s * kappa * p.mean()).exp() * (1.0 - 1e-12));
    }

    #[test]
    fn stream_splitting_is_deterministic(seed: u64, index: u64) {
        let a = split_stream(RandomStream::new(seed), index);
        let b = split_stream(RandomStream::new(seed), index);
        prop_assert_eq!(a, b);
        let (mut ga, mut gb) = (a.generator(), b.generator());
        for _ in 0..8 {
            prop_assert_eq!(sample_uniform(&mut ga).to_bits(), sample_uniform(&mut gb).to_bits());
        }
    }

    #[test]
    fn estimate_interval_contains_value(k in 0u64..10_000, extra in 1u64..10_000, mean in -1e3f64..1e3, se in 0.0f64..10.0) {
        let p = MetricEstimate::from_proportion(k, k + extra);
        prop_assert!(p.ci95.0 <= p.value && p.value <= p.ci95.1);
        let m = MetricEstimate::from_mean(mean, se, 100);
        prop_assert!(m.ci95.0 <= m.value && m.value <= m.ci95.1);
    }

    #[test]
    fn quadrature_is_exact_on_low_degree_polynomials(
        c in proptest::collection::vec(-10.0f64..10.0, 1..12),
        a in -5.0f64..5.0,
        w in 0.1f64..5.0,
    ) {
        let b = a + w;
        let poly = |x: f64| c.iter().rev().fold(0.0, |acc, k| acc * x + k);
        let anti = |x: f64| c.iter().enumerate().rev().fold(0.0, |acc, (i, k)| acc * x + k / (i + 1) as f64) * x;
        let exact = anti(b) - anti(a);
        let q = integrate(poly, a, b, &QuadratureSpec::default()).unwrap();
        prop_assert!((q.value - exact).abs() <= 1e-9 * (1.0 + exact.abs()) * 10f64.powi(c.len() as i32 / 3), "{} vs {}", q.value, exact);
    }
}
