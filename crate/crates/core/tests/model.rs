mod common;

use std::collections::BTreeMap;

use approx::assert_abs_diff_eq;
use common::{arb_model, instances, integrate, laplace_exponent_quadrature};
use levy_dividend::model::{classify_cm, presets, CmDensityEntry, LevyModel, Side};
use levy_dividend::Error;
use proptest::prelude::*;

fn central_difference(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = 1e-5;
    (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
}

#[test]
fn laplace_exponent_reference_values() {
    assert_abs_diff_eq!(presets::brownian_unit().laplace_exponent(1.0).unwrap(), 1.5, epsilon = 1e-15);
    assert_abs_diff_eq!(presets::exponential_claims().laplace_exponent(-0.5).unwrap(), 0.0, epsilon = 1e-15);
    let b = presets::double_exponential();
    assert_abs_diff_eq!(b.laplace_exponent(1.0).unwrap(), 1.045, epsilon = 1e-14);
    assert_abs_diff_eq!(laplace_exponent_quadrature(&b, 1.0), 1.045, epsilon = 1e-11);
}

#[test]
fn laplace_exponent_matches_quadrature() {
    for (_, m) in instances() {
        let (lo, hi) = m.domain();
        for theta in [-1.5, -0.7, 0.3, 1.1, 2.5] {
            if theta > lo && theta < hi {
                let exact = m.laplace_exponent(theta).unwrap();
                assert_abs_diff_eq!(exact, laplace_exponent_quadrature(&m, theta), epsilon = 1e-10);
            }
        }
    }
}

#[test]
fn domain_errors_name_the_pole() {
    let b = presets::double_exponential();
    assert_eq!(b.laplace_exponent(3.0), Err(Error::Domain { theta: 3.0, pole: 3.0, rate: 3.0 }));
    assert!(matches!(b.laplace_exponent(-2.5), Err(Error::Domain { rate, .. }) if rate == 2.0));
    assert!(b.laplace_exponent_deriv(4.0, 1).is_err());
}

#[test]
fn derivatives_match_finite_differences() {
    let expected = [1.0, 1.0, 2.0 / 3.0];
    for ((_, m), want) in instances().into_iter().zip(expected) {
        assert_abs_diff_eq!(m.laplace_exponent_deriv(0.0, 1).unwrap(), want, epsilon = 1e-14);
        for theta in [-0.4, 0.0, 0.6] {
            for order in 1..=3 {
                let lower = |t: f64| {
                    if order == 1 {
                        m.laplace_exponent(t).unwrap()
                    } else {
                        m.laplace_exponent_deriv(t, order - 1).unwrap()
                    }
                };
                let fd = central_difference(lower, theta);
                let exact = m.laplace_exponent_deriv(theta, order).unwrap();
                assert!((fd - exact).abs() <= 1e-7 * (1.0 + exact.abs()), "order {order} at {theta}");
            }
        }
    }
}

#[test]
fn triplet_drift_against_quadrature() {
    assert_eq!(presets::brownian_unit().triplet_drift(), 1.0);
    let a = presets::exponential_claims();
    assert_abs_diff_eq!(a.triplet_drift(), 1.0 + 2.0 * (-1.0f64).exp(), epsilon = 1e-14);
    for (_, m) in instances() {
        let small = m.jumps().map_or(0.0, |j| j.lambda() * integrate(&|y| y * j.density(y), -1.0, 1.0, 1e-15));
        assert_abs_diff_eq!(m.triplet_drift(), m.drift() + small, epsilon = 1e-13);
    }
}

#[test]
fn tilt_reference_values() {
    let rho_bm = -1.0 + 1.2f64.sqrt();
    let t = presets::brownian_unit().tilt(rho_bm).unwrap();
    assert_abs_diff_eq!(t.drift(), 1.0 + rho_bm, epsilon = 1e-15);
    assert_eq!(t.sigma(), 1.0);
    assert!(t.jumps().is_none());
    assert_abs_diff_eq!(presets::brownian_unit().tilted_mean(rho_bm).unwrap(), 1.0 + rho_bm, epsilon = 1e-15);

    let rho_a = 0.0922145;
    let t = presets::exponential_claims().tilt(rho_a).unwrap();
    assert_abs_diff_eq!(t.down_rates()[0], 1.0 + rho_a, epsilon = 1e-15);
    assert_abs_diff_eq!(t.lambda(), 1.0 / (1.0 + rho_a), epsilon = 1e-15);
    assert!(presets::exponential_claims().tilted_mean(rho_a).unwrap() > 0.0);

    let tiny = presets::double_exponential().tilt(1e-300).unwrap();
    let b = presets::double_exponential();
    assert_abs_diff_eq!(tiny.drift(), b.drift(), epsilon = 1e-15);
    assert_abs_diff_eq!(tiny.lambda(), b.lambda(), epsilon = 1e-14);
    assert!(matches!(b.tilt(3.0), Err(Error::Domain { .. })));
}

#[test]
fn cm_classification() {
    assert!(classify_cm(presets::double_exponential().jumps().unwrap()));
    let params = |pairs: &[(&str, f64)]| pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>();
    let weibull = |r: f64| CmDensityEntry::from_name("weibull", &params(&[("c", 1.0), ("r", r)]), Side::Down).unwrap();
    assert!(classify_cm(&weibull(0.5)));
    assert!(!classify_cm(&weibull(2.0)));
    assert!(matches!(
        CmDensityEntry::from_name("lognormal", &BTreeMap::new(), Side::Up),
        Err(Error::UnknownCatalog(_))
    ));
}

fn sample_points(m: &LevyModel, n: usize) -> Vec<f64> {
    let (lo, hi) = m.domain();
    let (lo, hi) = (lo.max(-6.0), hi.min(6.0));
    (1..=n).map(|i| lo + (hi - lo) * i as f64 / (n + 1) as f64).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn exponent_vanishes_at_zero(m in arb_model()) {
        prop_assert_eq!(m.laplace_exponent(0.0).unwrap(), 0.0);
    }

    #[test]
    fn exponent_is_strictly_convex(m in arb_model()) {
        prop_assume!(m.sigma() > 0.0 || m.lambda() > 0.0);
        for theta in sample_points(&m, 50) {
            prop_assert!(m.laplace_exponent_deriv(theta, 2).unwrap() > 0.0);
        }
    }

    #[test]
    fn tilt_shifts_the_exponent(m in arb_model(), frac in 0.05f64..0.9) {
        let hi = m.domain().1.min(4.0);
        let rho = frac * hi;
        let t = m.tilt(rho).unwrap();
        let base = m.laplace_exponent(rho).unwrap();
        let (lo, up) = t.domain();
        let (lo, up) = (lo.max(-5.0), up.min(5.0));
        for i in 1..=20 {
            let eta = lo + (up - lo) * i as f64 / 21.0;
            let lhs = t.laplace_exponent(eta).unwrap();
            let rhs = m.laplace_exponent(eta + rho).unwrap() - base;
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn triplet_drift_round_trips(m in arb_model()) {
        let back = LevyModel::from_triplet(m.triplet_drift(), m.sigma(), m.jumps().cloned()).unwrap();
        prop_assert!((back.drift() - m.drift()).abs() <= 1e-12);
    }

    #[test]
    fn mixture_densities_are_completely_monotone(m in arb_model()) {
        if let Some(j) = m.jumps() {
            prop_assert!(classify_cm(j));
            for side in [Side::Up, Side::Down] {
                for i in 1..60 {
                    let x = 0.05 * i as f64;
                    for order in 0..=4u32 {
                        let d = j.side_density(side, x, order);
                        let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
                        prop_assert!(sign * d >= 0.0);
                    }
                }
            }
        }
    }
}
