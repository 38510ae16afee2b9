use fracb_core::special::{
    gamma_real, ml, ml_oracle, pskhu_closed_form, pskhu_image_of_power, rgamma, shared_ml, wright,
    MLQuery, PskhuControls, WrightQuery,
};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn e(rho: f64, mu: f64, z: f64) -> f64 {
    ml(MLQuery::new(rho, mu, z).unwrap()).unwrap()
}

// mpmath, 200-digit series
const FROZEN: &[(f64, f64, f64, f64)] = &[
    (1.5, 1.0, -1.0, 0.396_629_365_318_088_08),
    (1.5, 2.0, -1.0, 0.737_482_247_901_894_8),
    (1.5, 3.0, -1.0, 0.421_851_130_031_336_8),
    (1.5, 1.5, -1.0, 0.706_528_037_064_175_8),
    (1.9, 1.0, -50.0, 0.022_022_145_114_234_176),
    (1.3, 2.0, -100.0, 0.007_731_044_772_786_963),
    (1.1, 3.0, -20.0, 0.049_808_713_342_545_45),
    (1.7, 0.5, -10.0, -0.029_305_021_398_698_605),
];

#[test]
fn frozen_mittag_leffler_values() {
    for &(rho, mu, z, want) in FROZEN {
        let got = e(rho, mu, z);
        assert!(
            rel(got, want) <= 1e-13,
            "E_({rho},{mu})({z}) = {got}, want {want}"
        );
    }
}

#[test]
fn oracle_reproduces_frozen_values() {
    for &(rho, mu, z, want) in FROZEN {
        let o = ml_oracle(MLQuery::new(rho, mu, z).unwrap(), 50).unwrap();
        assert!(rel(o.value, want) <= 2e-16, "{rho} {mu} {z}");
        assert!(o.relative_error_bound <= 1e-50);
    }
}

#[test]
fn argument_at_three_halves_power() {
    let z = -(0.7f64.powf(1.5));
    assert!(rel(e(1.5, 1.0, z), 0.612_921_568_941_78) <= 1e-13);
}

#[test]
fn wright_half_order_at_minus_one() {
    // φ(−1/2, 1/2; −1) = e^{−1/4}/√π
    let v = wright(WrightQuery::new(-0.5, 0.5, -1.0).unwrap()).unwrap();
    assert!(rel(v, 0.439_391_289_467_722_4) <= 1e-13, "{v}");
}

#[test]
fn closed_form_anchors_on_zero_to_hundred() {
    for j in 1..=200 {
        let x = 0.5 * j as f64;
        let z = -x * x;
        let r = (-z).sqrt();
        for (mu, want) in [
            (1.0, r.cos()),
            (2.0, r.sin() / r),
            (3.0, 2.0 * (r / 2.0).sin().powi(2) / (r * r)),
        ] {
            let got = e(2.0, mu, z);
            assert!(rel(got, want) <= 1e-12, "mu {mu} x {x}: {got} {want}");
        }
    }
}

#[test]
fn pskhu_power_images() {
    for &alpha in &[0.3, 0.5, 0.7] {
        for &g in &[0.5, 1.0, 2.0] {
            for &t in &[0.5, 1.0, 2.0] {
                let got = pskhu_image_of_power(alpha, 1.0, g, t, PskhuControls::default()).unwrap();
                let want = gamma_real(g).unwrap() * rgamma(alpha * g + 1.0) * t.powf(alpha * g);
                assert!(rel(got.value, want) <= 1e-6, "{alpha} {g} {t}");
                assert!(rel(pskhu_closed_form(alpha, 1.0, g, t).unwrap(), want) <= 1e-14);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lemma_bounds_hold(rho in 1.01f64..1.99, log_t in -3.0f64..3.0) {
        let t = 10f64.powf(log_t);
        let z = -t.powf(rho);
        prop_assert!(e(rho, 1.0, z).abs() < 1.0);
        prop_assert!(e(rho, 2.0, z).abs() < 1.0);
        let e3 = e(rho, 3.0, z);
        prop_assert!(e3 > 0.0 && e3 < 0.5);
    }

    #[test]
    fn recurrence_in_mu(rho in 1.05f64..1.95, mu in 0.5f64..3.0, log_x in -3.0f64..4.0) {
        let z = -10f64.powf(log_x);
        let lo = shared_ml(rho, mu).unwrap().eval(z).unwrap();
        let hi = shared_ml(rho, mu + rho).unwrap().eval(z).unwrap();
        let rhs = z * hi + rgamma(mu);
        prop_assert!((lo - rhs).abs() <= 1e-10 * lo.abs().max(rgamma(mu).abs()), "{} {}", lo, rhs);
    }

    #[test]
    fn origin_is_reciprocal_gamma(rho in 0.1f64..2.0, mu in 0.1f64..5.0) {
        prop_assert_eq!(e(rho, mu, 0.0), rgamma(mu));
    }
}
