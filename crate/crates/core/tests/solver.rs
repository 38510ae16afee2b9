use std::collections::BTreeMap;
use std::f64::consts::PI;

use fracb_core::quadrature::integrate_adaptive;
use fracb_core::solver::{mode_coefficients, solve, ProblemSpec, SolverError};
use fracb_core::spectral::{ExpandControls, PhiData, SampledData, SpectrumModel};
use proptest::prelude::*;

// E_{3/2,μ}(−1), μ = 1, 2, 3 (mpmath)
const E1: f64 = 0.396_629_365_318_088_08;
const E2: f64 = 0.737_482_247_901_894_8;
const E3: f64 = 0.421_851_130_031_336_8;

fn spec(alpha: f64, nu: f64, horizon: f64, phi: PhiData, modes: usize) -> ProblemSpec {
    ProblemSpec {
        alpha,
        nu,
        horizon,
        spectrum: SpectrumModel::Dirichlet1d { length: PI },
        phi,
        modes,
        tol: 1e-4,
        expand: ExpandControls::default(),
        strict_regularity: false,
    }
}

fn coefficients(values: &[f64]) -> PhiData {
    PhiData::Coefficients(
        values
            .iter()
            .enumerate()
            .map(|(i, v)| (i + 1, *v))
            .collect(),
    )
}

#[test]
fn closed_forms_match_a_direct_linear_solve() {
    // a(1 − E1) − b T E2 = 0,  a T E2 + b T² E3 = φ  by Cramer's rule
    let (t, phi) = (1.0, 0.8);
    let det = (1.0 - E1) * t * t * E3 + t * E2 * t * E2;
    let a = t * E2 * phi / det;
    let b = (1.0 - E1) * phi / det;
    let c = mode_coefficients(1.5, 1.0, t, phi).unwrap();
    assert!((c.a - a).abs() <= 1e-13 * a.abs(), "{} {a}", c.a);
    assert!((c.b - b).abs() <= 1e-13 * b.abs(), "{} {b}", c.b);
    assert!((c.d - det).abs() <= 1e-13 * det);
}

#[test]
fn first_eigenfunction_integrates_to_one() {
    let s = spec(1.5, 1.0, 2.0, coefficients(&[1.0]), 1);
    let sol = solve(&s).unwrap();
    let q =
        integrate_adaptive(|t| sol.mode_at(0, t).unwrap(), 0.0, 2.0, 1e-14, 1e-12, 2000).unwrap();
    assert!((q.value - 1.0).abs() <= 1e-8, "{}", q.value);
    assert!((sol.mode_at(0, 0.0).unwrap() - sol.mode_at(0, 2.0).unwrap()).abs() <= 1e-12);
}

#[test]
fn sampled_sine_matches_coefficient_form() {
    let n = 401;
    let x: Vec<f64> = (0..n).map(|i| PI * i as f64 / (n - 1) as f64).collect();
    let v: Vec<f64> = x.iter().map(|x| x.sin()).collect();
    let sampled = solve(&spec(
        1.7,
        2.0,
        1.0,
        PhiData::Sampled(SampledData::new_1d(x, v).unwrap()),
        4,
    ))
    .unwrap();
    let exact = solve(&spec(1.7, 2.0, 1.0, coefficients(&[(PI / 2.0).sqrt()]), 1)).unwrap();
    let (s, e) = (&sampled.modes[0], &exact.modes[0]);
    assert!((s.a_k - e.a_k).abs() <= 1e-6 * e.a_k.abs());
    assert!((s.b_k - e.b_k).abs() <= 1e-6 * e.b_k.abs());
    for m in &sampled.modes[1..] {
        assert!(m.phi_k.abs() <= 1e-6, "{m:?}");
    }
}

#[test]
fn zero_data_gives_zero_solution() {
    let sol = solve(&spec(1.3, 5.0, 3.0, coefficients(&[0.0; 16]), 16)).unwrap();
    for t in [0.0, 0.5, 1.5, 3.0] {
        assert!(sol.evaluate(t).unwrap().iter().all(|v| *v == 0.0));
    }
    assert_eq!(sol.tail_bound, 0.0);
}

#[test]
fn large_frequency_stays_well_posed() {
    // νT = 2π is a classical resonance; fractional orders are unaffected
    let sol = solve(&spec(
        1.9,
        2.0 * PI,
        1.0,
        coefficients(&[1.0, 0.5, 0.25]),
        3,
    ))
    .unwrap();
    assert!(sol.modes.iter().all(|m| m.d_k > 0.0));
}

#[test]
fn order_two_is_rejected() {
    let err = solve(&spec(2.0, 1.0, 1.0, coefficients(&[1.0]), 1)).unwrap_err();
    assert!(
        matches!(err, SolverError::InvalidProblem(_) | SolverError::Domain(_)),
        "{err:?}"
    );
}

#[test]
fn config_document_round_trip() {
    let text = r#"{"alpha":1.5,"nu":1.0,"T":1.0,"K":2,
        "spectrum":{"kind":"dirichlet_1d","L":3.141592653589793},
        "phi":{"coefficients":{"1":1.0,"2":0.5}}}"#;
    let s: ProblemSpec = serde_json::from_str(text).unwrap();
    let sol = solve(&s).unwrap();
    let mut out = Vec::new();
    sol.write_json(&mut out).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out).unwrap();
    assert_eq!(v["modes"].as_array().unwrap().len(), 2);
    assert_eq!(v["modes"][1]["phi_k"], 0.5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solve_is_linear(
        alpha in 1.05f64..1.95,
        nu in 0.1f64..10.0,
        horizon in 0.5f64..10.0,
        phi in prop::collection::vec(-1.0f64..1.0, 8),
        psi in prop::collection::vec(-1.0f64..1.0, 8),
        c in -3.0f64..3.0,
    ) {
        let sum: Vec<f64> = phi.iter().zip(&psi).map(|(p, q)| p + c * q).collect();
        let run = |d: &[f64]| solve(&spec(alpha, nu, horizon, coefficients(d), 8)).unwrap();
        let (x, y, z) = (run(&phi), run(&psi), run(&sum));
        for ((a, b), s) in x.modes.iter().zip(&y.modes).zip(&z.modes) {
            for (u, v, w) in [(a.a_k, b.a_k, s.a_k), (a.b_k, b.b_k, s.b_k)] {
                prop_assert!((w - (u + c * v)).abs() <= 1e-12 * (u.abs() + (c * v).abs()) + 1e-300);
            }
        }
    }

    #[test]
    fn modes_satisfy_both_conditions(
        alpha in 1.05f64..1.95,
        nu in 0.1f64..10.0,
        horizon in 0.5f64..10.0,
        k in 1usize..40,
    ) {
        let mut data = BTreeMap::new();
        data.insert(k, 1.0);
        let sol = solve(&spec(alpha, nu, horizon, PhiData::Coefficients(data), k)).unwrap();
        let m = sol.modes[k - 1];
        let gap = (sol.mode_at(k - 1, 0.0).unwrap() - sol.mode_at(k - 1, horizon).unwrap()).abs();
        prop_assert!(gap <= 1e-12 * (m.a_k.abs() + m.b_k.abs() * horizon));
        let closed = m.a_k * horizon * m.e2 + m.b_k * horizon * horizon * m.e3;
        prop_assert!((closed - 1.0).abs() <= 1e-12);
    }
}
