use std::f64::consts::PI;
use std::io::Write;

use fracb_core::quadrature::integrate_adaptive;
use fracb_core::spectral::{
    eigenvalues, expand, sampled_from_csv_path, synthesize, ExpandControls, PhiData, SpectrumModel,
};
use proptest::prelude::*;

fn line() -> SpectrumModel {
    SpectrumModel::Dirichlet1d { length: PI }
}

fn integrate(f: impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    integrate_adaptive(f, a, b, 1e-12, 1e-13, 10_000)
        .unwrap()
        .value
}

#[test]
fn sine_modes_are_orthonormal() {
    let model = line();
    let modes = model.modes(16).unwrap();
    let mut worst = 0.0f64;
    for a in &modes {
        for b in &modes {
            let g = integrate(
                |x| model.eigenfunction(a, &[x]).unwrap() * model.eigenfunction(b, &[x]).unwrap(),
                0.0,
                PI,
            );
            let want = if a.index == b.index { 1.0 } else { 0.0 };
            worst = worst.max((g - want).abs());
        }
    }
    assert!(worst <= 1e-10, "{worst}");
}

#[test]
fn rectangle_modes_are_orthonormal() {
    let model = SpectrumModel::Dirichlet2d { l1: 1.0, l2: 2.0 };
    let modes = model.modes(6).unwrap();
    for a in &modes {
        for b in &modes {
            let g = integrate(
                |x| {
                    integrate(
                        |y| {
                            model.eigenfunction(a, &[x, y]).unwrap()
                                * model.eigenfunction(b, &[x, y]).unwrap()
                        },
                        0.0,
                        2.0,
                    )
                },
                0.0,
                1.0,
            );
            let want = if a.index == b.index { 1.0 } else { 0.0 };
            assert!((g - want).abs() <= 1e-10, "{} {}: {g}", a.index, b.index);
        }
    }
}

#[test]
fn eigenvalues_never_decrease() {
    let models = [
        line(),
        SpectrumModel::Dirichlet1d { length: 0.3 },
        SpectrumModel::Dirichlet2d { l1: 1.0, l2: 1.0 },
        SpectrumModel::Dirichlet2d { l1: 1.0, l2: 3.7 },
        SpectrumModel::Synthetic { c: 2.0, p: 1.5 },
    ];
    for m in &models {
        let l = eigenvalues(m, 200).unwrap();
        assert!(l.windows(2).all(|w| w[1] >= w[0]), "{m:?}");
    }
}

#[test]
fn square_ties_follow_quantum_numbers() {
    let model = SpectrumModel::Dirichlet2d { l1: 1.0, l2: 1.0 };
    let modes = model.modes(3).unwrap();
    assert_eq!((modes[1].m, modes[1].n), (1, 2));
    assert_eq!((modes[2].m, modes[2].n), (2, 1));
    assert_eq!(modes[1].lambda, modes[2].lambda);
}

#[test]
fn sampled_rectangle_from_csv() {
    // φ = sin(πx) sin(2πy) on [0,1]², the (1, 2) mode scaled by 1/2
    let n = 81;
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "x,y,value").unwrap();
    for i in 0..n {
        for j in 0..n {
            let (x, y) = (i as f64 / (n - 1) as f64, j as f64 / (n - 1) as f64);
            writeln!(file, "{x},{y},{}", (PI * x).sin() * (2.0 * PI * y).sin()).unwrap();
        }
    }
    file.flush().unwrap();
    let data = sampled_from_csv_path(file.path(), 2).unwrap();
    let model = SpectrumModel::Dirichlet2d { l1: 1.0, l2: 1.0 };
    let ex = expand(
        &PhiData::Sampled(data),
        &model,
        3,
        &ExpandControls::default(),
    )
    .unwrap();
    let target = ex.modes.iter().position(|m| (m.m, m.n) == (1, 2)).unwrap();
    for (i, c) in ex.coefficients.iter().enumerate() {
        let want = if i == target { 0.5 } else { 0.0 };
        assert!((c - want).abs() <= 1e-6, "{i}: {c}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn projection_recovers_coefficients(coeffs in prop::collection::vec(-1.0f64..1.0, 1..=32)) {
        let model = line();
        let modes = model.modes(coeffs.len()).unwrap();
        let f = |x: f64| synthesize(&coeffs, &model, &[x]).unwrap();
        // Parseval
        let energy = integrate(|x| f(x).powi(2), 0.0, PI);
        let sum: f64 = coeffs.iter().map(|c| c * c).sum();
        prop_assert!((energy - sum).abs() <= 1e-10 * sum.max(1.0));
        for (m, c) in modes.iter().zip(&coeffs) {
            let back = integrate(|x| f(x) * model.eigenfunction(m, &[x]).unwrap(), 0.0, PI);
            prop_assert!((back - c).abs() <= 1e-10, "mode {}: {} vs {}", m.index, back, c);
        }
    }

    #[test]
    fn coefficient_data_passes_through(coeffs in prop::collection::vec(-1.0f64..1.0, 1..=32)) {
        let phi = PhiData::Coefficients(coeffs.iter().enumerate().map(|(i, c)| (i + 1, *c)).collect());
        let ex = expand(&phi, &line(), coeffs.len(), &ExpandControls::default()).unwrap();
        prop_assert_eq!(ex.coefficients, coeffs);
    }
}
