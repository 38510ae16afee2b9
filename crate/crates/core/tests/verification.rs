use std::f64::consts::PI;

use fracb_core::solver::{solve, ProblemSpec, SeriesSolution};
use fracb_core::spectral::{ExpandControls, PhiData, SpectrumModel};
use fracb_core::verification::{
    classical_zeros, default_alpha_grid, default_t_grid, empirical_c0, lemma_boundary_probe,
    lemma_bounds_sweep, resonance_sweep, uniform_x, verify_solution, VerifyOptions,
};

fn solution(alpha: f64, nu: f64, horizon: f64, phi: &[f64]) -> SeriesSolution {
    solve(&ProblemSpec {
        alpha,
        nu,
        horizon,
        spectrum: SpectrumModel::Dirichlet1d { length: PI },
        phi: PhiData::Coefficients(phi.iter().enumerate().map(|(i, v)| (i + 1, *v)).collect()),
        modes: phi.len(),
        tol: 1e-4,
        expand: ExpandControls::default(),
        strict_regularity: false,
    })
    .unwrap()
}

fn decaying(k: usize) -> Vec<f64> {
    (1..=k)
        .map(|j| (-1f64).powi(j as i32) / (j * j * j) as f64)
        .collect()
}

#[test]
fn computed_solution_passes() {
    let sol = solution(1.6, 3.0, 2.0, &decaying(12));
    let report = verify_solution(&sol, &VerifyOptions::for_horizon(2.0)).unwrap();
    let failed: Vec<_> = report.failures().map(|c| &c.name).collect();
    assert!(report.passed().unwrap(), "{failed:?}");
    assert!(report.checks.iter().any(|c| c.name == "stability_envelope"));
}

#[test]
fn perturbed_coefficients_fail() {
    let sol = solution(1.6, 3.0, 2.0, &decaying(12)).with_scaled_b(1.01);
    let report = verify_solution(&sol, &VerifyOptions::for_horizon(2.0)).unwrap();
    assert!(!report.passed().unwrap());
    let failed: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
    for name in [
        "mode_periodicity",
        "mode_integral_closed_form",
        "assembled_integral_H",
    ] {
        assert!(failed.contains(&name), "{failed:?}");
    }
}

#[test]
fn zero_solution_passes() {
    let sol = solution(1.4, 1.0, 1.0, &[0.0; 8]);
    let report = verify_solution(&sol, &VerifyOptions::for_horizon(1.0)).unwrap();
    assert!(report.passed().unwrap());
}

#[test]
fn pointwise_periodicity_on_request() {
    let sol = solution(1.5, 1.0, 1.0, &decaying(6));
    let mut options = VerifyOptions::for_horizon(1.0);
    options.x_grid = Some(vec![vec![0.3], vec![1.0], vec![2.9]]);
    let report = verify_solution(&sol, &options).unwrap();
    let c = report
        .checks
        .iter()
        .find(|c| c.name == "pointwise_periodicity")
        .unwrap();
    assert!(c.pass);
}

#[test]
fn lemma_sweep_on_default_grids() {
    let report = lemma_bounds_sweep(&default_alpha_grid(), &default_t_grid()).unwrap();
    assert!(report.passed().unwrap());
    assert_eq!(report.checks.len(), 5 * default_alpha_grid().len());
}

#[test]
fn boundary_probe_never_fails_the_report() {
    let report = lemma_boundary_probe(&[1.999], &default_t_grid()).unwrap();
    assert!(report.checks.iter().all(|c| !c.asserted));
    assert!(report.passed().unwrap());
}

#[test]
fn c0_shrinks_toward_two() {
    let t = default_t_grid();
    let c: Vec<f64> = [1.1, 1.5, 1.9]
        .iter()
        .map(|&a| empirical_c0(a, &t).unwrap().c0)
        .collect();
    assert!(c.iter().all(|v| *v > 0.0));
    assert!(c[0] > c[2], "{c:?}");
}

#[test]
fn resonance_contrast() {
    let alphas = [1.5, 1.9, 1.99, 1.999, 2.0];
    let on = resonance_sweep(2.0 * PI, 1.0, &alphas, &uniform_x(2.0 * PI, 200)).unwrap();
    assert!(
        on.passed().unwrap(),
        "{:?}",
        on.failures().map(|c| &c.name).collect::<Vec<_>>()
    );
    assert!(on
        .checks
        .iter()
        .any(|c| c.name == "classical_denominator_vanishes"));
    let off = resonance_sweep(PI, 1.0, &alphas, &uniform_x(PI, 200)).unwrap();
    assert!(off.passed().unwrap());
    assert!(off
        .checks
        .iter()
        .any(|c| c.name == "classical_denominator_positive"));
    assert_eq!(on.resonance_table.len(), alphas.len());
}

#[test]
fn classical_zeros_are_multiples_of_two_pi() {
    let zeros = classical_zeros(6.0 * PI, 9999, 1e-10);
    assert_eq!(zeros.len(), 3, "{zeros:?}");
    for (z, n) in zeros.iter().zip(1..) {
        assert!((z - 2.0 * PI * n as f64).abs() <= 1e-12 * z, "{z}");
    }
}

#[test]
fn report_renders_every_check() {
    let report = lemma_bounds_sweep(&[1.5], &default_t_grid()).unwrap();
    let text = report.to_text();
    for c in &report.checks {
        assert!(text.contains(&c.name));
    }
    let mut json = Vec::new();
    report.write_json(&mut json).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
    assert_eq!(v["checks"].as_array().unwrap().len(), report.checks.len());
}
