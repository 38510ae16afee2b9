use fracb_core::fractional_calculus::{
    caputo, ml_primitive, ml_primitive_by_quadrature, mode_second_derivative,
    mode_second_derivative_fn, CaputoMesh, CaputoQuery, ModeKind,
};
use fracb_core::special::{ml, MLQuery};

// mpmath: E_{3/2,2}(−1), E_{3/2,3/2}(−1), E_{3/2,3}(−1)
const E_2: f64 = 0.737_482_247_901_894_8;
const E_3HALF: f64 = 0.706_528_037_064_175_8;
const E_3: f64 = 0.421_851_130_031_336_8;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn sine_like_second_derivative_at_one() {
    // −λ t^{α−1} E_{α,α}(−λ t^α)
    let v = mode_second_derivative(1.5, 1.0, ModeKind::SineLike, 1.0).unwrap();
    assert!(rel(v, -E_3HALF) <= 1e-13, "{v}");
}

#[test]
fn sine_like_second_derivative_by_finite_differences() {
    let (alpha, lam) = (1.5, 1.0);
    let f = |t: f64| t * ml(MLQuery::new(alpha, 2.0, -lam * t.powf(alpha)).unwrap()).unwrap();
    let (t, h) = (1.0, 1e-3);
    // fourth-order central difference
    let fd = (-f(t + 2.0 * h) + 16.0 * f(t + h) - 30.0 * f(t) + 16.0 * f(t - h) - f(t - 2.0 * h))
        / (12.0 * h * h);
    let v = mode_second_derivative(alpha, lam, ModeKind::SineLike, t).unwrap();
    assert!(rel(v, fd) <= 1e-6, "{v} {fd}");
}

#[test]
fn sine_like_mode_is_an_eigenfunction() {
    // D^α [t E_{α,2}(−t^α)] = −t E_{α,2}(−t^α) at t = 1
    let q = CaputoQuery::new(
        mode_second_derivative_fn(1.5, 1.0, ModeKind::SineLike),
        1.5,
        1.0,
    )
    .unwrap();
    let r = caputo(&q).unwrap();
    assert!(rel(r.value, -E_2) <= 1e-6, "{}", r.value);
}

#[test]
fn primitive_of_sine_like_kernel() {
    let p = ml_primitive(1.5, 2.0, 1.0, 1.0).unwrap();
    assert!(rel(p, E_3) <= 1e-14, "{p}");
    let q = ml_primitive_by_quadrature(1.5, 2.0, 1.0, 1.0).unwrap();
    assert!(rel(q, E_3) <= 1e-8, "{q}");
}

#[test]
fn primitives_agree_on_the_parameter_grid() {
    for &alpha in &[1.2, 1.5, 1.8] {
        for &lam in &[0.5, 1.0, 5.0] {
            for &beta in &[1.0, 2.0] {
                let a = ml_primitive(alpha, beta, lam, 1.0).unwrap();
                let b = ml_primitive_by_quadrature(alpha, beta, lam, 1.0).unwrap();
                assert!(rel(a, b) <= 1e-8, "{alpha} {lam} {beta}: {a} {b}");
            }
        }
    }
}

#[test]
fn finer_mesh_is_consistent() {
    let coarse = CaputoMesh {
        panels: 64,
        ..CaputoMesh::default()
    };
    let f = mode_second_derivative_fn(1.8, 5.0, ModeKind::CosineLike);
    let a = caputo(&CaputoQuery::new(&f, 1.8, 0.7).unwrap().with_mesh(coarse)).unwrap();
    let b = caputo(&CaputoQuery::new(&f, 1.8, 0.7).unwrap()).unwrap();
    assert!((a.value - b.value).abs() <= 1e-6 * b.l1_norm);
    assert!(b.difference <= a.difference.max(1e-15));
}

#[test]
fn rejects_first_order_and_negative_time() {
    let f = |_: f64| 0.0;
    assert!(CaputoQuery::new(f, 1.0, 1.0).is_err());
    assert!(CaputoQuery::new(f, 1.5, -1.0).is_err());
    assert!(ml_primitive(1.5, 0.0, 1.0, 1.0).is_err());
}
