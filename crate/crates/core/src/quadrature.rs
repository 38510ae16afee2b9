//! Quadrature rules shared by the special-function, spectral and
//! fractional-calculus code.
//!
//! * Gauss–Legendre rules of arbitrary order (Newton on the three-term
//!   recurrence).
//! * Adaptive Gauss–Kronrod 7/15 with a global error queue.
//! * Double-exponential rules: tanh-sinh on `[a, b]` and exp-sinh on
//!   `[a, ∞)`. Node tables are computed once per process.

use std::collections::BinaryHeap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use thiserror::Error;

use crate::summation::CompensatedSum;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e} after {evaluations} evaluations")]
    NonConvergence {
        estimate: f64,
        error: f64,
        evaluations: usize,
    },
    #[error("integrand returned a non-finite value at x = {0:e}")]
    NonFinite(f64),
    #[error("invalid interval [{0}, {1}]")]
    InvalidInterval(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
    /// ∫|f|, used to judge relative accuracy when the integral cancels.
    pub l1_norm: f64,
    pub evaluations: usize,
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// ∫_a^b f with this rule mapped affinely onto [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = CompensatedSum::new();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(mid + half * x));
        }
        half * acc.value()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Shared 8-point rule used by the composite schemes.
pub fn gauss_legendre_8() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(8))
}

const GK15_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    l1: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Segment, QuadratureError> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    if !fc.is_finite() {
        return Err(QuadratureError::NonFinite(mid));
    }
    let mut kronrod = fc * GK15_WEIGHTS[7];
    let mut gauss = fc * G7_WEIGHTS[3];
    let mut l1 = fc.abs() * GK15_WEIGHTS[7];
    for j in 0..7 {
        let dx = half * GK15_NODES[j];
        let (x1, x2) = (mid - dx, mid + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(QuadratureError::NonFinite(x1));
        }
        if !f2.is_finite() {
            return Err(QuadratureError::NonFinite(x2));
        }
        kronrod += GK15_WEIGHTS[j] * (f1 + f2);
        l1 += GK15_WEIGHTS[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += G7_WEIGHTS[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let raw = ((kronrod - gauss) * half).abs();
    // QUADPACK-style sharpening of the embedded-rule difference
    let l1 = l1 * half.abs();
    let error = if raw > 0.0 && l1 > 0.0 {
        let scaled = (200.0 * raw / l1).powf(1.5);
        (l1 * scaled.min(1.0)).max(50.0 * f64::EPSILON * l1)
    } else {
        raw
    };
    Ok(Segment {
        a,
        b,
        value,
        error,
        l1,
    })
}

/// Adaptive Gauss–Kronrod (7/15) quadrature on a finite interval.
///
/// Stops when the summed error estimate is below
/// `max(abs_tol, rel_tol·|I|)`.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_segments: usize,
) -> Result<QuadratureResult, QuadratureError> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(QuadratureError::InvalidInterval(a, b));
    }
    if a == b {
        return Ok(QuadratureResult {
            value: 0.0,
            error: 0.0,
            l1_norm: 0.0,
            evaluations: 0,
        });
    }
    let mut heap = BinaryHeap::new();
    let first = gk15(&mut f, a, b)?;
    let mut evaluations = 15;
    heap.push(first);
    loop {
        let (value, error, l1) = heap.iter().fold((0.0, 0.0, 0.0), |(v, e, l), s| {
            (v + s.value, e + s.error, l + s.l1)
        });
        if error <= abs_tol.max(rel_tol * value.abs()) {
            let total: CompensatedSum = heap.iter().map(|s| s.value).collect();
            return Ok(QuadratureResult {
                value: total.value(),
                error,
                l1_norm: l1,
                evaluations,
            });
        }
        if heap.len() >= max_segments {
            return Err(QuadratureError::NonConvergence {
                estimate: value,
                error,
                evaluations,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at machine resolution
            return Err(QuadratureError::NonConvergence {
                estimate: value,
                error,
                evaluations,
            });
        }
        heap.push(gk15(&mut f, worst.a, mid)?);
        heap.push(gk15(&mut f, mid, worst.b)?);
        evaluations += 30;
    }
}

// ---------------------------------------------------------------------------
// Double-exponential rules
// ---------------------------------------------------------------------------

const DE_MAX_LEVEL: usize = 9;
const TANH_SINH_UMAX: f64 = 6.0;
const EXP_SINH_UMIN: f64 = -6.0;
const EXP_SINH_UMAX: f64 = 3.3;

/// One node of a unit double-exponential rule.
#[derive(Debug, Clone, Copy)]
struct DeNode {
    /// tanh-sinh: distance to the nearer endpoint as a fraction of (b − a);
    /// exp-sinh: offset from the finite endpoint.
    offset: f64,
    /// +1 when the node sits in the upper half (tanh-sinh only).
    upper: bool,
    weight: f64,
}

struct DeTable {
    /// levels[k] holds the nodes new at step size 2^-k.
    levels: Vec<Vec<DeNode>>,
}

fn level_abscissae(level: usize, lo: f64, hi: f64) -> Vec<f64> {
    let h = 0.5f64.powi(level as i32);
    let mut out = Vec::new();
    let start = (lo / h).ceil() as i64;
    let end = (hi / h).floor() as i64;
    for j in start..=end {
        if level > 0 && j % 2 == 0 {
            continue;
        }
        out.push(j as f64 * h);
    }
    out
}

fn tanh_sinh_table() -> &'static DeTable {
    static TABLE: OnceLock<DeTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let levels = (0..=DE_MAX_LEVEL)
            .map(|k| {
                level_abscissae(k, -TANH_SINH_UMAX, TANH_SINH_UMAX)
                    .into_iter()
                    .map(|u| {
                        let v = FRAC_PI_2 * u.sinh();
                        // 1/(1+e^{2|v|}): distance from the nearer end of [0,1]
                        let e = (-2.0 * v.abs()).exp();
                        let offset = e / (1.0 + e);
                        let weight = 2.0 * FRAC_PI_2 * u.cosh() * e / ((1.0 + e) * (1.0 + e));
                        DeNode {
                            offset,
                            upper: u > 0.0,
                            weight,
                        }
                    })
                    .filter(|n| n.offset > 0.0 && n.weight > 0.0)
                    .collect()
            })
            .collect();
        DeTable { levels }
    })
}

fn exp_sinh_table() -> &'static DeTable {
    static TABLE: OnceLock<DeTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let levels = (0..=DE_MAX_LEVEL)
            .map(|k| {
                level_abscissae(k, EXP_SINH_UMIN, EXP_SINH_UMAX)
                    .into_iter()
                    .map(|u| {
                        let e = (FRAC_PI_2 * u.sinh()).exp();
                        DeNode {
                            offset: e,
                            upper: true,
                            weight: FRAC_PI_2 * u.cosh() * e,
                        }
                    })
                    .filter(|n| n.offset > 0.0 && n.weight > 0.0 && n.offset.is_finite())
                    .collect()
            })
            .collect();
        DeTable { levels }
    })
}

fn de_driver<F: FnMut(&DeNode) -> Result<(f64, f64), QuadratureError>>(
    table: &DeTable,
    rel_tol: f64,
    mut eval: F,
) -> Result<QuadratureResult, QuadratureError> {
    let mut sum = CompensatedSum::new();
    let mut l1 = 0.0;
    let mut evaluations = 0;
    let mut previous = f64::NAN;
    let mut last_diff = f64::INFINITY;
    for (k, nodes) in table.levels.iter().enumerate() {
        for node in nodes {
            let (fx, w) = eval(node)?;
            let term = w * fx;
            sum.add(term);
            l1 += term.abs();
            evaluations += 1;
        }
        let h = 0.5f64.powi(k as i32);
        let estimate = h * sum.value();
        let l1_est = h * l1;
        if k >= 3 {
            last_diff = (estimate - previous).abs();
            if last_diff <= rel_tol * l1_est || l1_est == 0.0 {
                return Ok(QuadratureResult {
                    value: estimate,
                    error: last_diff,
                    l1_norm: l1_est,
                    evaluations,
                });
            }
        }
        previous = estimate;
    }
    Err(QuadratureError::NonConvergence {
        estimate: previous,
        error: last_diff,
        evaluations,
    })
}

/// tanh-sinh quadrature on [a, b]. The integrand receives the abscissa
/// computed from the nearer endpoint, so integrable endpoint singularities
/// are sampled without cancellation.
pub fn tanh_sinh<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<QuadratureResult, QuadratureError> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(QuadratureError::InvalidInterval(a, b));
    }
    let width = b - a;
    if width == 0.0 {
        return Ok(QuadratureResult {
            value: 0.0,
            error: 0.0,
            l1_norm: 0.0,
            evaluations: 0,
        });
    }
    de_driver(tanh_sinh_table(), rel_tol, |node| {
        let d = width * node.offset;
        let x = if node.upper { b - d } else { a + d };
        if x <= a || x >= b {
            return Ok((0.0, 0.0));
        }
        let fx = f(x);
        if !fx.is_finite() {
            return Err(QuadratureError::NonFinite(x));
        }
        Ok((fx, width * node.weight))
    })
}

/// exp-sinh quadrature on [a, ∞) with length scale `scale`, for integrands
/// that decay at least exponentially.
pub fn exp_sinh<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    scale: f64,
    rel_tol: f64,
) -> Result<QuadratureResult, QuadratureError> {
    if !a.is_finite() || !(scale > 0.0) {
        return Err(QuadratureError::InvalidInterval(a, f64::INFINITY));
    }
    de_driver(exp_sinh_table(), rel_tol, |node| {
        let x = a + scale * node.offset;
        if x <= a {
            return Ok((0.0, 0.0));
        }
        let fx = f(x);
        if !fx.is_finite() {
            return Err(QuadratureError::NonFinite(x));
        }
        Ok((fx, scale * node.weight))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(8);
        // degree 15 is the highest exact degree
        let v = rule.integrate(0.0, 2.0, |x| x.powi(15));
        assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-10);
        let w: f64 = rule.weights.iter().sum();
        assert!((w - 2.0).abs() < 1e-15);
    }

    #[test]
    fn gk15_exact_for_low_degree_and_adapts() {
        let r = integrate_adaptive(|x| 3.0 * x * x, 0.0, 1.0, 1e-14, 1e-14, 100).unwrap();
        assert!((r.value - 1.0).abs() < 1e-15);
        let r = integrate_adaptive(|x: f64| x.sqrt(), 0.0, 1.0, 1e-13, 1e-13, 500).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn tanh_sinh_handles_endpoint_singularity() {
        let r = tanh_sinh(|x: f64| x.powf(-0.9), 0.0, 1.0, 1e-12).unwrap();
        assert!((r.value - 10.0).abs() < 1e-9, "{}", r.value);
        let r = tanh_sinh(|x: f64| (1.0 - x * x).sqrt(), -1.0, 1.0, 1e-14).unwrap();
        assert!((r.value - FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn exp_sinh_gamma_integrals() {
        // ∫_0^∞ x^{0.5} e^{-x} dx = Γ(1.5)
        let r = exp_sinh(|x: f64| x.sqrt() * (-x).exp(), 0.0, 1.0, 1e-14).unwrap();
        assert!((r.value - 0.886_226_925_452_758).abs() < 1e-14);
        let r = exp_sinh(|x: f64| (-x).exp(), 2.0, 1.0, 1e-14).unwrap();
        assert!((r.value - (-2.0f64).exp()).abs() < 1e-16);
    }
}
