//! Numerical image of a power function under the transform with Wright
//! kernel `φ(−α, β; ·)`:
//!
//! `P t^{γ−1} = t^{β−1} ∫₀^∞ s^{γ−1} φ(−α, β; −s/t^α) ds`,
//!
//! compared against `Γ(γ)/Γ(αγ+β) · t^{αγ+β−1}`. The cutoff is located in
//! the scaled variable `y = s/t^α`, where the tail beyond `Y` is negligible
//! (the kernel decays like `exp(−c y^{1/(1−α)})`); the integral is then
//! taken by tanh-sinh on `[0, t^α Y]` in `s`.

use std::cell::RefCell;

use super::gamma::{gamma_real, rgamma};
use super::wright::WrightSeries;
use super::SpecialFunctionError;
use crate::quadrature::tanh_sinh;

const CUTOFF_STEP: f64 = 1.25;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PskhuControls {
    /// Relative tolerance of the finite-interval quadrature.
    pub rel_tol: f64,
    /// Largest acceptable truncation estimate relative to the integral.
    pub tail_tol: f64,
    /// Upper limit for the cutoff search.
    pub max_cutoff: f64,
}

impl Default for PskhuControls {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            tail_tol: 1e-9,
            max_cutoff: 4096.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PskhuResult {
    pub value: f64,
    /// Estimated contribution of `[cutoff, ∞)`, already scaled like `value`.
    pub truncation_estimate: f64,
    /// Quadrature error estimate on `[0, cutoff]`, scaled like `value`.
    pub quadrature_error: f64,
    /// Cutoff in the scaled variable `y = s / t^α`.
    pub cutoff: f64,
}

pub fn pskhu_closed_form(
    alpha: f64,
    beta: f64,
    gamma: f64,
    t: f64,
) -> Result<f64, SpecialFunctionError> {
    let e = alpha * gamma + beta;
    Ok(gamma_real(gamma)? * rgamma(e) * t.powf(e - 1.0))
}

pub fn pskhu_image_of_power(
    alpha: f64,
    beta: f64,
    gamma: f64,
    t: f64,
    controls: PskhuControls,
) -> Result<PskhuResult, SpecialFunctionError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(SpecialFunctionError::Domain(format!(
            "the Wright kernel needs alpha in (0, 1), got {alpha}"
        )));
    }
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(SpecialFunctionError::Domain(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(SpecialFunctionError::Domain(format!(
            "t must be positive, got {t}"
        )));
    }
    if !beta.is_finite() {
        return Err(SpecialFunctionError::Domain("beta must be finite".into()));
    }
    let kernel = WrightSeries::new(-alpha, beta)?;
    // absolute accuracy of kernel values, well below the cutoff threshold
    let abs_tol = 1e-16 * rgamma(beta).abs().max(1e-3);
    let failure: RefCell<Option<SpecialFunctionError>> = RefCell::new(None);
    let integrand = |y: f64| -> f64 {
        match kernel.eval_to(-y, 1e-13, abs_tol) {
            Ok(v) => y.powf(gamma - 1.0) * v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let take_failure = || failure.borrow_mut().take();

    // Cutoff search on a geometric grid. Far out the kernel is log-concave,
    // so the secant slope κ of ln f over the last step under-estimates the
    // decay rate and f(Y)/κ bounds the mass beyond Y.
    let mut peak = 0.0f64;
    let mut y = 1.0;
    let mut prev = integrand(y).abs();
    if let Some(e) = take_failure() {
        return Err(e);
    }
    let cutoff;
    let tail;
    loop {
        let next = y * CUTOFF_STEP;
        if next > controls.max_cutoff {
            return Err(SpecialFunctionError::NonConvergence(format!(
                "kernel not negligible below y = {}",
                controls.max_cutoff
            )));
        }
        let here = integrand(next).abs();
        if let Some(e) = take_failure() {
            return Err(e);
        }
        peak = peak.max(prev);
        let kappa = (prev / here).ln() / (next - y);
        y = next;
        if kappa > 0.0 && here < prev {
            let estimate = here / kappa;
            if estimate <= 1e-3 * controls.tail_tol * peak {
                cutoff = y;
                tail = estimate;
                break;
            }
        }
        prev = here;
    }
    // the quadrature itself runs in the original variable s = t^α y
    let t_alpha = t.powf(alpha);
    let in_s = |s: f64| integrand(s / t_alpha) * t_alpha.powf(gamma - 1.0);
    let r = tanh_sinh(in_s, 0.0, t_alpha * cutoff, controls.rel_tol)?;
    if let Some(e) = take_failure() {
        return Err(e);
    }
    let tail = tail * t_alpha.powf(gamma);
    if tail > controls.tail_tol * r.value.abs() {
        return Err(SpecialFunctionError::NonConvergence(format!(
            "truncation estimate {tail:e} exceeds tolerance against integral {:e}",
            r.value
        )));
    }
    let scale = t.powf(beta - 1.0);
    Ok(PskhuResult {
        value: scale * r.value,
        truncation_estimate: scale * tail,
        quadrature_error: scale * r.error,
        cutoff,
    })
}
