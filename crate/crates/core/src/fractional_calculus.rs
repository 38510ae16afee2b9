//! Caputo derivative of order `1 < α < 2` straight from its integral form,
//!
//! ```text
//! D_t^α h(t) = 1/Γ(2−α) ∫₀ᵗ h''(ξ) (t−ξ)^{1−α} dξ,
//! ```
//!
//! plus the closed forms used to check it.
//!
//! The interval is split at `t/2`. On the right half `u = t − ξ = (t/2) s^q`
//! with `q = 2/(2−α)` turns the kernel singularity into a factor `s`; on the
//! left half `ξ = (t/2) s^q` with `q = 2/(α−1)` does the same for an `h''`
//! that blows up like `ξ^{α−2}`. Both halves then use 8-point Gauss on
//! uniform panels in `s`, and the result is accepted when `n` and `2n`
//! panels agree.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{gauss_legendre_8, tanh_sinh, QuadratureError};
use crate::special::{rgamma, shared_ml, SpecialFunctionError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FractionalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("Caputo quadrature did not settle: {panels} and {} panels differ by {difference:e} (allowed {allowed:e})", 2 * panels)]
    NonConvergence {
        panels: usize,
        difference: f64,
        allowed: f64,
    },
    #[error("second derivative is not finite at xi = {0:e}")]
    NonFinite(f64),
    #[error(transparent)]
    Special(#[from] SpecialFunctionError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Graded-mesh controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CaputoMesh {
    /// Panels over `[0, t]` on the coarse mesh (split evenly between the
    /// halves); the check mesh has twice as many.
    pub panels: usize,
    /// Accepted disagreement between the two meshes, relative to
    /// `∫|h''(ξ)|(t−ξ)^{1−α} dξ / Γ(2−α)`.
    pub rel_tol: f64,
    /// Upper limit for the grading exponent at `ξ = 0`, which grows like
    /// `2/(α−1)` as `α → 1`.
    pub max_grading: f64,
}

impl Default for CaputoMesh {
    fn default() -> Self {
        Self {
            panels: 256,
            rel_tol: 1e-6,
            max_grading: 40.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaputoResult {
    pub value: f64,
    /// `|I_{2n} − I_n|`.
    pub difference: f64,
    /// `∫|integrand|` on the finer mesh.
    pub l1_norm: f64,
}

/// One Caputo evaluation: `h''`, order and time.
pub struct CaputoQuery<F> {
    pub second_derivative: F,
    pub alpha: f64,
    pub t: f64,
    pub mesh: CaputoMesh,
}

impl<F: Fn(f64) -> f64> CaputoQuery<F> {
    pub fn new(second_derivative: F, alpha: f64, t: f64) -> Result<Self, FractionalError> {
        if !(alpha > 1.0 && alpha < 2.0) {
            return Err(FractionalError::Domain(format!(
                "alpha = {alpha} must lie strictly inside (1, 2)"
            )));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(FractionalError::Domain(format!("t = {t} must be positive")));
        }
        Ok(Self {
            second_derivative,
            alpha,
            t,
            mesh: CaputoMesh::default(),
        })
    }

    pub fn with_mesh(mut self, mesh: CaputoMesh) -> Self {
        self.mesh = mesh;
        self
    }
}

/// `D_t^α h(t)` from `h''`.
pub fn caputo<F: Fn(f64) -> f64>(q: &CaputoQuery<F>) -> Result<CaputoResult, FractionalError> {
    if q.mesh.panels < 2 || !(q.mesh.rel_tol > 0.0) || !(q.mesh.max_grading >= 1.0) {
        return Err(FractionalError::Domain(format!(
            "invalid mesh {:?}",
            q.mesh
        )));
    }
    let coarse = graded_sum(q, q.mesh.panels / 2)?;
    let fine = graded_sum(q, q.mesh.panels)?;
    let scale = rgamma(2.0 - q.alpha);
    let difference = (fine.0 - coarse.0).abs() * scale;
    let l1_norm = fine.1 * scale;
    let allowed = q.mesh.rel_tol * l1_norm;
    if difference > allowed {
        return Err(FractionalError::NonConvergence {
            panels: q.mesh.panels,
            difference,
            allowed,
        });
    }
    Ok(CaputoResult {
        value: fine.0 * scale,
        difference,
        l1_norm,
    })
}

/// `∫₀ᵗ h''(ξ)(t−ξ)^{1−α} dξ` and its L¹ norm with `panels` panels per half.
fn graded_sum<F: Fn(f64) -> f64>(
    q: &CaputoQuery<F>,
    panels: usize,
) -> Result<(f64, f64), FractionalError> {
    let rule = gauss_legendre_8();
    let (alpha, t) = (q.alpha, q.t);
    let half = 0.5 * t;
    let q_right = 2.0 / (2.0 - alpha);
    let q_left = (2.0 / (alpha - 1.0)).min(q.mesh.max_grading);
    let h = 1.0 / panels as f64;
    let mut sum = crate::summation::CompensatedSum::new();
    let mut l1 = 0.0;
    for p in 0..panels {
        let a = p as f64 * h;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let s = a + 0.5 * h * (x + 1.0);
            let w = 0.5 * h * w;
            // right half, u = t − ξ = (t/2) s^q
            let u = half * s.powf(q_right);
            let xi = t - u;
            let f = (q.second_derivative)(xi);
            if !f.is_finite() {
                return Err(FractionalError::NonFinite(xi));
            }
            // u^{1−α} du = (t/2)^{2−α} q s^{q(2−α)−1} ds = (t/2)^{2−α} q s ds
            let jac = half.powf(2.0 - alpha) * q_right * s.powf(q_right * (2.0 - alpha) - 1.0);
            let term = w * f * jac;
            sum.add(term);
            l1 += term.abs();

            // left half, ξ = (t/2) s^q
            let xi = half * s.powf(q_left);
            let f = (q.second_derivative)(xi);
            if !f.is_finite() {
                return Err(FractionalError::NonFinite(xi));
            }
            let jac = half * q_left * s.powf(q_left - 1.0) * (t - xi).powf(1.0 - alpha);
            let term = w * f * jac;
            sum.add(term);
            l1 += term.abs();
        }
    }
    Ok((sum.value(), l1))
}

/// Which part of a mode function is differentiated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeKind {
    /// `E_{α,1}(−λt^α)`, the `a_k` part.
    CosineLike,
    /// `t E_{α,2}(−λt^α)`, the `b_k` part.
    SineLike,
}

/// Second time derivative of the mode part, by term-wise differentiation:
/// `−λ t^{α−2} E_{α,α−1}(−λt^α)` and `−λ t^{α−1} E_{α,α}(−λt^α)`.
pub fn mode_second_derivative(
    alpha: f64,
    lambda: f64,
    kind: ModeKind,
    t: f64,
) -> Result<f64, FractionalError> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(FractionalError::Domain(format!(
            "alpha = {alpha} must lie in (1, 2]"
        )));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(FractionalError::Domain(format!(
            "lambda = {lambda} must be positive"
        )));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(FractionalError::Domain(format!("t = {t} must be positive")));
    }
    let z = -lambda * t.powf(alpha);
    Ok(match kind {
        ModeKind::CosineLike => {
            -lambda * t.powf(alpha - 2.0) * shared_ml(alpha, alpha - 1.0)?.eval(z)?
        }
        ModeKind::SineLike => -lambda * t.powf(alpha - 1.0) * shared_ml(alpha, alpha)?.eval(z)?,
    })
}

/// Closure form of [`mode_second_derivative`] for use with [`caputo`];
/// evaluation failures surface as NaN and are reported by `caputo`.
pub fn mode_second_derivative_fn(alpha: f64, lambda: f64, kind: ModeKind) -> impl Fn(f64) -> f64 {
    move |t| mode_second_derivative(alpha, lambda, kind, t).unwrap_or(f64::NAN)
}

/// `∫₀ᵀ t^{β−1} E_{α,β}(−λt^α) dt = T^β E_{α,β+1}(−λT^α)`.
pub fn ml_primitive(
    alpha: f64,
    beta: f64,
    lambda: f64,
    horizon: f64,
) -> Result<f64, FractionalError> {
    check_primitive(alpha, beta, lambda, horizon)?;
    Ok(horizon.powf(beta) * shared_ml(alpha, beta + 1.0)?.eval(-lambda * horizon.powf(alpha))?)
}

/// The same integral by direct quadrature.
pub fn ml_primitive_by_quadrature(
    alpha: f64,
    beta: f64,
    lambda: f64,
    horizon: f64,
) -> Result<f64, FractionalError> {
    check_primitive(alpha, beta, lambda, horizon)?;
    let e = shared_ml(alpha, beta)?;
    let failure = std::cell::Cell::new(None);
    let r = tanh_sinh(
        |t| match e.eval(-lambda * t.powf(alpha)) {
            Ok(v) => t.powf(beta - 1.0) * v,
            Err(err) => {
                failure.set(Some(err));
                0.0
            }
        },
        0.0,
        horizon,
        1e-12,
    )?;
    if let Some(err) = failure.take() {
        return Err(err.into());
    }
    Ok(r.value)
}

fn check_primitive(
    alpha: f64,
    beta: f64,
    lambda: f64,
    horizon: f64,
) -> Result<(), FractionalError> {
    if !(alpha > 0.0 && alpha <= 2.0) || !(beta > 0.0 && beta.is_finite()) {
        return Err(FractionalError::Domain(format!(
            "need 0 < alpha <= 2 and beta > 0, got {alpha}, {beta}"
        )));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) || !(horizon > 0.0 && horizon.is_finite()) {
        return Err(FractionalError::Domain(format!(
            "need lambda >= 0 and T > 0, got {lambda}, {horizon}"
        )));
    }
    Ok(())
}
