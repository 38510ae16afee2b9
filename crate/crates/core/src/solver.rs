//! Explicit series solution of
//!
//! ```text
//! D_t^α u + A D_t^α u + ν² A u = 0,   0 < t < T,  1 < α < 2,
//! u(0) = u(T),   ∫₀ᵀ u(t) dt = φ.
//! ```
//!
//! Projecting onto `v_k` gives `D_t^α T_k = −ν_k² T_k` with
//! `ν_k² = ν² λ_k / (1 + λ_k)`, so
//! `T_k(t) = a_k E_{α,1}(−ν_k² t^α) + b_k t E_{α,2}(−ν_k² t^α)`, and the two
//! non-local conditions fix `a_k`, `b_k` through a 2×2 system with
//! determinant `T² D_k`, `D_k = E2² + E3 (1 − E1)`.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::format::sig17;
use crate::special::{shared_ml, MittagLeffler, SpecialFunctionError};
use crate::spectral::{
    expand, ExpandControls, Mode, PhiData, SpectralError, SpectrumModel, TailReport,
};

/// Relative residual allowed in the 2×2 system after the closed forms.
pub const SYSTEM_TOL: f64 = 1e-12;
/// Denominators at or below this are treated as degenerate.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate denominator D = {value:e} for mode {k} (alpha = {alpha}); this should not happen for 1 < alpha < 2")]
    DegenerateDenominator { k: usize, alpha: f64, value: f64 },
    #[error("mode {k}: {what} residual {residual:e} exceeds {tol:e}")]
    Postcondition {
        k: usize,
        what: &'static str,
        residual: f64,
        tol: f64,
    },
    #[error("data outside D(A): {0}")]
    DataRegularity(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Special(#[from] SpecialFunctionError),
}

fn default_tol() -> f64 {
    1e-4
}

/// Everything needed to build the series solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub alpha: f64,
    pub nu: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub spectrum: SpectrumModel,
    pub phi: PhiData,
    #[serde(rename = "K")]
    pub modes: usize,
    /// Residual tolerance for the Caputo check of each mode.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub expand: ExpandControls,
    /// Turn the D(A) decay warning into an error.
    #[serde(default)]
    pub strict_regularity: bool,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.alpha > 1.0 && self.alpha < 2.0) {
            return Err(SolverError::InvalidProblem(format!(
                "alpha = {} must lie strictly inside (1, 2); alpha = 2 is only available as the classical denominator",
                self.alpha
            )));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(SolverError::InvalidProblem(format!(
                "nu = {} must be positive",
                self.nu
            )));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(SolverError::InvalidProblem(format!(
                "T = {} must be positive",
                self.horizon
            )));
        }
        if self.modes == 0 {
            return Err(SolverError::InvalidProblem("K must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(SolverError::InvalidProblem(format!(
                "tol = {} must be positive",
                self.tol
            )));
        }
        self.spectrum.validate()?;
        Ok(())
    }
}

/// Closed-form coefficients of one mode and the Mittag-Leffler values
/// they came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeCoefficients {
    #[serde(rename = "E1")]
    pub e1: f64,
    #[serde(rename = "E2")]
    pub e2: f64,
    #[serde(rename = "E3")]
    pub e3: f64,
    #[serde(rename = "D_k")]
    pub d: f64,
    #[serde(rename = "a_k")]
    pub a: f64,
    #[serde(rename = "b_k")]
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeSolution {
    pub k: usize,
    /// Quantum numbers of the eigenfunction, see [`Mode`].
    pub m: usize,
    pub n: usize,
    pub lambda_k: f64,
    pub nu_k_sq: f64,
    #[serde(rename = "E1")]
    pub e1: f64,
    #[serde(rename = "E2")]
    pub e2: f64,
    #[serde(rename = "E3")]
    pub e3: f64,
    #[serde(rename = "D_k")]
    pub d_k: f64,
    pub a_k: f64,
    pub b_k: f64,
    pub phi_k: f64,
}

impl ModeSolution {
    fn spectral_mode(&self) -> Mode {
        Mode {
            index: self.k,
            lambda: self.lambda_k,
            m: self.m,
            n: self.n,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesSolution {
    pub spec: ProblemSpec,
    pub modes: Vec<ModeSolution>,
    /// Bound on `sup_t ‖A(u − u_K)(t)‖` over the coefficients available
    /// beyond K.
    pub tail_bound: f64,
    /// The constant `C` in `tail_bound = (C/T)·‖Aφ_tail‖`.
    pub tail_constant: f64,
    pub tail_report: TailReport,
    pub warnings: Vec<String>,
    #[serde(skip)]
    kernels: Kernels,
}

#[derive(Debug, Clone)]
struct Kernels {
    e1: Arc<MittagLeffler>,
    e2: Arc<MittagLeffler>,
    e3: Arc<MittagLeffler>,
}

impl Kernels {
    fn new(alpha: f64) -> Result<Self, SolverError> {
        Ok(Self {
            e1: shared_ml(alpha, 1.0)?,
            e2: shared_ml(alpha, 2.0)?,
            e3: shared_ml(alpha, 3.0)?,
        })
    }
}

/// `ν_k² = ν² λ_k / (1 + λ_k)`.
pub fn effective_frequency(nu: f64, lambda_k: f64) -> f64 {
    // λ/(1+λ) = 1/(1+1/λ) stays accurate for huge λ
    nu * nu / (1.0 + 1.0 / lambda_k)
}

fn check_alpha(alpha: f64) -> Result<(), SolverError> {
    if alpha > 1.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(SolverError::Domain(format!(
            "alpha = {alpha} must lie strictly inside (1, 2)"
        )))
    }
}

/// `a_k`, `b_k`, `D_k` from the closed forms, with both non-local
/// equations checked afterwards.
pub fn mode_coefficients(
    alpha: f64,
    nu_k_sq: f64,
    horizon: f64,
    phi_k: f64,
) -> Result<ModeCoefficients, SolverError> {
    check_alpha(alpha)?;
    coefficients_with(&Kernels::new(alpha)?, alpha, nu_k_sq, horizon, phi_k, 0)
}

fn coefficients_with(
    kernels: &Kernels,
    alpha: f64,
    nu_k_sq: f64,
    horizon: f64,
    phi_k: f64,
    k: usize,
) -> Result<ModeCoefficients, SolverError> {
    if !(nu_k_sq > 0.0 && nu_k_sq.is_finite())
        || !(horizon > 0.0 && horizon.is_finite())
        || !phi_k.is_finite()
    {
        return Err(SolverError::Domain(format!(
            "need nu_k^2 > 0, T > 0 and finite phi_k; got {nu_k_sq}, {horizon}, {phi_k}"
        )));
    }
    let z = -nu_k_sq * horizon.powf(alpha);
    let e1 = kernels.e1.eval(z)?;
    let e2 = kernels.e2.eval(z)?;
    let e3 = kernels.e3.eval(z)?;
    let d = e2 * e2 + e3 * (1.0 - e1);
    if !(d > DEGENERATE_DENOMINATOR) {
        return Err(SolverError::DegenerateDenominator { k, alpha, value: d });
    }
    let t = horizon;
    let a = phi_k * e2 / (t * d);
    let b = phi_k * (1.0 - e1) / (t * t * d);

    // u(0) = u(T):  a(1 − E1) = b T E2
    let (l, r) = (a * (1.0 - e1), b * t * e2);
    let residual = (l - r).abs() / (l.abs() + r.abs()).max(f64::MIN_POSITIVE);
    if l != r && residual > SYSTEM_TOL {
        return Err(SolverError::Postcondition {
            k,
            what: "periodicity equation",
            residual,
            tol: SYSTEM_TOL,
        });
    }
    // ∫ u = φ:  a T E2 + b T² E3 = φ
    let (p, q) = (a * t * e2, b * t * t * e3);
    let scale = p.abs() + q.abs() + phi_k.abs();
    if scale > 0.0 {
        let residual = (p + q - phi_k).abs() / scale;
        if residual > SYSTEM_TOL {
            return Err(SolverError::Postcondition {
                k,
                what: "integral equation",
                residual,
                tol: SYSTEM_TOL,
            });
        }
    }
    Ok(ModeCoefficients {
        e1,
        e2,
        e3,
        d,
        a,
        b,
    })
}

/// `T_k(t) = a_k E_{α,1}(−ν_k² t^α) + b_k t E_{α,2}(−ν_k² t^α)` for `t ∈ [0, T]`.
pub fn evaluate_mode(
    mode: &ModeSolution,
    alpha: f64,
    horizon: f64,
    t: f64,
) -> Result<f64, SolverError> {
    check_alpha(alpha)?;
    mode_value(&Kernels::new(alpha)?, mode, alpha, horizon, t)
}

fn mode_value(
    kernels: &Kernels,
    mode: &ModeSolution,
    alpha: f64,
    horizon: f64,
    t: f64,
) -> Result<f64, SolverError> {
    if !(t >= 0.0 && t <= horizon) {
        return Err(SolverError::Domain(format!(
            "t = {t} lies outside [0, {horizon}]"
        )));
    }
    if mode.a_k == 0.0 && mode.b_k == 0.0 {
        return Ok(0.0);
    }
    if t == 0.0 {
        return Ok(mode.a_k);
    }
    let z = -mode.nu_k_sq * t.powf(alpha);
    Ok(mode.a_k * kernels.e1.eval(z)? + mode.b_k * t * kernels.e2.eval(z)?)
}

/// Builds modes 1..K and the tail bound.
pub fn solve(spec: &ProblemSpec) -> Result<SeriesSolution, SolverError> {
    spec.validate()?;
    let expansion = expand(&spec.phi, &spec.spectrum, spec.modes, &spec.expand)?;
    let mut warnings = Vec::new();
    if let Some(w) = &expansion.tail.warning {
        if spec.strict_regularity {
            return Err(SolverError::DataRegularity(w.clone()));
        }
        warnings.push(w.clone());
    }
    let kernels = Kernels::new(spec.alpha)?;
    let build = |(mode, &phi_k): (&Mode, &f64)| -> Result<ModeSolution, SolverError> {
        let nu_k_sq = effective_frequency(spec.nu, mode.lambda);
        let c = coefficients_with(
            &kernels,
            spec.alpha,
            nu_k_sq,
            spec.horizon,
            phi_k,
            mode.index,
        )?;
        Ok(ModeSolution {
            k: mode.index,
            m: mode.m,
            n: mode.n,
            lambda_k: mode.lambda,
            nu_k_sq,
            e1: c.e1,
            e2: c.e2,
            e3: c.e3,
            d_k: c.d,
            a_k: c.a,
            b_k: c.b,
            phi_k,
        })
    };
    let modes: Vec<ModeSolution> = expansion
        .modes
        .par_iter()
        .zip(expansion.coefficients.par_iter())
        .map(build)
        .collect::<Result<_, _>>()?;

    // |T_k(t)| ≤ |φ_k|(|E2| + |1 − E1|)/(T D_k) ≤ 3|φ_k|/(T D_k) because
    // |E_{α,1}|, |E_{α,2}| < 1 on the negative axis; hence C = 3 / min D_k
    // over the tail modes that carry data.
    let tail: Vec<(&Mode, f64)> = expansion
        .tail_modes
        .iter()
        .zip(expansion.tail_coefficients.iter().copied())
        .filter(|(_, c)| *c != 0.0)
        .collect();
    let (tail_bound, tail_constant) = if tail.is_empty() {
        (0.0, 0.0)
    } else {
        let d_min = tail
            .par_iter()
            .map(|(mode, c)| build((mode, c)).map(|s| s.d_k))
            .collect::<Result<Vec<f64>, _>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let c = 3.0 / d_min;
        (c / spec.horizon * expansion.tail.tail_norm, c)
    };

    Ok(SeriesSolution {
        spec: spec.clone(),
        modes,
        tail_bound,
        tail_constant,
        tail_report: expansion.tail,
        warnings,
        kernels,
    })
}

impl SeriesSolution {
    /// `(T_1(t), …, T_K(t))`.
    pub fn evaluate(&self, t: f64) -> Result<Vec<f64>, SolverError> {
        self.modes
            .iter()
            .map(|m| mode_value(&self.kernels, m, self.spec.alpha, self.spec.horizon, t))
            .collect()
    }

    /// `T_k(t)` for the mode at position `index` (0-based).
    pub fn mode_at(&self, index: usize, t: f64) -> Result<f64, SolverError> {
        mode_value(
            &self.kernels,
            &self.modes[index],
            self.spec.alpha,
            self.spec.horizon,
            t,
        )
    }

    /// `u(t)(x) = Σ T_k(t) v_k(x)`.
    pub fn evaluate_at(&self, t: f64, x: &[f64]) -> Result<f64, SolverError> {
        let coeffs = self.evaluate(t)?;
        let mut acc = crate::summation::CompensatedSum::new();
        for (m, c) in self.modes.iter().zip(coeffs) {
            acc.add(c * self.spec.spectrum.eigenfunction(&m.spectral_mode(), x)?);
        }
        Ok(acc.value())
    }

    /// `‖A^s u(t)‖ = (Σ λ_k^{2s} T_k(t)²)^{1/2}`.
    pub fn graded_norm_at(&self, t: f64, s: f64) -> Result<f64, SolverError> {
        let coeffs = self.evaluate(t)?;
        let lambdas: Vec<f64> = self.modes.iter().map(|m| m.lambda_k).collect();
        Ok(crate::spectral::graded_norm(&coeffs, &lambdas, s)?)
    }

    /// `‖A^s φ_K‖` over the retained modes.
    pub fn data_norm(&self, s: f64) -> Result<f64, SolverError> {
        let phi: Vec<f64> = self.modes.iter().map(|m| m.phi_k).collect();
        let lambdas: Vec<f64> = self.modes.iter().map(|m| m.lambda_k).collect();
        Ok(crate::spectral::graded_norm(&phi, &lambdas, s)?)
    }

    /// The same solution with every `b_k` multiplied by `factor`; used to
    /// check that the verification notices a corrupted coefficient.
    pub fn with_scaled_b(&self, factor: f64) -> SeriesSolution {
        let mut out = self.clone();
        for m in &mut out.modes {
            m.b_k *= factor;
        }
        out
    }

    pub fn write_json<W: Write>(&self, out: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(out, self).map_err(std::io::Error::from)
    }

    /// CSV time series `t,T_1,…,T_K` on the given times.
    pub fn write_csv<W: Write>(&self, out: W, times: &[f64]) -> Result<(), SolverError> {
        let io = |e: csv::Error| SolverError::Domain(format!("CSV output: {e}"));
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend(self.modes.iter().map(|m| format!("T_{}", m.k)));
        w.write_record(&header).map_err(io)?;
        let rows: Vec<Vec<f64>> = times
            .par_iter()
            .map(|&t| self.evaluate(t))
            .collect::<Result<_, _>>()?;
        for (t, row) in times.iter().zip(rows) {
            let mut rec = vec![sig17(*t)];
            rec.extend(row.into_iter().map(sig17));
            w.write_record(&rec).map_err(io)?;
        }
        w.flush()
            .map_err(|e| SolverError::Domain(format!("CSV output: {e}")))?;
        Ok(())
    }
}

/// `D` of the classical α = 2 problem at `x = ν T`:
/// `(sin x / x)² + (1 − cos x)²/x² = 2(1 − cos x)/x²`, written as
/// `(2 sin(x/2) / x)²` so it stays accurate near `x = 0`.
pub fn classical_mode_denominator(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let r = 2.0 * (0.5 * x).sin() / x;
    r * r
}
