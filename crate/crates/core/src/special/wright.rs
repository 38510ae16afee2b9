//! Wright function `φ(δ, β; z) = Σ_{k≥0} z^k / (k! Γ(β + δk))`, `δ > −1`.
//!
//! Terms are formed in log space so neither `k!` nor `1/Γ` overflows. The
//! double-precision sum is accepted when its rounding estimate (the sum of
//! absolute terms times a few ulps) meets the target; otherwise the sum is
//! redone in MPFR with enough bits to cover the cancellation. For `δ` close
//! to −1 and large `|z|` the series needs astronomically many terms and the
//! evaluation reports non-convergence instead.

use std::sync::Mutex;

use rug::Float;

use super::gamma::{is_nonpositive_integer, ln_gamma_abs};
use super::SpecialFunctionError;
use crate::summation::CompensatedSum;

const MAX_TERMS: usize = 20_000;
const MAX_BITS: u32 = 1 << 14;
const DEFAULT_REL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrightQuery {
    pub delta: f64,
    pub beta: f64,
    pub z: f64,
}

impl WrightQuery {
    pub fn new(delta: f64, beta: f64, z: f64) -> Result<Self, SpecialFunctionError> {
        if !(delta > -1.0) || !delta.is_finite() {
            return Err(SpecialFunctionError::Domain(format!(
                "Wright function needs delta > -1, got {delta}"
            )));
        }
        if !beta.is_finite() || !z.is_finite() {
            return Err(SpecialFunctionError::Domain(
                "Wright arguments must be finite".into(),
            ));
        }
        Ok(Self { delta, beta, z })
    }
}

/// Log-magnitude and sign of the coefficient `1/(k! Γ(β+δk))`; `None` when
/// `Γ` has a pole and the coefficient vanishes.
fn ln_coeff(delta: f64, beta: f64, k: usize) -> Option<(f64, f64)> {
    let x = beta + delta * k as f64;
    if is_nonpositive_integer(x) {
        return None;
    }
    let (lg, sign) = ln_gamma_abs(x).ok()?;
    let (lf, _) = ln_gamma_abs(k as f64 + 1.0).ok()?;
    Some((-lf - lg, sign))
}

/// Evaluator for fixed `(δ, β)`; MPFR coefficients are cached across calls.
#[derive(Debug)]
pub struct WrightSeries {
    delta: f64,
    beta: f64,
    cache: Mutex<Option<(u32, Vec<Float>)>>,
}

impl Clone for WrightSeries {
    fn clone(&self) -> Self {
        Self::new_unchecked(self.delta, self.beta)
    }
}

struct Plan {
    terms: usize,
    ln_abs_total: f64,
    ln_last: f64,
}

impl WrightSeries {
    pub fn new(delta: f64, beta: f64) -> Result<Self, SpecialFunctionError> {
        WrightQuery::new(delta, beta, 0.0)?;
        Ok(Self::new_unchecked(delta, beta))
    }

    fn new_unchecked(delta: f64, beta: f64) -> Self {
        Self {
            delta,
            beta,
            cache: Mutex::new(None),
        }
    }

    /// `φ(δ, β; z)` to about 1e-13 relative.
    pub fn eval(&self, z: f64) -> Result<f64, SpecialFunctionError> {
        self.eval_to(z, DEFAULT_REL_TOL, 0.0)
    }

    /// `φ(δ, β; z)` with error at most `max(rel_tol·|φ|, abs_tol)`.
    pub fn eval_to(&self, z: f64, rel_tol: f64, abs_tol: f64) -> Result<f64, SpecialFunctionError> {
        if z == 0.0 {
            return Ok(super::gamma::rgamma(self.beta));
        }
        let mut floor = if abs_tol > 0.0 {
            abs_tol.ln() - 7.0
        } else {
            f64::INFINITY
        };
        loop {
            let plan = self.plan(z, floor)?;
            let v = self.sum_to(z, &plan, rel_tol, abs_tol)?;
            // the truncation point must also be negligible against the value
            let needed = (rel_tol * v.abs()).max(abs_tol).ln() - 7.0;
            if plan.ln_last <= needed || v == 0.0 && abs_tol == 0.0 && plan.ln_last < -745.0 {
                return Ok(v);
            }
            if needed >= floor {
                return Ok(v);
            }
            floor = needed;
        }
    }

    fn sum_to(
        &self,
        z: f64,
        plan: &Plan,
        rel_tol: f64,
        abs_tol: f64,
    ) -> Result<f64, SpecialFunctionError> {
        let (v, abs_total) = self.sum_f64(z, plan.terms);
        let rounding = abs_total * (plan.terms as f64 + 4.0) * f64::EPSILON;
        if rounding <= (rel_tol * v.abs()).max(abs_tol) {
            return Ok(v);
        }
        // digits lost to cancellation, measured against the looser of the
        // two tolerances
        let allowed = (rel_tol * v.abs()).max(abs_tol).max(f64::MIN_POSITIVE);
        let mut bits = 64
            + ((plan.ln_abs_total - allowed.ln()) / std::f64::consts::LN_2)
                .max(0.0)
                .ceil() as u32
            + (plan.terms as f64).log2().ceil() as u32;
        while bits <= MAX_BITS {
            let v = self.sum_mpfr(z, plan.terms, bits);
            // in logs: Σ|terms| may overflow and 2^{-bits} underflow
            let ln_err = plan.ln_abs_total
                + (2.0 * plan.terms as f64 + 8.0).ln()
                + (1.0 - bits as f64) * std::f64::consts::LN_2;
            let ln_tol = (rel_tol * v.abs()).max(abs_tol).max(f64::MIN_POSITIVE).ln();
            if ln_err <= ln_tol {
                return Ok(v);
            }
            if v.abs().ln() < ln_err + 2.0 {
                // not even the magnitude is resolved yet
                bits *= 2;
            } else {
                bits += ((ln_err - ln_tol) / std::f64::consts::LN_2)
                    .ceil()
                    .max(16.0) as u32;
            }
        }
        Err(SpecialFunctionError::NonConvergence(format!(
            "Wright series φ({}, {}; {z}) needs more than {MAX_BITS} bits",
            self.delta, self.beta
        )))
    }

    /// Terms needed until three in a row fall below `ln_floor` (and below
    /// 1e-45 of the largest term), with the log of Σ|terms|.
    fn plan(&self, z: f64, ln_floor: f64) -> Result<Plan, SpecialFunctionError> {
        let ln_z = z.abs().ln();
        let mut ln_max = f64::NEG_INFINITY;
        let mut small_run = 0;
        for k in 0..MAX_TERMS {
            if let Some((lc, _)) = ln_coeff(self.delta, self.beta, k) {
                let lt = lc + k as f64 * ln_z;
                ln_max = ln_max.max(lt);
                if lt < ln_floor.min(ln_max - 45.0 * std::f64::consts::LN_10) {
                    small_run += 1;
                    if small_run >= 3 {
                        return Ok(Plan {
                            terms: k + 1,
                            ln_abs_total: ln_max + (k as f64 + 1.0).ln(),
                            ln_last: lt,
                        });
                    }
                } else {
                    small_run = 0;
                }
            }
        }
        Err(SpecialFunctionError::NonConvergence(format!(
            "Wright series φ({}, {}; {z}) has not settled after {MAX_TERMS} terms",
            self.delta, self.beta
        )))
    }

    fn sum_f64(&self, z: f64, terms: usize) -> (f64, f64) {
        let ln_z = z.abs().ln();
        let neg = z < 0.0;
        let mut s = CompensatedSum::new();
        for k in 0..terms {
            if let Some((lc, sign)) = ln_coeff(self.delta, self.beta, k) {
                let mag = (lc + k as f64 * ln_z).exp();
                let sgn = if neg && k % 2 == 1 { -sign } else { sign };
                s.add(sgn * mag);
            }
        }
        (s.value(), s.abs_total())
    }

    /// MPFR Horner sum of the first `terms` terms at `bits` precision.
    fn sum_mpfr(&self, z: f64, terms: usize, bits: u32) -> f64 {
        let mut guard = self.cache.lock().unwrap_or_else(|p| p.into_inner());
        let stale = match guard.as_ref() {
            Some((b, c)) => *b < bits || c.len() < terms,
            None => true,
        };
        if stale {
            let (mut want_terms, mut want_bits) = (terms, bits);
            if let Some((b, c)) = guard.as_ref() {
                // grow generously so a sweep over arguments rebuilds rarely
                want_terms = terms.max(c.len() + c.len() / 4);
                want_bits = bits.max(*b);
            }
            *guard = Some((want_bits, self.build_coefficients(want_terms, want_bits)));
        }
        let (_, coeffs) = guard.as_ref().expect("coefficients just built");
        let zf = Float::with_val(bits, z);
        let mut acc = Float::with_val(bits, 0);
        for c in coeffs[..terms].iter().rev() {
            acc *= &zf;
            acc += c;
        }
        acc.to_f64()
    }

    fn build_coefficients(&self, terms: usize, bits: u32) -> Vec<Float> {
        let beta = Float::with_val(bits, self.beta);
        let delta = Float::with_val(bits, self.delta);
        let mut out = Vec::with_capacity(terms);
        let mut fact = Float::with_val(bits, 1);
        for k in 0..terms {
            if k > 0 {
                fact *= k as u32;
            }
            let x = beta.clone() + Float::with_val(bits, &delta * k as u32);
            if x <= 0 && x.is_integer() {
                out.push(Float::with_val(bits, 0));
            } else {
                out.push(Float::with_val(bits, 1) / (x.gamma() * &fact));
            }
        }
        out
    }
}

/// `φ(δ, β; z)` to about 1e-13 relative.
pub fn wright(q: WrightQuery) -> Result<f64, SpecialFunctionError> {
    WrightSeries::new(q.delta, q.beta)?.eval(q.z)
}
