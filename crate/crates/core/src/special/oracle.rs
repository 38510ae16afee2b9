//! Arbitrary-precision reference values of `E_{ρ,μ}(z)`, `z ≤ 0`.
//!
//! Two regimes, each with an explicit error bound:
//!
//! * **Series.** The Taylor series summed in MPFR with enough working bits
//!   to absorb the cancellation between terms; the bound adds the geometric
//!   tail estimate and a per-term rounding allowance. Precision is raised
//!   and the sum repeated until the bound meets the target.
//! * **Asymptotic.** For `ρ ≠ 1` the contour representation splits into
//!   the pole terms plus `Σ_{n=1}^{N} (−1)^{n−1} x^{−n} / Γ(μ−ρn)` and a
//!   remainder bounded by `Γ(ρ(N+1) − μ + 1) / (π m x^{N+1})`, where
//!   `m = |sin πρ|` when `cos πρ < 0` and 1 otherwise.
//!
//! The oracle is independent of the double-precision evaluator: it never
//! touches the quadrature path and uses MPFR's Gamma function.

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

use super::gamma::{cos_pi, ln_gamma_abs, sin_pi};
use super::{MLQuery, SpecialFunctionError};

const MIN_DIGITS: u32 = 50;
// keeps the target 10^{-digits} a normal double
const MAX_DIGITS: u32 = 300;
const MAX_SERIES_TERMS: usize = 100_000;
const MAX_WORKING_BITS: u32 = 1 << 18;
const LOG2_10: f64 = std::f64::consts::LOG2_10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleRegime {
    Origin,
    Series,
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct OracleValue {
    /// Nearest double to the reference value.
    pub value: f64,
    /// Certified bound on the relative error of `decimal`.
    pub relative_error_bound: f64,
    /// Reference value as a decimal string with the requested digits.
    pub decimal: String,
    pub regime: OracleRegime,
    pub working_bits: u32,
}

/// High-precision `E_{ρ,μ}(z)` with a certified relative error of at most
/// `10^{-significant_digits}`, or a refusal.
pub fn ml_oracle(q: MLQuery, significant_digits: u32) -> Result<OracleValue, SpecialFunctionError> {
    if !(MIN_DIGITS..=MAX_DIGITS).contains(&significant_digits) {
        return Err(SpecialFunctionError::Domain(format!(
            "oracle digits must lie in {MIN_DIGITS}..={MAX_DIGITS}, got {significant_digits}"
        )));
    }
    let target = 10f64.powi(-(significant_digits as i32));
    let base_bits = (significant_digits as f64 * LOG2_10).ceil() as u32 + 64;
    if q.z == 0.0 {
        let g = Float::with_val(base_bits, q.mu).gamma();
        let v = Float::with_val(base_bits, 1) / g;
        return Ok(finish(
            v,
            0.0,
            significant_digits,
            OracleRegime::Origin,
            base_bits,
        ));
    }
    if let Some(found) = asymptotic(q, significant_digits, target, base_bits) {
        return Ok(found);
    }
    series(q, significant_digits, target, base_bits)
}

fn finish(v: Float, rel_bound: f64, digits: u32, regime: OracleRegime, bits: u32) -> OracleValue {
    OracleValue {
        value: v.to_f64(),
        relative_error_bound: rel_bound,
        decimal: format!("{:.*e}", digits as usize - 1, v),
        regime,
        working_bits: bits,
    }
}

fn ln_abs(v: &Float) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    // exponent plus log of the mantissa in [0.5, 1)
    let e = v.get_exp().unwrap_or(0) as f64;
    let m = Float::with_val(64, v >> v.get_exp().unwrap_or(0))
        .to_f64()
        .abs();
    e * std::f64::consts::LN_2 + m.ln()
}

fn asymptotic(q: MLQuery, digits: u32, target: f64, base_bits: u32) -> Option<OracleValue> {
    let (rho, mu) = (q.rho, q.mu);
    if rho == 1.0 {
        return None;
    }
    let m = if cos_pi(rho) < 0.0 {
        sin_pi(rho).abs()
    } else {
        1.0
    };
    if m == 0.0 {
        return None;
    }
    let x = -q.z;
    let ln_x = x.ln();
    let ln_pi_m = (std::f64::consts::PI * m).ln();
    // rough size of the value: the larger of the leading algebraic term
    // and the pole amplitude; only used to stop early, re-checked below
    let mut ln_est = f64::NEG_INFINITY;
    for k in 1..=4usize {
        let arg = mu - rho * k as f64;
        if let Ok((lg, _)) = ln_gamma_abs(arg) {
            ln_est = -(k as f64) * ln_x - lg;
            break;
        }
    }
    if rho > 1.0 {
        let bx = x.powf(1.0 / rho);
        ln_est = ln_est.max(bx * cos_pi(1.0 / rho) + (1.0 - mu) * bx.ln() + (2.0 / rho).ln());
    }
    let ln_goal = target.ln() + ln_est - 8.0;
    // smallest order meeting the goal, else the order minimising the bound
    let mut best: Option<(usize, f64)> = None;
    let mut n = 1usize;
    loop {
        let arg = rho * (n + 1) as f64 - mu + 1.0;
        if arg > 0.0 {
            let (lg, _) = ln_gamma_abs(arg).ok()?;
            let ln_bound = lg - ln_pi_m - (n + 1) as f64 * ln_x;
            match best {
                Some((_, b)) if ln_bound > b => break,
                _ => best = Some((n, ln_bound)),
            }
            if ln_bound < ln_goal {
                break;
            }
        }
        n += 1;
        if n > MAX_SERIES_TERMS {
            break;
        }
    }
    let (order, ln_bound) = best?;
    // quick rejection: the bound must beat the target against a value of
    // at least e^{-big X}; refined below with the computed value.
    let big_x = x.powf(1.0 / rho);
    let ln_target = target.ln();
    if ln_bound > ln_target + 2.0 {
        return None;
    }
    let bits =
        base_bits + 64 + big_x.log2().max(0.0).ceil() as u32 + (order as f64).log2().ceil() as u32;
    let prec = bits;
    let xf = Float::with_val(prec, x);
    let rho_f = Float::with_val(prec, rho);
    let mu_f = Float::with_val(prec, mu);
    let pi = Float::with_val(prec, Constant::Pi);
    // algebraic part
    let mut alg = Float::with_val(prec, 0);
    let inv_x = Float::with_val(prec, 1) / &xf;
    let mut power = Float::with_val(prec, 1);
    for k in 1..=order {
        power *= &inv_x;
        let arg = Float::with_val(prec, &mu_f - Float::with_val(prec, &rho_f * k as u32));
        if arg <= 0 && arg.is_integer() {
            continue;
        }
        let g = arg.gamma();
        let term = Float::with_val(prec, &power / &g);
        if k % 2 == 1 {
            alg += &term;
        } else {
            alg -= &term;
        }
    }
    // pole terms
    let mut total = alg;
    if rho > 1.0 {
        let inv_rho = Float::with_val(prec, 1) / &rho_f;
        let bx = Float::with_val(prec, (&xf).pow(&inv_rho));
        let angle = Float::with_val(prec, &pi * &inv_rho);
        let damping = Float::with_val(prec, &bx * angle.clone().cos()).exp();
        let one_minus_mu = Float::with_val(prec, 1 - &mu_f);
        let phase = Float::with_val(prec, &bx * angle.sin())
            + Float::with_val(prec, &pi * &one_minus_mu) / &rho_f;
        let amp = Float::with_val(prec, (&bx).pow(&one_minus_mu));
        let pole = Float::with_val(prec, 2) / &rho_f * amp * damping * phase.cos();
        total += pole;
    }
    let ln_val = ln_abs(&total);
    // rounding allowance: a few ulps per operation on magnitudes ≤ 1
    let ln_round = ((order + 16) as f64).ln() - prec as f64 * std::f64::consts::LN_2;
    let ln_err = ln_bound.max(ln_round) + std::f64::consts::LN_2;
    let rel = (ln_err - ln_val).exp();
    if !(rel <= target) {
        return None;
    }
    Some(finish(total, rel, digits, OracleRegime::Asymptotic, prec))
}

fn series(
    q: MLQuery,
    digits: u32,
    target: f64,
    base_bits: u32,
) -> Result<OracleValue, SpecialFunctionError> {
    let (rho, mu, z) = (q.rho, q.mu, q.z);
    let x = -z;
    let ln_x = x.ln();
    // size of the largest term, in f64 logarithms
    let mut ln_max: f64 = f64::NEG_INFINITY;
    let mut n = 0usize;
    let big_x = x.powf(1.0 / rho);
    loop {
        let arg = rho * n as f64 + mu;
        let (lg, _) =
            ln_gamma_abs(arg).map_err(|e| SpecialFunctionError::OracleRefused(e.to_string()))?;
        let lt = n as f64 * ln_x - lg;
        ln_max = ln_max.max(lt);
        if arg > big_x + 2.0 && lt < ln_max - 1.0 {
            break;
        }
        n += 1;
        if n > MAX_SERIES_TERMS {
            return Err(SpecialFunctionError::OracleRefused(format!(
                "series for E_({rho},{mu})({z}) needs more than {MAX_SERIES_TERMS} terms"
            )));
        }
    }
    let mut bits = base_bits + (ln_max.max(0.0) / std::f64::consts::LN_2).ceil() as u32 + 32;
    for _attempt in 0..6 {
        if bits > MAX_WORKING_BITS {
            break;
        }
        match series_at(rho, mu, z, bits, target, big_x)? {
            SeriesOutcome::Done(v, rel) => {
                return Ok(finish(v, rel, digits, OracleRegime::Series, bits))
            }
            SeriesOutcome::NeedBits(extra) => bits += extra,
        }
    }
    Err(SpecialFunctionError::OracleRefused(format!(
        "neither regime certifies 1e-{digits} for E_({rho},{mu})({z}) within {MAX_WORKING_BITS} bits"
    )))
}

enum SeriesOutcome {
    Done(Float, f64),
    NeedBits(u32),
}

fn series_at(
    rho: f64,
    mu: f64,
    z: f64,
    prec: u32,
    target: f64,
    big_x: f64,
) -> Result<SeriesOutcome, SpecialFunctionError> {
    let zf = Float::with_val(prec, z);
    let rho_f = Float::with_val(prec, rho);
    let mu_f = Float::with_val(prec, mu);
    let mut sum = Float::with_val(prec, 0);
    let mut abs_sum = Float::with_val(64, 0);
    let mut power = Float::with_val(prec, 1);
    let mut n = 0usize;
    let stop_scale = target * 1e-3;
    loop {
        if n > 0 {
            power *= &zf;
        }
        let arg = Float::with_val(prec, Float::with_val(prec, &rho_f * n as u32) + &mu_f);
        let term = Float::with_val(prec, &power / arg.gamma());
        abs_sum += Float::with_val(64, term.abs_ref());
        sum += &term;
        let past_peak = rho * n as f64 + mu > big_x + 2.0;
        if past_peak {
            let t = Float::with_val(64, term.abs_ref());
            let s = Float::with_val(64, sum.abs_ref());
            if t <= Float::with_val(64, &s * stop_scale) {
                // one more term fixes the ratio for a geometric tail bound
                power *= &zf;
                let arg =
                    Float::with_val(prec, Float::with_val(prec, &rho_f * (n + 1) as u32) + &mu_f);
                let next = Float::with_val(prec, &power / arg.gamma()).abs().to_f64();
                let ratio = next / t.to_f64();
                if ratio < 1.0 {
                    let tail = next / (1.0 - ratio);
                    let rounding = abs_sum.to_f64() * (n as f64 + 8.0) * 2f64.powi(1 - prec as i32);
                    let s64 = s.to_f64();
                    let rel = (tail + rounding) / s64;
                    if rel <= target {
                        return Ok(SeriesOutcome::Done(sum, rel));
                    }
                    if !(rel.is_finite()) {
                        return Ok(SeriesOutcome::NeedBits(prec));
                    }
                    let extra = (rel / target).log2().ceil() as u32 + 32;
                    return Ok(SeriesOutcome::NeedBits(extra));
                }
            }
        }
        n += 1;
        if n > MAX_SERIES_TERMS {
            return Err(SpecialFunctionError::OracleRefused(format!(
                "series for E_({rho},{mu})({z}) did not settle within {MAX_SERIES_TERMS} terms"
            )));
        }
    }
}
