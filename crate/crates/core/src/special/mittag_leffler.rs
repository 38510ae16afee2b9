//! Two-parameter Mittag-Leffler function on the non-positive real axis.
//!
//! `E_{ρ,μ}(z) = Σ_{n≥0} z^n / Γ(ρn + μ)` for `0 < ρ ≤ 2`, `μ > 0`, `z ≤ 0`.
//!
//! Evaluation regions, with `x = −z` and `X = x^{1/ρ}`:
//!
//! * Taylor series for `X ≤ 28`, summed in double-double arithmetic with
//!   coefficients `1/Γ(ρn+μ)` rounded from MPFR, accepted only when the
//!   rounding estimate is below `2e-17` relative.
//! * The algebraic asymptotic expansion `−Σ_{n≥1} z^{-n}/Γ(μ−ρn)` plus the
//!   two exponentially decaying pole contributions (present for `1 < ρ ≤ 2`),
//!   accepted only when a rigorous remainder bound certifies it.
//! * Otherwise the Hankel-contour representation collapsed onto the cut:
//!
//!   ```text
//!   E_{ρ,μ}(−x) = (2/ρ) Re[s*^{1−μ} e^{s*}]
//!               + (1/π) ∫_0^∞ e^{−r} r^{ρ−μ} (r^ρ sin πμ − x sin π(ρ−μ))
//!                          / ((r^ρ + x cos πρ)² + (x sin πρ)²) dr,
//!   s* = x^{1/ρ} e^{iπ/ρ},
//!   ```
//!
//!   evaluated by double-exponential quadrature. The integrand is bounded
//!   at `r = 0` only for `μ ≤ ρ`; larger `μ` are first reduced through
//!   `E_{ρ,μ}(z) = (E_{ρ,μ−ρ}(z) − 1/Γ(μ−ρ)) / z`.
//!
//! The pole contribution oscillates with phase `X sin(π/ρ)` and near ρ = 2
//! barely decays, so it is formed in MPFR and carried as a double-double;
//! otherwise values near zeros of `E` lose their leading digits.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

use super::gamma::{cos_pi, ln_gamma_abs, rgamma, sin_pi};
use super::SpecialFunctionError;
use crate::quadrature::{exp_sinh, tanh_sinh};
use crate::summation::CompensatedSum;

/// Largest `X = |z|^{1/ρ}` for which the Taylor series is attempted.
pub const SERIES_RADIUS: f64 = 28.0;
/// Largest accepted rounding estimate of the series, relative to its value.
pub const SERIES_MAX_ROUNDING: f64 = 2e-17;
/// Relative size of the certified asymptotic remainder.
const ASYMPTOTIC_REMAINDER: f64 = 5e-17;
const MAX_ASYMPTOTIC_TERMS: usize = 200;
const CONTOUR_REL_TOL: f64 = 1e-15;
const MAX_SERIES_TERMS: usize = 4000;
const COEFF_BITS: u32 = 128;

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    fn from_float(v: &Float) -> Dd {
        let hi = v.to_f64();
        let lo = Float::with_val(v.prec(), v - hi).to_f64();
        Dd { hi, lo }
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let e = e + self.lo + o.lo;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    fn mul_f64(self, b: f64) -> Dd {
        let p = self.hi * b;
        let e = self.hi.mul_add(b, -p) + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

/// One evaluation request: `E_{ρ,μ}(z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLQuery {
    pub rho: f64,
    pub mu: f64,
    pub z: f64,
}

impl MLQuery {
    pub fn new(rho: f64, mu: f64, z: f64) -> Result<Self, SpecialFunctionError> {
        validate_parameters(rho, mu)?;
        validate_argument(z)?;
        Ok(Self { rho, mu, z })
    }
}

fn validate_parameters(rho: f64, mu: f64) -> Result<(), SpecialFunctionError> {
    if !(rho.is_finite() && rho > 0.0 && rho <= 2.0) {
        return Err(SpecialFunctionError::Domain(format!(
            "Mittag-Leffler order rho = {rho} must lie in (0, 2]"
        )));
    }
    if !(mu.is_finite() && mu > 0.0) {
        return Err(SpecialFunctionError::Domain(format!(
            "Mittag-Leffler parameter mu = {mu} must be positive"
        )));
    }
    Ok(())
}

fn validate_argument(z: f64) -> Result<(), SpecialFunctionError> {
    if !z.is_finite() || z > 0.0 {
        return Err(SpecialFunctionError::Domain(format!(
            "Mittag-Leffler argument z = {z} must be finite and non-positive"
        )));
    }
    Ok(())
}

/// Which region produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlMethod {
    Origin,
    ClosedForm,
    Series,
    Asymptotic,
    Contour,
}

/// Evaluator for a fixed pair `(ρ, μ)`; caches the series coefficients.
#[derive(Debug, Clone)]
pub struct MittagLeffler {
    rho: f64,
    mu: f64,
    coeffs: OnceLock<Vec<Dd>>,
    reduced: Option<Box<MittagLeffler>>,
}

impl MittagLeffler {
    pub fn new(rho: f64, mu: f64) -> Result<Self, SpecialFunctionError> {
        validate_parameters(rho, mu)?;
        let reduced = if mu > rho && rho != 1.0 {
            Some(Box::new(MittagLeffler::new(rho, mu - rho)?))
        } else {
            None
        };
        Ok(Self {
            rho,
            mu,
            coeffs: OnceLock::new(),
            reduced,
        })
    }

    /// `1/Γ(ρn+μ)` as double-doubles, enough terms for the series region.
    fn coefficients(&self) -> &[Dd] {
        self.coeffs.get_or_init(|| {
            // terms at X = SERIES_RADIUS fall below 1e-40 of the peak once
            // ρn + μ exceeds about e·X + 100
            let top = std::f64::consts::E * SERIES_RADIUS + 100.0;
            let count =
                (((top - self.mu) / self.rho).ceil().max(0.0) as usize + 2).min(MAX_SERIES_TERMS);
            let rho = Float::with_val(COEFF_BITS, self.rho);
            let mu = Float::with_val(COEFF_BITS, self.mu);
            (0..count)
                .map(|n| {
                    let arg = Float::with_val(COEFF_BITS, &rho * n as u32) + &mu;
                    if arg <= 0 && arg.is_integer() {
                        Dd::ZERO
                    } else {
                        Dd::from_float(&(Float::with_val(COEFF_BITS, 1) / arg.gamma()))
                    }
                })
                .collect()
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `E_{ρ,μ}(z)` for `z ≤ 0`.
    pub fn eval(&self, z: f64) -> Result<f64, SpecialFunctionError> {
        self.eval_with_method(z).map(|(v, _)| v)
    }

    pub fn eval_with_method(&self, z: f64) -> Result<(f64, MlMethod), SpecialFunctionError> {
        validate_argument(z)?;
        if z == 0.0 {
            return Ok((rgamma(self.mu), MlMethod::Origin));
        }
        if let Some(v) = self.closed_form(z) {
            return Ok((v, MlMethod::ClosedForm));
        }
        let x = -z;
        if x.powf(1.0 / self.rho) <= SERIES_RADIUS {
            if let Some(v) = self.series(z) {
                return Ok((v, MlMethod::Series));
            }
        }
        if self.rho == 1.0 {
            return Err(SpecialFunctionError::Unsupported(format!(
                "E_(1,{}) at z = {z}: only the Taylor region is implemented for rho = 1",
                self.mu
            )));
        }
        if let Some(v) = self.asymptotic(x) {
            return Ok((v, MlMethod::Asymptotic));
        }
        self.contour(z).map(|v| (v, MlMethod::Contour))
    }

    /// Exact identities: `E_{1,1}(z) = e^z`, `E_{2,1}(−x²) = cos x`,
    /// `E_{2,2}(−x²) = sin x / x`, `E_{2,3}(−x²) = 2 sin²(x/2) / x²`.
    fn closed_form(&self, z: f64) -> Option<f64> {
        if self.rho == 1.0 && self.mu == 1.0 {
            return Some(z.exp());
        }
        if self.rho != 2.0 || !(self.mu == 1.0 || self.mu == 2.0 || self.mu == 3.0) {
            return None;
        }
        let x2 = -z;
        let x = x2.sqrt();
        // x + x_lo is √(x2) to about twice working precision
        let x_lo = (-x).mul_add(x, x2) / (2.0 * x);
        let v = if self.mu == 1.0 {
            x.cos() - x.sin() * x_lo
        } else if self.mu == 2.0 {
            (x.sin() + x.cos() * x_lo) / (x + x_lo)
        } else {
            let h = 0.5 * x;
            let s = h.sin() + h.cos() * (0.5 * x_lo);
            let xt = x + x_lo;
            2.0 * s * s / (xt * xt)
        };
        Some(v)
    }

    fn series(&self, z: f64) -> Option<f64> {
        let x = -z;
        let peak = x.powf(1.0 / self.rho) + 1.0;
        let mut sum = Dd::ZERO;
        let mut abs_total = 0.0;
        let mut power = Dd { hi: 1.0, lo: 0.0 };
        let coeffs = self.coefficients();
        for (n, &c) in coeffs.iter().enumerate() {
            if n > 0 {
                power = power.mul_f64(z);
            }
            let term = power.mul(c);
            sum = sum.add(term);
            abs_total += term.hi.abs();
            let past_peak = self.rho * n as f64 + self.mu > peak;
            if past_peak && term.hi.abs() <= 1e-18 * sum.hi.abs() {
                let rounding = abs_total * (n as f64 + 4.0) * 2f64.powi(-104);
                let v = sum.value();
                return (rounding <= SERIES_MAX_ROUNDING * v.abs()).then_some(v);
            }
        }
        None
    }

    /// Contribution of the two poles `s* = x^{1/ρ} e^{±iπ/ρ}` (only for ρ > 1).
    fn pole_terms(&self, x: f64) -> Dd {
        if self.rho <= 1.0 {
            return Dd::ZERO;
        }
        let big_x = x.powf(1.0 / self.rho);
        if big_x * cos_pi(1.0 / self.rho) < -760.0 {
            return Dd::ZERO;
        }
        // the phase X sin(π/ρ) needs absolute accuracy, hence extra bits
        let prec = 128 + big_x.log2().max(0.0).ceil() as u32;
        let rho = Float::with_val(prec, self.rho);
        let inv_rho = Float::with_val(prec, 1) / &rho;
        let bx = Float::with_val(prec, Float::with_val(prec, x).pow(&inv_rho));
        let angle = Float::with_val(prec, Constant::Pi) * &inv_rho;
        let (sin_a, cos_a) = angle.sin_cos(Float::new(prec));
        let one_minus_mu = Float::with_val(prec, 1) - Float::with_val(prec, self.mu);
        let phase = Float::with_val(prec, &bx * &sin_a)
            + Float::with_val(prec, Constant::Pi) * Float::with_val(prec, &one_minus_mu * &inv_rho);
        let amp = Float::with_val(prec, (&bx).pow(&one_minus_mu))
            * Float::with_val(prec, &bx * &cos_a).exp();
        let v = Float::with_val(prec, 2) * inv_rho * amp * phase.cos();
        Dd::from_float(&v)
    }

    /// Lower bound of |r^ρ e^{iπρ} + x| / x over r ≥ 0.
    fn ray_distance_factor(&self) -> f64 {
        if cos_pi(self.rho) < 0.0 {
            sin_pi(self.rho).abs()
        } else {
            1.0
        }
    }

    fn asymptotic(&self, x: f64) -> Option<f64> {
        let m = self.ray_distance_factor();
        if m == 0.0 {
            return None;
        }
        let poles = self.pole_terms(x);
        let ln_x = x.ln();
        let ln_pi_m = (PI * m).ln();
        let inv_z = -1.0 / x;
        let mut power = 1.0;
        let mut sum = CompensatedSum::new();
        let mut best_bound = f64::INFINITY;
        for n in 1..=MAX_ASYMPTOTIC_TERMS {
            power *= inv_z;
            sum.add(-power * rgamma(self.mu - self.rho * n as f64));
            // remainder after n terms: Γ(ρ(n+1) − μ + 1) / (π m x^{n+1})
            let arg = self.rho * (n + 1) as f64 - self.mu + 1.0;
            if arg <= 0.0 {
                continue;
            }
            let (lg, _) = ln_gamma_abs(arg).ok()?;
            let bound = (lg - ln_pi_m - (n + 1) as f64 * ln_x).exp();
            let total = poles
                .add(Dd {
                    hi: sum.value(),
                    lo: 0.0,
                })
                .value();
            if bound <= ASYMPTOTIC_REMAINDER * total.abs() {
                return Some(total);
            }
            if bound > best_bound {
                return None;
            }
            best_bound = bound;
        }
        None
    }

    fn contour(&self, z: f64) -> Result<f64, SpecialFunctionError> {
        if let Some(reduced) = &self.reduced {
            let lower = reduced.eval(z)?;
            return Ok((lower - rgamma(self.mu - self.rho)) / z);
        }
        let x = -z;
        let integral = self.hankel_integral(x)?;
        Ok(self
            .pole_terms(x)
            .add(Dd {
                hi: integral,
                lo: 0.0,
            })
            .value())
    }

    fn hankel_integral(&self, x: f64) -> Result<f64, SpecialFunctionError> {
        let rho = self.rho;
        let mu = self.mu;
        let sin_mu = sin_pi(mu);
        let sin_rm = sin_pi(rho - mu);
        let cos_r = cos_pi(rho);
        let sin_r = sin_pi(rho);
        let shift = x * cos_r;
        let gap = x * sin_r;
        if gap == 0.0 && cos_r < 0.0 {
            return Err(SpecialFunctionError::Unsupported(format!(
                "contour integral degenerates for rho = {rho}"
            )));
        }
        let integrand = |r: f64| {
            let rr = r.powf(rho);
            let d = rr + shift;
            let num = rr * sin_mu - x * sin_rm;
            (-r).exp() * r.powf(rho - mu) * num / (d * d + gap * gap)
        };
        let split = if cos_r < 0.0 {
            (-shift).powf(1.0 / rho)
        } else {
            0.0
        };
        let value = if split > 0.0 && split < 50.0 {
            let left = tanh_sinh(integrand, 0.0, split, CONTOUR_REL_TOL)?;
            let right = exp_sinh(integrand, split, 1.0, CONTOUR_REL_TOL)?;
            left.value + right.value
        } else {
            exp_sinh(integrand, 0.0, 1.0, CONTOUR_REL_TOL)?.value
        };
        Ok(value / PI)
    }
}

/// Process-wide evaluator for `(ρ, μ)`, so repeated parameter pairs share
/// their series coefficients.
pub fn shared_ml(rho: f64, mu: f64) -> Result<Arc<MittagLeffler>, SpecialFunctionError> {
    type Cache = Mutex<HashMap<(u64, u64), Arc<MittagLeffler>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    validate_parameters(rho, mu)?;
    let key = (rho.to_bits(), mu.to_bits());
    let mut map = CACHE
        .get_or_init(Default::default)
        .lock()
        .unwrap_or_else(|p| p.into_inner());
    if let Some(e) = map.get(&key) {
        return Ok(Arc::clone(e));
    }
    let e = Arc::new(MittagLeffler::new(rho, mu)?);
    map.insert(key, Arc::clone(&e));
    Ok(e)
}

/// `E_{ρ,μ}(z)` for a single query.
pub fn ml(q: MLQuery) -> Result<f64, SpecialFunctionError> {
    shared_ml(q.rho, q.mu)?.eval(q.z)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn value_at_origin_is_reciprocal_gamma() {
        for &(rho, mu) in &[(1.5, 2.0), (1.1, 0.5), (1.9, 3.0)] {
            let v = ml(MLQuery::new(rho, mu, 0.0).unwrap()).unwrap();
            assert_eq!(v, rgamma(mu));
        }
        assert_eq!(ml(MLQuery::new(1.5, 2.0, 0.0).unwrap()).unwrap(), 1.0);
    }

    #[test]
    fn exponential_and_trigonometric_rows() {
        let e = ml(MLQuery::new(1.0, 1.0, -1.0).unwrap()).unwrap();
        assert!(rel(e, 0.367_879_441_171_442_33) < 1e-16);
        let q = MLQuery::new(2.0, 1.0, -(PI / 2.0).powi(2)).unwrap();
        assert!(ml(q).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn rejects_positive_argument_and_bad_order() {
        assert!(MLQuery::new(1.5, 1.0, 0.5).is_err());
        assert!(MLQuery::new(0.0, 1.0, -1.0).is_err());
        assert!(MLQuery::new(2.5, 1.0, -1.0).is_err());
        assert!(MLQuery::new(1.5, 0.0, -1.0).is_err());
    }

    #[test]
    fn regions_agree_where_they_overlap() {
        // series vs contour near the switch, contour vs asymptotic far out
        for &(rho, mu) in &[(1.5, 1.0), (1.3, 2.0), (1.8, 1.8), (1.7, 3.0), (1.2, 0.7)] {
            let e = MittagLeffler::new(rho, mu).unwrap();
            for &z in &[-2.0, -6.0, -9.5] {
                let s = e.series(z).expect("series should be usable here");
                let c = e.contour(z).unwrap();
                assert!(
                    (s - c).abs() <= 1e-13 * s.abs().max(1e-3),
                    "{rho} {mu} {z}: {s} {c}"
                );
            }
            for &z in &[-3e3, -2e4] {
                if let Some(a) = e.asymptotic(-z) {
                    let c = e.contour(z).unwrap();
                    assert!(rel(a, c) <= 1e-13, "{rho} {mu} {z}: {a} {c}");
                }
            }
        }
    }

    #[test]
    fn recurrence_in_mu() {
        // E_{ρ,μ}(z) = z E_{ρ,μ+ρ}(z) + 1/Γ(μ)
        for &(rho, mu) in &[(1.5, 1.0), (1.2, 2.0), (1.9, 0.9)] {
            let lo = MittagLeffler::new(rho, mu).unwrap();
            let hi = MittagLeffler::new(rho, mu + rho).unwrap();
            for &z in &[-0.5, -4.0, -40.0, -900.0] {
                let lhs = lo.eval(z).unwrap();
                let rhs = z * hi.eval(z).unwrap() + rgamma(mu);
                assert!(
                    (lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rgamma(mu)),
                    "{rho} {mu} {z}"
                );
            }
        }
    }
}
