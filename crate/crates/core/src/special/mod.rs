//! Special functions: real Gamma, Mittag-Leffler on the negative axis,
//! Wright function, an arbitrary-precision Mittag-Leffler oracle, and a
//! numerical check of the Pskhu transform of power functions.

use thiserror::Error;

use crate::quadrature::QuadratureError;

mod gamma;
mod mittag_leffler;
mod oracle;
mod pskhu;
mod wright;

pub use gamma::{
    cos_pi, gamma_real, is_nonpositive_integer, ln_gamma_abs, rgamma, sin_pi, GAMMA_MAX_ARG,
};
pub use mittag_leffler::{
    ml, shared_ml, MLQuery, MittagLeffler, MlMethod, SERIES_MAX_ROUNDING, SERIES_RADIUS,
};
pub use oracle::{ml_oracle, OracleRegime, OracleValue};
pub use pskhu::{pskhu_closed_form, pskhu_image_of_power, PskhuControls, PskhuResult};
pub use wright::{wright, WrightQuery, WrightSeries};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialFunctionError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("Gamma has a pole at {0}")]
    Pole(f64),
    #[error("Gamma overflows at {0}")]
    Overflow(f64),
    #[error("no convergence: {0}")]
    NonConvergence(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("oracle refused: {0}")]
    OracleRefused(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}
