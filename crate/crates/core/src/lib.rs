pub mod format;
pub mod fractional_calculus;
pub mod quadrature;
pub mod solver;
pub mod special;
pub mod spectral;
pub mod summation;
pub mod verification;
