//! Numerical laboratory for weighted singular integral inequalities in the
//! half space: exponent algebra, closed-form bounds, discrete operators,
//! extremal search and verification diagnostics.

pub mod closed_forms;
pub mod diagnostics;
pub mod discretization;
pub mod error;
pub mod exponents;
pub mod extremal;
pub mod operators;
pub mod quad;
pub mod sobolev;

pub use error::{Error, Result};
pub use exponents::ExponentConfig;
