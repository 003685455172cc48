//! Numerical toolkit for parabolic Morrey spaces and the perturbed micropolar
//! fluid system on a periodic box.

pub mod bootstrap;
pub mod error;
pub mod field;
pub mod harness;
pub mod localize;
pub mod morrey;
pub mod riesz;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};

/// Floating point type of fields and norms.
pub type Scalar = f64;
/// Exact type of exponent arithmetic.
pub type Exact = num_rational::BigRational;
