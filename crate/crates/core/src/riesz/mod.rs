//! The parabolic Riesz potential and its mapping properties on Morrey spaces.

pub mod adams;
pub mod exponents;
pub mod potential;

pub use adams::{
    adams_hedberg_check, adams_hedberg_ratio, adams_hedberg_scale_study, AdamsHedbergReport, ScaleSample,
    SCALE_TOLERANCE,
};
pub use exponents::{corollary_i1_exponents, corollary_i2_exponents, gain_factor, CorollaryExponents};
pub use potential::{corner_integral, riesz_apply, riesz_apply_masked, RieszOrder};
