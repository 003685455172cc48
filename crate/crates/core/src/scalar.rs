//! Scalar abstractions.
//!
//! Two families are used. [`Real`] covers floating point types and is used by
//! the geometric helpers (distances, smoothstep profiles, Morrey normalization).
//! [`ExponentScalar`] covers anything exponent bookkeeping can run on: `f64`
//! for quick estimates and [`num_rational::BigRational`] when chain lengths must
//! not depend on rounding.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Floating point scalar usable by the geometric helpers.
pub trait Real: Float + FromPrimitive + Debug + Send + Sync + 'static {
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Ordered field used for exponent arithmetic.
pub trait ExponentScalar:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
{
    /// Slack used by comparisons. Zero for exact types.
    fn slack() -> Self;
    fn from_int(n: i64) -> Self;
    /// Exact conversion for rationals, best effort for floats.
    fn from_f64_value(x: f64) -> Option<Self>;
    fn to_f64_value(&self) -> f64;

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }

    fn min_of(a: Self, b: Self) -> Self {
        if a <= b {
            a
        } else {
            b
        }
    }

    /// `self >= other` up to the type's slack.
    fn at_least(&self, other: &Self) -> bool {
        self.clone() + Self::slack() >= *other
    }

    /// `self < other` beyond the type's slack.
    fn strictly_below(&self, other: &Self) -> bool {
        self.clone() + Self::slack() < *other
    }
}

impl ExponentScalar for f64 {
    fn slack() -> Self {
        1e-12
    }
    fn from_int(n: i64) -> Self {
        n as f64
    }
    fn from_f64_value(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
    fn to_f64_value(&self) -> f64 {
        *self
    }
}

impl ExponentScalar for BigRational {
    fn slack() -> Self {
        BigRational::zero()
    }
    fn from_int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn from_f64_value(x: f64) -> Option<Self> {
        decimal_rational(x)
    }
    fn to_f64_value(&self) -> f64 {
        self.to_f64().unwrap_or_else(|| {
            let n = self.numer().to_f64().unwrap_or(f64::NAN);
            let d = self.denom().to_f64().unwrap_or(f64::NAN);
            n / d
        })
    }
}

/// Interprets a float the way a user typed it: 5.9 becomes 59/10, not the
/// binary expansion. Falls back to the exact binary value when no short
/// decimal reproduces `x`.
pub fn decimal_rational(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    for digits in 0..=15u32 {
        let scale = 10f64.powi(digits as i32);
        let scaled = (x * scale).round();
        if scaled.abs() < 9.0e15 && (scaled / scale - x).abs() <= f64::EPSILON * x.abs() {
            let num = BigInt::from(scaled as i64);
            let den = BigInt::from(10u64.pow(digits));
            return Some(BigRational::new(num, den));
        }
    }
    BigRational::from_float(x)
}

/// Smallest integer `n` with `base^n >= target`, for `base > 1` and exact
/// rationals. Computed by repeated multiplication so it never rounds.
pub fn exact_ceil_log(base: &BigRational, target: &BigRational) -> u64 {
    assert!(*base > BigRational::one(), "base must exceed one");
    if target.is_negative() || *target <= BigRational::one() {
        return 0;
    }
    let mut acc = BigRational::one();
    let mut n = 0u64;
    while acc < *target {
        acc *= base.clone();
        n += 1;
    }
    n
}

/// Parabolic quasi-distance `|t - s|^{1/2} + |x - y|` with a caller supplied
/// spatial displacement.
pub fn quasi_distance_from_gap<T: Real>(dt: T, dx: [T; 3]) -> T {
    dt.abs().sqrt() + (dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2]).sqrt()
}

/// Minimal image of a coordinate difference on a circle of length `l`.
pub fn torus_gap<T: Real>(d: T, l: T) -> T {
    let half = l / T::lit(2.0);
    let mut g = d % l;
    if g > half {
        g = g - l;
    } else if g < -half {
        g = g + l;
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_inputs_become_short_fractions() {
        let r = decimal_rational(5.9).unwrap();
        assert_eq!(r, BigRational::new(59.into(), 10.into()));
        let r = decimal_rational(3.0).unwrap();
        assert_eq!(r, BigRational::from_integer(3.into()));
    }

    #[test]
    fn ceil_log_matches_float_formula() {
        let base = BigRational::new(30.into(), 29.into());
        let target = BigRational::from_integer(2.into());
        assert_eq!(exact_ceil_log(&base, &target), 21);
        let f = (2f64.ln() / (30.0f64 / 29.0).ln()).ceil() as u64;
        assert_eq!(f, 21);
    }

    #[test]
    fn quasi_distance_works_in_single_precision() {
        let d = quasi_distance_from_gap(1.0f32, [3.0, 4.0, 0.0]);
        assert!((d - 6.0).abs() < 1e-6);
        let d = quasi_distance_from_gap(4.0f64, [0.0; 3]);
        assert_eq!(d, 2.0);
    }

    #[test]
    fn torus_gap_picks_minimal_image() {
        let l = 10.0f64;
        assert!((torus_gap(9.0, l) + 1.0).abs() < 1e-12);
        assert!((torus_gap(-9.0, l) - 1.0).abs() < 1e-12);
        assert!((torus_gap(3.0, l) - 3.0).abs() < 1e-12);
    }
}
