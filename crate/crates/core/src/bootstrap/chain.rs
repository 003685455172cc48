//! The exponent iteration `p -> min(p / nu, q)` and the microrotation window.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::riesz::exponents::gain_factor;
use crate::scalar::{exact_ceil_log, ExponentScalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentState<T> {
    pub p: T,
    pub q: T,
    pub nu: T,
    pub step: usize,
}

/// Every state of the iteration, the starting one included.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chain<T> {
    pub states: Vec<ExponentState<T>>,
}

impl<T: ExponentScalar> Chain<T> {
    /// Number of iterations taken.
    pub fn len(&self) -> usize {
        self.states.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn terminal(&self) -> &ExponentState<T> {
        self.states.last().expect("chain has a start")
    }

    pub fn exponents_f64(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.p.to_f64_value()).collect()
    }
}

fn check_hypothesis<T: ExponentScalar>(p: &T, q: &T) -> Result<()> {
    let (two, five, six) = (T::from_int(2), T::from_int(5), T::from_int(6));
    if !two.strictly_below(p) {
        return Err(Error::Exponent(format!("bound 2 < p0 violated: p0 = {}", p.to_f64_value())));
    }
    if q.strictly_below(p) {
        return Err(Error::Exponent(format!(
            "bound p0 <= q0 violated: p0 = {}, q0 = {}",
            p.to_f64_value(),
            q.to_f64_value()
        )));
    }
    if !five.strictly_below(q) {
        return Err(Error::Exponent(format!("bound 5 < q0 violated: q0 = {}", q.to_f64_value())));
    }
    if six.strictly_below(q) {
        return Err(Error::Exponent(format!("bound q0 <= 6 violated: q0 = {}", q.to_f64_value())));
    }
    Ok(())
}

/// `sigma = min(p / nu(q), q)`.
pub fn sigma<T: ExponentScalar>(p: &T, q: &T) -> T {
    T::min_of(p.clone() / gain_factor(q), q.clone())
}

/// Iterates `p -> min(p / nu, q0)` from `p0` until `p = q0`.
pub fn bootstrap_chain<T: ExponentScalar>(p0: T, q0: T) -> Result<Chain<T>> {
    check_hypothesis(&p0, &q0)?;
    let nu = gain_factor(&q0);
    let mut states = vec![ExponentState {
        p: p0,
        q: q0.clone(),
        nu: nu.clone(),
        step: 0,
    }];
    loop {
        let last = states.last().expect("non-empty");
        if last.p.at_least(&q0) {
            break;
        }
        let mut next = last.p.clone() / nu.clone();
        if next.at_least(&q0) {
            next = q0.clone();
        }
        let step = last.step + 1;
        states.push(ExponentState {
            p: next,
            q: q0.clone(),
            nu: nu.clone(),
            step,
        });
    }
    Ok(Chain { states })
}

/// Chain length `ceil(ln(q0 / p0) / ln(1 / nu))` in exact arithmetic.
pub fn exact_chain_length(p0: &BigRational, q0: &BigRational) -> u64 {
    let nu = gain_factor(q0);
    let base = BigRational::from_integer(1.into()) / nu;
    exact_ceil_log(&base, &(q0.clone() / p0.clone()))
}

/// Exponent map `(nu1, q1 / nu1)` of one Riesz corollary applied at `q1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentMap<T> {
    pub nu: T,
    pub target: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OmegaWindow<T> {
    /// `1 / q1 = 1 / q0 + 3 / 10`.
    pub q1: T,
    /// Open lower and closed upper end of `10/3 < p <= q <= 15/4`.
    pub window: (T, T),
    /// `nu1 = 1 - q1 / 5`.
    pub i1: ExponentMap<T>,
    /// `nu1 = 1 - 2 q1 / 5`.
    pub i2: ExponentMap<T>,
}

pub fn omega_window<T: ExponentScalar>(q0: T) -> Result<OmegaWindow<T>> {
    let (five, six) = (T::from_int(5), T::from_int(6));
    if !five.strictly_below(&q0) || six.strictly_below(&q0) {
        return Err(Error::Exponent(format!(
            "bound 5 < q0 <= 6 violated: q0 = {}",
            q0.to_f64_value()
        )));
    }
    let q1 = T::one() / (T::one() / q0 + T::ratio(3, 10));
    let map = |factor: i64| {
        let nu = T::one() - T::from_int(factor) * q1.clone() / T::from_int(5);
        ExponentMap {
            target: q1.clone() / nu.clone(),
            nu,
        }
    };
    Ok(OmegaWindow {
        window: (T::ratio(10, 3), T::ratio(15, 4)),
        i1: map(1),
        i2: map(2),
        q1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::ratio(n, d)
    }

    #[test]
    fn float_and_exact_chains_agree() {
        let a = bootstrap_chain(3.0f64, 6.0).unwrap();
        let b = bootstrap_chain(r(3, 1), r(6, 1)).unwrap();
        assert_eq!(a.len(), b.len());
        assert_eq!(exact_chain_length(&r(3, 1), &r(6, 1)), b.len() as u64);
    }

    #[test]
    fn window_upper_end() {
        let w = omega_window(r(6, 1)).unwrap();
        assert_eq!(w.i1.nu, r(4, 7));
        assert_eq!(w.i1.target, r(15, 4));
    }
}
