//! Exponent maps of the Adams–Hedberg corollaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::ExponentScalar;

/// `nu = 1 - (q - 5) / (5q)`.
pub fn gain_factor<T: ExponentScalar>(q: &T) -> T {
    let five = T::from_int(5);
    T::one() - (q.clone() - five.clone()) / (five * q.clone())
}

/// Exponents reached by the first corollary: `M^{p/nu, q/nu}` and `M^{sigma, q}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorollaryExponents<T> {
    pub nu: T,
    pub p_target: T,
    pub q_target: T,
    pub sigma: T,
}

fn check_domain<T: ExponentScalar>(p: &T, q: &T) -> Result<()> {
    let two = T::from_int(2);
    let five = T::from_int(5);
    if !two.strictly_below(p) {
        return Err(Error::Exponent(format!("need p > 2, got p = {}", p.to_f64_value())));
    }
    if q.strictly_below(p) {
        return Err(Error::Exponent(format!(
            "need p <= q, got p = {}, q = {}",
            p.to_f64_value(),
            q.to_f64_value()
        )));
    }
    if !five.strictly_below(q) {
        return Err(Error::Exponent(format!("need q > 5, got q = {}", q.to_f64_value())));
    }
    Ok(())
}

pub fn corollary_i1_exponents<T: ExponentScalar>(p: T, q: T) -> Result<CorollaryExponents<T>> {
    check_domain(&p, &q)?;
    let nu = gain_factor(&q);
    let p_target = p / nu.clone();
    let q_target = q.clone() / nu.clone();
    let sigma = T::min_of(p_target.clone(), q);
    Ok(CorollaryExponents {
        nu,
        p_target,
        q_target,
        sigma,
    })
}

/// `(nu, sigma)` of the second corollary; the same formulas as the first.
pub fn corollary_i2_exponents<T: ExponentScalar>(p: T, q: T) -> Result<(T, T)> {
    let e = corollary_i1_exponents(p, q)?;
    Ok((e.nu, e.sigma))
}
