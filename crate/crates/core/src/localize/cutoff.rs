//! Smooth cutoffs: a time profile times a radial profile, with exact plateaus.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Grid, SpaceTimeField};
use crate::morrey::Cylinder;
use crate::scalar::torus_gap;

/// Generalized smoothstep `S_N`: a polynomial of degree `2N + 1` rising from 0
/// at `x = 0` to 1 at `x = 1` with `N` vanishing derivatives at both ends.
#[derive(Clone, Debug, PartialEq)]
pub struct Smoothstep {
    order: u32,
    /// Monomial coefficients, index = power.
    poly: Vec<f64>,
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl Smoothstep {
    pub fn new(order: u32) -> Smoothstep {
        let n = order as u64;
        let mut poly = vec![0.0; 2 * order as usize + 2];
        for j in 0..=n {
            let c = binomial(n + j, j) * binomial(2 * n + 1, n - j);
            poly[(n + 1 + j) as usize] = if j % 2 == 0 { c } else { -c };
        }
        Smoothstep { order, poly }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Value and the first three derivatives, clamped outside `[0, 1]`.
    pub fn eval(&self, x: f64) -> [f64; 4] {
        if x <= 0.0 {
            return [0.0; 4];
        }
        if x >= 1.0 {
            return [1.0, 0.0, 0.0, 0.0];
        }
        let mut out = [0.0; 4];
        let mut coeffs = self.poly.clone();
        for slot in out.iter_mut() {
            *slot = coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c);
            coeffs = coeffs.iter().enumerate().skip(1).map(|(p, c)| p as f64 * c).collect();
        }
        out
    }
}

/// Rises on `[a0, a1]`, equals one on `[a1, b1]`, falls on `[b1, b0]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeProfile {
    pub a0: f64,
    pub a1: f64,
    pub b1: f64,
    pub b0: f64,
}

/// One on `rho <= r_in`, zero on `rho >= r_out`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub r_in: f64,
    pub r_out: f64,
}

/// A mixed derivative: `t` time derivatives and `x[i]` along each axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Deriv {
    pub t: u8,
    pub x: [u8; 3],
}

pub const MAX_TIME_ORDER: u8 = 1;
pub const MAX_SPACE_ORDER: u8 = 3;

impl Deriv {
    pub const ZERO: Deriv = Deriv { t: 0, x: [0; 3] };
    pub const TIME: Deriv = Deriv { t: 1, x: [0; 3] };

    pub fn space(x: [u8; 3]) -> Deriv {
        Deriv { t: 0, x }
    }

    pub fn axis(i: usize) -> Deriv {
        Deriv::ZERO.plus(i)
    }

    pub fn plus(self, axis: usize) -> Deriv {
        let mut d = self;
        d.x[axis] += 1;
        d
    }

    pub fn space_order(&self) -> u8 {
        self.x.iter().sum()
    }

    pub fn check(&self) -> Result<()> {
        if self.t > MAX_TIME_ORDER || self.space_order() > MAX_SPACE_ORDER {
            return Err(Error::CutoffOrder(format!("{self:?}")));
        }
        Ok(())
    }

    fn axes(&self) -> Vec<usize> {
        (0..3).flat_map(|a| std::iter::repeat(a).take(self.x[a] as usize)).collect()
    }
}

/// Spatial multi-indices of order at most three, in a fixed order.
pub fn spatial_indices() -> Vec<[u8; 3]> {
    let mut out = Vec::new();
    for total in 0..=MAX_SPACE_ORDER {
        for a in (0..=total).rev() {
            for b in (0..=total - a).rev() {
                out.push([a, b, total - a - b]);
            }
        }
    }
    out
}

fn spatial_slot(x: [u8; 3]) -> usize {
    spatial_indices().iter().position(|v| *v == x).expect("order checked")
}

/// `psi(t, x) = T(t) g(|x - c|)` on a torus of side `l`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cutoff {
    pub time: TimeProfile,
    pub radial: RadialProfile,
    pub center: [f64; 3],
    step: Smoothstep,
}

/// Fraction of each gap kept free on both sides of a transition, so the
/// plateau covers the closed inner cylinder and the support stays strictly
/// inside the open outer one.
pub const TRANSITION_MARGIN: f64 = 0.05;

impl Cutoff {
    /// Equal to one on `plateau`, supported strictly inside `support`.
    pub fn between(plateau: &Cylinder, support: &Cylinder, order: u32) -> Result<Cutoff> {
        plateau.validate()?;
        support.validate()?;
        if plateau.center != support.center {
            return Err(Error::Geometry("nested cylinders must share their center".into()));
        }
        let gap_lo = plateau.t_start - support.t_start;
        let gap_hi = support.t_end - plateau.t_end;
        let gap_r = support.radius - plateau.radius;
        if !(gap_lo > 0.0 && gap_hi > 0.0 && gap_r > 0.0) {
            return Err(Error::Geometry(format!(
                "nesting needs positive margins, got {gap_lo}, {gap_hi} in time and {gap_r} in radius"
            )));
        }
        let m = TRANSITION_MARGIN;
        Ok(Cutoff {
            time: TimeProfile {
                a0: support.t_start + m * gap_lo,
                a1: plateau.t_start - m * gap_lo,
                b1: plateau.t_end + m * gap_hi,
                b0: support.t_end - m * gap_hi,
            },
            radial: RadialProfile {
                r_in: plateau.radius + m * gap_r,
                r_out: support.radius - m * gap_r,
            },
            center: support.center,
            step: Smoothstep::new(order),
        })
    }

    pub fn order(&self) -> u32 {
        self.step.order()
    }

    /// Time factor and its first derivative.
    pub fn time_factor(&self, t: f64) -> [f64; 2] {
        let p = &self.time;
        if t <= p.a0 || t >= p.b0 {
            [0.0, 0.0]
        } else if t < p.a1 {
            let w = p.a1 - p.a0;
            let s = self.step.eval((t - p.a0) / w);
            [s[0], s[1] / w]
        } else if t <= p.b1 {
            [1.0, 0.0]
        } else {
            let w = p.b0 - p.b1;
            let s = self.step.eval((p.b0 - t) / w);
            [s[0], -s[1] / w]
        }
    }

    /// `g(rho)` and its first three radial derivatives.
    fn radial_factor(&self, rho: f64) -> [f64; 4] {
        let r = &self.radial;
        if rho <= r.r_in {
            return [1.0, 0.0, 0.0, 0.0];
        }
        if rho >= r.r_out {
            return [0.0; 4];
        }
        let w = r.r_out - r.r_in;
        let s = self.step.eval((rho - r.r_in) / w);
        [1.0 - s[0], -s[1] / w, -s[2] / (w * w), -s[3] / (w * w * w)]
    }

    fn displacement(&self, x: [f64; 3], l: f64) -> [f64; 3] {
        [
            torus_gap(x[0] - self.center[0], l),
            torus_gap(x[1] - self.center[1], l),
            torus_gap(x[2] - self.center[2], l),
        ]
    }

    /// Spatial derivative of the radial factor at displacement `d`.
    fn spatial_derivative(&self, x: [u8; 3], d: [f64; 3]) -> f64 {
        let rho = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        let g = self.radial_factor(rho);
        let axes = Deriv::space(x).axes();
        if axes.is_empty() {
            return g[0];
        }
        if g[1] == 0.0 && g[2] == 0.0 && g[3] == 0.0 {
            return 0.0;
        }
        let n = [d[0] / rho, d[1] / rho, d[2] / rho];
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        match axes.as_slice() {
            [i] => g[1] * n[*i],
            [i, j] => (g[2] - g[1] / rho) * n[*i] * n[*j] + g[1] / rho * delta(*i, *j),
            [i, j, k] => {
                let (i, j, k) = (*i, *j, *k);
                let c = g[2] / rho - g[1] / (rho * rho);
                g[3] * n[i] * n[j] * n[k]
                    + c * (delta(i, k) * n[j] + delta(j, k) * n[i] + delta(i, j) * n[k] - 3.0 * n[i] * n[j] * n[k])
            }
            _ => unreachable!("order checked"),
        }
    }

    pub fn value(&self, t: f64, x: [f64; 3], l: f64) -> f64 {
        let tf = self.time_factor(t)[0];
        if tf == 0.0 {
            return 0.0;
        }
        tf * self.spatial_derivative([0; 3], self.displacement(x, l))
    }

    pub fn derivative(&self, d: Deriv, t: f64, x: [f64; 3], l: f64) -> Result<f64> {
        d.check()?;
        let tf = self.time_factor(t)[d.t as usize];
        if tf == 0.0 {
            return Ok(0.0);
        }
        Ok(tf * self.spatial_derivative(d.x, self.displacement(x, l)))
    }

    pub fn sample(&self, grid: &Grid) -> SpaceTimeField {
        let c = self.clone();
        let l = grid.l;
        SpaceTimeField::from_fn(*grid, 1, move |t, x| [c.value(t, x, l), 0.0, 0.0])
    }

    pub fn sampler(&self, grid: &Grid) -> CutoffSampler {
        CutoffSampler::new(self.clone(), *grid)
    }
}

/// Cached samples of every spatial derivative of a cutoff on a grid; the time
/// factor is evaluated per slice.
#[derive(Clone)]
pub struct CutoffSampler {
    cutoff: Cutoff,
    grid: Grid,
    spatial: Arc<Vec<Vec<f64>>>,
}

impl CutoffSampler {
    pub fn new(cutoff: Cutoff, grid: Grid) -> CutoffSampler {
        let l = grid.l;
        let spatial: Vec<Vec<f64>> = spatial_indices()
            .into_par_iter()
            .map(|x| {
                (0..grid.points())
                    .map(|i| cutoff.spatial_derivative(x, cutoff.displacement(grid.position(i), l)))
                    .collect()
            })
            .collect();
        CutoffSampler {
            cutoff,
            grid,
            spatial: Arc::new(spatial),
        }
    }

    pub fn cutoff(&self) -> &Cutoff {
        &self.cutoff
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `(time factor, spatial samples)` of `d` at slice `n`.
    pub fn parts(&self, d: Deriv, n: usize) -> Result<(f64, &[f64])> {
        d.check()?;
        let tf = self.cutoff.time_factor(self.grid.time(n))[d.t as usize];
        Ok((tf, &self.spatial[spatial_slot(d.x)]))
    }

    /// Samples of `d` applied to the cutoff at slice `n`.
    pub fn slice(&self, d: Deriv, n: usize) -> Result<Vec<f64>> {
        let (tf, s) = self.parts(d, n)?;
        Ok(s.iter().map(|v| tf * v).collect())
    }

    /// Multiplies a component-blocked slice by the cutoff value at slice `n`.
    pub fn multiply(&self, n: usize, values: &mut [f64]) {
        let tf = self.cutoff.time_factor(self.grid.time(n))[0];
        let s = &self.spatial[0];
        for chunk in values.chunks_mut(s.len()) {
            for (v, w) in chunk.iter_mut().zip(s) {
                *v *= tf * w;
            }
        }
    }

    pub fn is_active(&self, n: usize) -> bool {
        self.cutoff.time_factor(self.grid.time(n)) != [0.0, 0.0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn septic_coefficients() {
        let s = Smoothstep::new(3);
        assert_eq!(&s.poly[4..], &[35.0, -84.0, 70.0, -20.0]);
        let v = s.eval(0.5);
        assert!((v[0] - 0.5).abs() < 1e-15);
        assert_eq!(s.eval(1.0), [1.0, 0.0, 0.0, 0.0]);
        // derivatives vanish at both ends up to order 3
        for x in [1e-4, 1.0 - 1e-4] {
            let e = s.eval(x);
            assert!(e[1].abs() < 1e-9 && e[2].abs() < 1e-5 && e[3].abs() < 1e-1);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let outer = Cylinder::new(0.1, 0.9, [1.0, 1.2, 0.8], 1.0).unwrap();
        let inner = Cylinder::new(0.3, 0.7, [1.0, 1.2, 0.8], 0.4).unwrap();
        let c = Cutoff::between(&inner, &outer, 3).unwrap();
        let l = 10.0;
        let x = [1.5, 1.45, 0.6];
        let t = 0.2;
        let eps = 1e-5;
        let f = |t: f64, x: [f64; 3]| c.value(t, x, l);
        let shift = |x: [f64; 3], a: usize, s: f64| {
            let mut y = x;
            y[a] += s;
            y
        };
        let dt_fd = (f(t + eps, x) - f(t - eps, x)) / (2.0 * eps);
        assert!((c.derivative(Deriv::TIME, t, x, l).unwrap() - dt_fd).abs() < 1e-6);
        for a in 0..3 {
            let d1 = (f(t, shift(x, a, eps)) - f(t, shift(x, a, -eps))) / (2.0 * eps);
            assert!((c.derivative(Deriv::axis(a), t, x, l).unwrap() - d1).abs() < 1e-6);
            for b in 0..3 {
                let g = |y| c.derivative(Deriv::axis(b), t, y, l).unwrap();
                let d2 = (g(shift(x, a, eps)) - g(shift(x, a, -eps))) / (2.0 * eps);
                let exact = c.derivative(Deriv::axis(a).plus(b), t, x, l).unwrap();
                assert!((exact - d2).abs() < 1e-5 * (1.0 + exact.abs()));
                for k in 0..3 {
                    let g2 = |y| c.derivative(Deriv::axis(a).plus(b), t, y, l).unwrap();
                    let d3 = (g2(shift(x, k, eps)) - g2(shift(x, k, -eps))) / (2.0 * eps);
                    let exact = c.derivative(Deriv::axis(a).plus(b).plus(k), t, x, l).unwrap();
                    assert!((exact - d3).abs() < 1e-4 * (1.0 + exact.abs()), "{a}{b}{k}: {exact} vs {d3}");
                }
            }
        }
        assert!(c.derivative(Deriv::space([2, 2, 0]), t, x, l).is_err());
    }

    #[test]
    fn plateau_and_support() {
        let outer = Cylinder::new(0.1, 0.9, [0.0; 3], 1.0).unwrap();
        let inner = Cylinder::new(0.3, 0.7, [0.0; 3], 0.4).unwrap();
        let c = Cutoff::between(&inner, &outer, 3).unwrap();
        assert_eq!(c.value(0.5, [0.39, 0.0, 0.0], 10.0), 1.0);
        assert_eq!(c.value(0.3, [0.0; 3], 10.0), 1.0);
        assert_eq!(c.value(0.1, [0.0; 3], 10.0), 0.0);
        assert_eq!(c.value(0.5, [0.99, 0.0, 0.0], 10.0), 0.0);
        // periodic image
        assert_eq!(c.value(0.5, [9.7, 0.0, 0.0], 10.0), 1.0);
        assert_eq!(spatial_indices().len(), 20);
    }
}
