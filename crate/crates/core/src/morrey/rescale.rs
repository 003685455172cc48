//! Parabolic dilations `f_lambda(t, x) = f(lambda^2 t, lambda x)`.

use rayon::prelude::*;

use super::geometry::Event;
use crate::error::{Error, Result};
use crate::field::{Grid, SpaceTimeField};

/// `j` with `lambda = 2^-j`, if any.
pub fn dyadic_exponent(lambda: f64) -> Option<u32> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return None;
    }
    let j = (-lambda.log2()).round();
    (j >= 0.0 && j <= 30.0 && (2f64.powi(-(j as i32)) - lambda).abs() <= 1e-15 * lambda.max(1e-300))
        .then_some(j as u32)
}

/// Exact on-grid dilation: the samples of `f_lambda` on the grid with side
/// `L / lambda` and horizon `T / lambda^2` are the samples of `f` on the
/// original grid, so the field is relabeled rather than interpolated.
pub fn parabolic_rescale(f: &SpaceTimeField, lambda: f64) -> Result<SpaceTimeField> {
    dyadic_exponent(lambda).ok_or(Error::OffGridScale(lambda))?;
    let g = f.grid();
    let grid = Grid::new(g.l / lambda, g.nx, g.t / (lambda * lambda), g.nt)?;
    SpaceTimeField::from_values(grid, f.components(), f.values().to_vec())
}

/// Periodic trigonometric interpolation weights from `n` samples with
/// spacing `period / n` to the point `y`.
fn trig_weights(n: usize, period: f64, y: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    let two_pi = 2.0 * std::f64::consts::PI;
    for (i, wi) in w.iter_mut().enumerate() {
        let theta = two_pi * (y - i as f64 * period / n as f64) / period;
        let mut s = 1.0;
        if n % 2 == 0 {
            for k in 1..n / 2 {
                s += 2.0 * (k as f64 * theta).cos();
            }
            s += (n as f64 / 2.0 * theta).cos();
        } else {
            for k in 1..=(n - 1) / 2 {
                s += 2.0 * (k as f64 * theta).cos();
            }
        }
        *wi = s / n as f64;
    }
    w
}

/// Dilation about `center` resampled onto the same grid by trigonometric
/// interpolation in every direction. Time is treated as periodic with period
/// `Nt * dt`, so `f` must vanish near both ends of the history.
pub fn parabolic_rescale_resampled(f: &SpaceTimeField, lambda: f64, center: Event) -> Result<SpaceTimeField> {
    dyadic_exponent(lambda).ok_or(Error::OffGridScale(lambda))?;
    let g = *f.grid();
    let n = g.nx;
    let h = g.h();
    let comps = f.components();
    let p = g.points();
    let axis_weights = |c: f64| -> Vec<Vec<f64>> {
        (0..n)
            .map(|j| trig_weights(n, g.l, c + lambda * (j as f64 * h - c)))
            .collect()
    };
    let wx = axis_weights(center.x[0]);
    let wy = axis_weights(center.x[1]);
    let wz = axis_weights(center.x[2]);
    let dt = g.dt();
    let tp = g.nt as f64 * dt;
    let wt: Vec<Vec<f64>> = (0..g.nt)
        .map(|j| trig_weights(g.nt, tp, center.t + lambda * lambda * (j as f64 * dt - center.t)))
        .collect();

    // space, slice by slice
    let spatial: Vec<Vec<f64>> = (0..g.nt)
        .into_par_iter()
        .map(|t| {
            let src = f.slice(t);
            let mut out = vec![0.0; comps * p];
            let mut a = vec![0.0; p];
            let mut b = vec![0.0; p];
            for c in 0..comps {
                let s = &src[c * p..(c + 1) * p];
                for z in 0..n {
                    for y in 0..n {
                        let row = &s[(z * n + y) * n..(z * n + y + 1) * n];
                        for x in 0..n {
                            a[(z * n + y) * n + x] = wx[x].iter().zip(row).map(|(w, v)| w * v).sum();
                        }
                    }
                }
                for z in 0..n {
                    for x in 0..n {
                        for y in 0..n {
                            b[(z * n + y) * n + x] =
                                (0..n).map(|i| wy[y][i] * a[(z * n + i) * n + x]).sum();
                        }
                    }
                }
                let o = &mut out[c * p..(c + 1) * p];
                for y in 0..n {
                    for x in 0..n {
                        for z in 0..n {
                            o[(z * n + y) * n + x] =
                                (0..n).map(|i| wz[z][i] * b[(i * n + y) * n + x]).sum();
                        }
                    }
                }
            }
            out
        })
        .collect();
    let len = comps * p;
    Ok(SpaceTimeField::from_slices(g, comps, |t| {
        let mut out = vec![0.0; len];
        for (s, w) in spatial.iter().zip(&wt[t]) {
            if *w != 0.0 {
                for (o, v) in out.iter_mut().zip(s) {
                    *o += w * v;
                }
            }
        }
        out
    }))
}
