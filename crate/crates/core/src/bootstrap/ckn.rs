//! Scaled local energy `(1/r) ∫∫ |grad u|^2 + |grad omega|^2` on shrinking
//! parabolic cylinders.
//!
//! The spatial integral over each ball is exact for band-limited fields: the
//! integrand is formed on a grid fine enough to hold its full spectrum, and
//! each Fourier mode is integrated over the ball in closed form. Time is
//! integrated with the trapezoid rule on the piecewise linear interpolant of
//! the slice values, cut at the cylinder ends.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{FieldHistory, SpectralContext, SpectralSnapshot};
use crate::morrey::Event;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorEntry {
    pub r: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyMonitorSeries {
    pub center: Event,
    /// Strictly decreasing radii.
    pub entries: Vec<MonitorEntry>,
    /// Log-log slope over the three smallest radii.
    pub slope: Option<f64>,
}

impl EnergyMonitorSeries {
    /// Largest radius below which every entry stays under `eps`.
    pub fn crossing(&self, eps: f64) -> Option<f64> {
        let mut best = None;
        for e in self.entries.iter().rev() {
            if e.value < eps {
                best = Some(e.r);
            } else {
                break;
            }
        }
        best
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,value\n");
        for e in &self.entries {
            s.push_str(&format!("{},{:.12e}\n", e.r, e.value));
        }
        s
    }
}

/// `∫_{|x| < r} exp(i k.x) dx` for `|k| = k`.
pub fn ball_transform(k: f64, r: f64) -> f64 {
    let z = k * r;
    if z < 1e-2 {
        let z2 = z * z;
        4.0 * std::f64::consts::PI * r.powi(3) * (1.0 / 3.0 - z2 / 30.0 + z2 * z2 / 840.0)
    } else {
        4.0 * std::f64::consts::PI * (z.sin() - z * z.cos()) / k.powi(3)
    }
}

/// Least-squares slope of `ln value` against `ln r`.
pub fn log_log_slope(entries: &[MonitorEntry]) -> Option<f64> {
    if entries.len() < 2 || entries.iter().any(|e| !(e.value > 0.0)) {
        return None;
    }
    let xs: Vec<f64> = entries.iter().map(|e| e.r.ln()).collect();
    let ys: Vec<f64> = entries.iter().map(|e| e.value.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Spectrum of `sum_{c,j} (d_j v_c)^2` on a grid that resolves it exactly.
fn gradient_energy_spectrum(fields: &[SpectralSnapshot]) -> (Arc<SpectralContext>, Vec<Complex64>) {
    let src = fields[0].context().clone();
    let bw = fields.iter().map(|f| f.bandwidth(0.0)).max().unwrap_or(0).max(1);
    let m = (4 * bw + 2) as usize;
    let fine = SpectralContext::get(m, src.l());
    let mp = fine.points();
    let mut density = vec![0.0; mp];
    let index = |k: [i64; 3]| {
        let w = |v: i64| v.rem_euclid(m as i64) as usize;
        (w(k[2]) * m + w(k[1])) * m + w(k[0])
    };
    for f in fields {
        for c in 0..f.comps() {
            for j in 0..3 {
                let d = f.component(c).partial(j);
                let mut buf = vec![Complex64::default(); mp];
                for (idx, v) in d.coefficients().iter().enumerate() {
                    if *v != Complex64::default() {
                        buf[index(src.integer_k(idx))] = *v;
                    }
                }
                for (acc, v) in density.iter_mut().zip(fine.backward(&buf)) {
                    *acc += v * v;
                }
            }
        }
    }
    let hat = fine.forward(&density);
    (fine, hat)
}

fn ball_integral(ctx: &SpectralContext, hat: &[Complex64], x0: [f64; 3], r: f64) -> f64 {
    let k0 = 2.0 * std::f64::consts::PI / ctx.l();
    hat.iter()
        .enumerate()
        .filter(|(_, v)| **v != Complex64::default())
        .map(|(idx, v)| {
            let k = ctx.integer_k(idx);
            let kv = [k[0] as f64 * k0, k[1] as f64 * k0, k[2] as f64 * k0];
            let kn = (kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2]).sqrt();
            let phase = kv[0] * x0[0] + kv[1] * x0[1] + kv[2] * x0[2];
            (v * Complex64::from_polar(1.0, phase)).re * ball_transform(kn, r)
        })
        .sum()
}

/// Integral over `[a, b]` of the piecewise linear interpolant of `(t_i, g_i)`.
fn integrate_linear(ts: &[f64], gs: &[f64], a: f64, b: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..ts.len() - 1 {
        let (t0, t1) = (ts[i], ts[i + 1]);
        let lo = a.max(t0);
        let hi = b.min(t1);
        if hi <= lo {
            continue;
        }
        let at = |t: f64| gs[i] + (gs[i + 1] - gs[i]) * (t - t0) / (t1 - t0);
        total += 0.5 * (at(lo) + at(hi)) * (hi - lo);
    }
    total
}

pub fn ckn_monitor(
    u: &dyn FieldHistory,
    omega: &dyn FieldHistory,
    center: Event,
    radii: &[f64],
) -> Result<EnergyMonitorSeries> {
    let grid = *u.grid();
    if omega.grid() != &grid {
        return Err(Error::Shape("velocity and microrotation grids differ".into()));
    }
    let mut radii: Vec<f64> = radii.to_vec();
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::Geometry(format!("radii must be positive, got {radii:?}")));
    }
    radii.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    radii.dedup();
    let rmax = radii[0];
    if center.t - rmax * rmax < -1e-12 || center.t + rmax * rmax > grid.t + 1e-12 {
        return Err(Error::Geometry(format!(
            "radius {rmax} at t0 = {} leaves the history [0, {}]",
            center.t, grid.t
        )));
    }
    if 2.0 * rmax >= grid.l {
        return Err(Error::Geometry(format!("radius {rmax} wraps around the box of side {}", grid.l)));
    }
    let dt = grid.dt();
    let lo = (((center.t - rmax * rmax) / dt).floor().max(0.0)) as usize;
    let hi = (((center.t + rmax * rmax) / dt).ceil() as usize).min(grid.nt - 1);
    let slices: Vec<usize> = (lo..=hi).collect();
    // per slice, the ball integral for every radius
    let values: Vec<Vec<f64>> = slices
        .par_iter()
        .map(|&n| {
            let fields = [u.spectral_slice(n), omega.spectral_slice(n)];
            let (ctx, hat) = gradient_energy_spectrum(&fields);
            radii.iter().map(|&r| ball_integral(&ctx, &hat, center.x, r)).collect()
        })
        .collect();
    let ts: Vec<f64> = slices.iter().map(|&n| grid.time(n)).collect();
    let entries: Vec<MonitorEntry> = radii
        .iter()
        .enumerate()
        .map(|(j, &r)| {
            let gs: Vec<f64> = values.iter().map(|v| v[j]).collect();
            let integral = if ts.len() == 1 {
                gs[0] * 2.0 * r * r
            } else {
                integrate_linear(&ts, &gs, center.t - r * r, center.t + r * r)
            };
            MonitorEntry {
                r,
                value: (integral / r).max(0.0),
            }
        })
        .collect();
    let tail = &entries[entries.len().saturating_sub(3)..];
    let slope = if tail.len() == 3 { log_log_slope(tail) } else { None };
    Ok(EnergyMonitorSeries {
        center,
        entries,
        slope,
    })
}
