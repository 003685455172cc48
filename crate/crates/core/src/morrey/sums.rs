//! Exact lattice sums of a nonnegative density over every cylinder of a plan.
//!
//! A cell belongs to a cylinder when its sample point lies inside it. Balls are
//! decomposed into z-columns read from per-column prefix sums, and the time
//! window is read from a prefix over slices. Zero densities stay exactly zero.

use rayon::prelude::*;

use super::plan::CylinderSamplingPlan;
use crate::field::Grid;

/// Sums for one radius class, indexed `spatial_center * time_centers + time_center`.
pub struct RadiusSums {
    pub r: f64,
    /// Cells per ball.
    pub ball_cells: usize,
    /// Slices counted per time center (clipped at the ends of the history).
    pub slices: Vec<usize>,
    pub sums: Vec<f64>,
}

pub struct CylinderFamily {
    pub spatial: Vec<usize>,
    pub times: Vec<usize>,
    pub radii: Vec<RadiusSums>,
}

/// Per-column prefix sums along z, for every slice.
pub struct ColumnPrefix {
    n: usize,
    nt: usize,
    data: Vec<f64>,
}

impl ColumnPrefix {
    pub fn new(grid: &Grid, density: &[f64]) -> ColumnPrefix {
        let n = grid.nx;
        let p = grid.points();
        assert_eq!(density.len(), grid.nt * p, "density must be a scalar field");
        let stride = n * n * (n + 1);
        let mut data = vec![0.0; grid.nt * stride];
        data.par_chunks_mut(stride).enumerate().for_each(|(t, out)| {
            let d = &density[t * p..(t + 1) * p];
            for xy in 0..n * n {
                let base = xy * (n + 1);
                let mut acc = 0.0;
                out[base] = 0.0;
                for z in 0..n {
                    acc += d[z * n * n + xy];
                    out[base + z + 1] = acc;
                }
            }
        });
        ColumnPrefix { n, nt: grid.nt, data }
    }

    /// Sum over `z0 - m ..= z0 + m` (periodic) of column `(x, y)` at slice `t`.
    #[inline]
    fn window(&self, t: usize, x: usize, y: usize, z0: usize, m: usize) -> f64 {
        let n = self.n;
        let base = t * n * n * (n + 1) + (y * n + x) * (n + 1);
        let col = &self.data[base..base + n + 1];
        let a = z0 as i64 - m as i64;
        let b = z0 + m;
        if a >= 0 && b < n {
            col[b + 1] - col[a as usize]
        } else if a < 0 {
            (col[n] - col[(n as i64 + a) as usize]) + col[b + 1]
        } else {
            (col[n] - col[a as usize]) + col[b - n + 1]
        }
    }
}

/// Lattice ball: for each `(dx, dy)` the half-height of its z-column.
pub fn ball_columns(r: f64, h: f64) -> Vec<(i64, i64, usize)> {
    let rr = (r / h) * (r / h);
    let reach = (r / h).floor() as i64 + 1;
    let mut cols = Vec::new();
    for dy in -reach..=reach {
        for dx in -reach..=reach {
            let planar = (dx * dx + dy * dy) as f64;
            if planar >= rr {
                continue;
            }
            let mut m = (rr - planar).sqrt().floor() as i64 + 1;
            while m >= 0 && (planar + (m * m) as f64) >= rr {
                m -= 1;
            }
            cols.push((dx, dy, m as usize));
        }
    }
    cols
}

/// Largest slice offset `k` with `k * dt < r^2`.
pub fn time_reach(r: f64, dt: f64) -> usize {
    let mut k = (r * r / dt).floor() as i64 + 1;
    while k > 0 && (k as f64) * dt >= r * r {
        k -= 1;
    }
    k.max(0) as usize
}

/// Lattice sums of `density` over every cylinder of the plan.
pub fn cylinder_sums(grid: &Grid, density: &[f64], plan: &CylinderSamplingPlan) -> CylinderFamily {
    let prefix = ColumnPrefix::new(grid, density);
    cylinder_sums_with(grid, &prefix, plan)
}

pub fn cylinder_sums_with(grid: &Grid, prefix: &ColumnPrefix, plan: &CylinderSamplingPlan) -> CylinderFamily {
    let n = grid.nx;
    let axis = plan.spatial_axis(grid);
    let times = plan.time_axis(grid);
    let mut spatial = Vec::with_capacity(axis.len().pow(3));
    for &z in &axis {
        for &y in &axis {
            for &x in &axis {
                spatial.push(grid.index(x, y, z));
            }
        }
    }
    let nt = prefix.nt;
    let mut radii = Vec::new();
    for r in plan.radii() {
        let cols = ball_columns(r, grid.h());
        let ball_cells: usize = cols.iter().map(|c| 2 * c.2 + 1).sum();
        let k = time_reach(r, grid.dt());
        let slices: Vec<usize> = times
            .iter()
            .map(|&t0| (t0 + k).min(nt - 1) + 1 - t0.saturating_sub(k))
            .collect();
        let sums: Vec<f64> = spatial
            .par_iter()
            .flat_map_iter(|&idx| {
                let (x0, y0, z0) = (idx % n, (idx / n) % n, idx / (n * n));
                // ball sum per slice, then prefix over time
                let mut tp = vec![0.0; nt + 1];
                for t in 0..nt {
                    let mut s = 0.0;
                    for &(dx, dy, m) in &cols {
                        let x = (x0 as i64 + dx).rem_euclid(n as i64) as usize;
                        let y = (y0 as i64 + dy).rem_euclid(n as i64) as usize;
                        s += prefix.window(t, x, y, z0, m);
                    }
                    tp[t + 1] = tp[t] + s;
                }
                times
                    .iter()
                    .map(move |&t0| {
                        let lo = t0.saturating_sub(k);
                        let hi = (t0 + k).min(nt - 1);
                        tp[hi + 1] - tp[lo]
                    })
                    .collect::<Vec<f64>>()
            })
            .collect();
        radii.push(RadiusSums {
            r,
            ball_cells,
            slices,
            sums,
        });
    }
    CylinderFamily {
        spatial,
        times,
        radii,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_counts_match_brute_force() {
        let h = 0.3;
        for &r in &[0.65, 0.95, 1.27, 1.75] {
            let cols = ball_columns(r, h);
            let count: usize = cols.iter().map(|c| 2 * c.2 + 1).sum();
            let reach = 10i64;
            let mut brute = 0;
            for z in -reach..=reach {
                for y in -reach..=reach {
                    for x in -reach..=reach {
                        let d = h * ((x * x + y * y + z * z) as f64).sqrt();
                        if d < r {
                            brute += 1;
                        }
                    }
                }
            }
            assert_eq!(count, brute, "r = {r}");
        }
    }

    #[test]
    fn time_reach_is_strict() {
        assert_eq!(time_reach(1.0, 0.25), 3);
        assert_eq!(time_reach(1.0, 0.3), 3);
        assert_eq!(time_reach(0.1, 0.5), 0);
    }
}
