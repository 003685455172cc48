//! Direct quadrature of `I_a f(t, x) = ∫∫ f(s, y) / (|t - s|^{1/2} + |x - y|)^{5 - a} dy ds`.

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Grid, SpaceTimeField};

/// Order `a` of the potential, `0 < a < 5`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RieszOrder {
    pub a: f64,
}

impl RieszOrder {
    pub fn new(a: f64) -> Result<RieszOrder> {
        if !(a > 0.0 && a < 5.0) {
            return Err(Error::RieszOrder(a));
        }
        Ok(RieszOrder { a })
    }

    /// The Adams–Hedberg range additionally needs `a < 5/q`.
    pub fn check_for_q(&self, q: f64) -> Result<()> {
        if self.a * q >= 5.0 {
            return Err(Error::Exponent(format!(
                "order a = {} needs a < 5/q = {}",
                self.a,
                5.0 / q
            )));
        }
        Ok(())
    }
}

fn kernel(a: f64, t: f64, r: f64) -> f64 {
    (t.abs().sqrt() + r).powf(a - 5.0)
}

/// Integral of the kernel over `[0, dt/2] x [0, h/2]^3`.
///
/// The box minus its parabolic half-dilate splits into 15 sub-boxes on which
/// the kernel is bounded; the dilate carries `2^{-a}` of the total, so the
/// total is the sub-box sum divided by `1 - 2^{-a}`. Time is integrated in
/// `sigma = sqrt(t)` to remove the square-root cusp.
pub fn corner_integral(a: f64, dt: f64, h: f64) -> f64 {
    let gl = GaussLegendre::new(12).expect("degree >= 2");
    let t_cuts = [0.0, (dt / 8.0).sqrt(), (dt / 2.0).sqrt()];
    let x_cuts = [0.0, h / 4.0, h / 2.0];
    let mut s0 = 0.0;
    for bt in 0..2 {
        for bx in 0..2 {
            for by in 0..2 {
                for bz in 0..2 {
                    if bt + bx + by + bz == 0 {
                        continue;
                    }
                    s0 += gl.integrate(t_cuts[bt], t_cuts[bt + 1], |sig| {
                        2.0 * sig
                            * gl.integrate(x_cuts[bx], x_cuts[bx + 1], |x| {
                                gl.integrate(x_cuts[by], x_cuts[by + 1], |y| {
                                    gl.integrate(x_cuts[bz], x_cuts[bz + 1], |z| {
                                        (sig + (x * x + y * y + z * z).sqrt()).powf(a - 5.0)
                                    })
                                })
                            })
                    });
                }
            }
        }
    }
    s0 / (1.0 - 2f64.powf(-a))
}

/// Quadrature weights indexed by time-index gap and minimal-image spatial
/// index gaps. The zero entry is the integral of the kernel over one cell.
struct KernelTable {
    half: usize,
    nt: usize,
    w: Vec<f64>,
}

impl KernelTable {
    fn new(grid: &Grid, a: f64) -> KernelTable {
        let half = grid.nx / 2;
        let m = half + 1;
        let (h, dt) = (grid.h(), grid.dt());
        let cell = grid.cell_measure();
        let mut w = vec![0.0; grid.nt * m * m * m];
        w.par_chunks_mut(m * m * m).enumerate().for_each(|(n, block)| {
            let t = n as f64 * dt;
            for k in 0..m {
                for j in 0..m {
                    for i in 0..m {
                        let r = h * ((i * i + j * j + k * k) as f64).sqrt();
                        block[(k * m + j) * m + i] = if n == 0 && i + j + k == 0 {
                            0.0
                        } else {
                            cell * kernel(a, t, r)
                        };
                    }
                }
            }
        });
        if grid.nt > 1 {
            w[0] = 16.0 * corner_integral(a, dt, h);
        }
        KernelTable { half, nt: grid.nt, w }
    }

    #[inline]
    fn gap(&self, d: usize, n: usize) -> usize {
        if d > self.half {
            n - d
        } else {
            d
        }
    }

    #[inline]
    fn weight(&self, dn: usize, di: [usize; 3]) -> f64 {
        let m = self.half + 1;
        debug_assert!(dn < self.nt);
        self.w[((dn * m + di[2]) * m + di[1]) * m + di[0]]
    }
}

struct Source {
    n: usize,
    ijk: [usize; 3],
    v: f64,
}

/// `I_a f` at every event of the grid, component by component.
pub fn riesz_apply(f: &SpaceTimeField, order: RieszOrder) -> Result<SpaceTimeField> {
    riesz_apply_masked(f, order, None)
}

/// Like [`riesz_apply`] but only evaluates where `mask` (one flag per event,
/// slice-major like a scalar field) is set; other events stay zero.
pub fn riesz_apply_masked(f: &SpaceTimeField, order: RieszOrder, mask: Option<&[bool]>) -> Result<SpaceTimeField> {
    let order = RieszOrder::new(order.a)?;
    let grid = *f.grid();
    if grid.nt < 2 {
        return Err(Error::Grid("the potential needs at least two time slices".into()));
    }
    let n = grid.nx;
    let p = grid.points();
    if let Some(m) = mask {
        if m.len() != p * grid.nt {
            return Err(Error::Shape(format!("mask has {} entries, grid has {}", m.len(), p * grid.nt)));
        }
    }
    let table = KernelTable::new(&grid, order.a);
    let comps = f.components();
    let mut out = SpaceTimeField::zeros(grid, comps);
    for c in 0..comps {
        let sources: Vec<Source> = (0..grid.nt)
            .flat_map(|s| {
                let slice = &f.slice(s)[c * p..(c + 1) * p];
                slice
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(move |(idx, v)| Source {
                        n: s,
                        ijk: [idx % n, (idx / n) % n, idx / (n * n)],
                        v: *v,
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        if sources.is_empty() {
            continue;
        }
        let vals: Vec<f64> = (0..grid.nt * p)
            .into_par_iter()
            .map(|e| {
                if mask.is_some_and(|m| !m[e]) {
                    return 0.0;
                }
                let (t, idx) = (e / p, e % p);
                let ijk = [idx % n, (idx / n) % n, idx / (n * n)];
                let mut acc = 0.0;
                for s in &sources {
                    let dn = t.abs_diff(s.n);
                    let di = [
                        table.gap(ijk[0].abs_diff(s.ijk[0]), n),
                        table.gap(ijk[1].abs_diff(s.ijk[1]), n),
                        table.gap(ijk[2].abs_diff(s.ijk[2]), n),
                    ];
                    acc += table.weight(dn, di) * s.v;
                }
                acc
            })
            .collect();
        for t in 0..grid.nt {
            out.slice_mut(t)[c * p..(c + 1) * p].copy_from_slice(&vals[t * p..(t + 1) * p]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_integral_matches_brute_force() {
        // midpoint rule on a fine lattice, in sigma = sqrt(t)
        let (a, dt, h) = (1.5, 0.02, 0.3);
        let m = 40;
        let mut s = 0.0;
        let (ds, dx) = ((dt / 2.0f64).sqrt() / m as f64, h / 2.0 / m as f64);
        for it in 0..m {
            let sig = (it as f64 + 0.5) * ds;
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        let r = dx * (((i * i + j * j + k * k) as f64) + (i + j + k) as f64 + 0.75).sqrt();
                        s += 2.0 * sig * (sig + r).powf(a - 5.0);
                    }
                }
            }
        }
        s *= ds * dx * dx * dx;
        let got = corner_integral(a, dt, h);
        assert!((got / s - 1.0).abs() < 2e-2, "{got} vs {s}");
    }

    #[test]
    fn order_range() {
        assert!(RieszOrder::new(0.0).is_err());
        assert!(RieszOrder::new(5.0).is_err());
        assert!(RieszOrder::new(2.5).is_ok());
        assert!(RieszOrder::new(1.0).unwrap().check_for_q(5.0).is_err());
        assert!(RieszOrder::new(0.5).unwrap().check_for_q(5.5).is_ok());
    }
}
