//! Seeded random band-limited fields.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::Grid;
use super::history::SpaceTimeField;
use super::spectral::{SpectralContext, SpectralSnapshot};

/// Random real field with modes `max |k_i| <= kmax` and amplitudes decaying
/// like `1 / (1 + |k|^2)`, scaled to unit max-abs. Solenoidal vectors are
/// Leray projected before scaling.
pub fn random_snapshot(
    ctx: &Arc<SpectralContext>,
    comps: usize,
    kmax: i64,
    solenoidal: bool,
    rng: &mut impl Rng,
) -> SpectralSnapshot {
    let p = ctx.points();
    let kmax = kmax.min(ctx.n() as i64 / 2 - 1);
    let mut data = vec![Complex64::default(); comps * p];
    for c in 0..comps {
        for i in 0..p {
            let k = ctx.integer_k(i);
            if k.iter().any(|v| v.abs() > kmax) || k == [0, 0, 0] {
                continue;
            }
            let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            let amp = 1.0 / (1.0 + k2);
            data[c * p + i] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * amp;
        }
    }
    // the real part of the synthesized field keeps the same band
    let real = SpectralSnapshot::from_coefficients(ctx, comps, data).to_real();
    let mut s = SpectralSnapshot::from_real(ctx, comps, &real);
    s.truncate_to(kmax);
    if solenoidal && comps == 3 {
        s = s.leray_project().expect("three components");
    }
    let peak = s.to_real().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        s = s.scaled(1.0 / peak);
    }
    s
}

/// `A cos t + B sin 2t + C t` with random band-limited `A`, `B`, `C`: smooth
/// in time, with a known time derivative.
#[derive(Clone, Debug)]
pub struct SmoothRandomField {
    parts: [SpectralSnapshot; 3],
}

impl SmoothRandomField {
    pub fn new(grid: &Grid, comps: usize, kmax: i64, solenoidal: bool, seed: u64) -> SmoothRandomField {
        let ctx = SpectralContext::get(grid.nx, grid.l);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SmoothRandomField {
            parts: [
                random_snapshot(&ctx, comps, kmax, solenoidal, &mut rng),
                random_snapshot(&ctx, comps, kmax, solenoidal, &mut rng),
                random_snapshot(&ctx, comps, kmax, solenoidal, &mut rng),
            ],
        }
    }

    fn combine(&self, w: [f64; 3]) -> SpectralSnapshot {
        let mut out = self.parts[0].scaled(w[0]);
        out.add_scaled(&self.parts[1], w[1]);
        out.add_scaled(&self.parts[2], w[2]);
        out
    }

    pub fn at(&self, t: f64) -> SpectralSnapshot {
        self.combine([t.cos(), (2.0 * t).sin(), t])
    }

    pub fn time_derivative(&self, t: f64) -> SpectralSnapshot {
        self.combine([-t.sin(), 2.0 * (2.0 * t).cos(), 1.0])
    }

    pub fn sample(&self, grid: &Grid) -> SpaceTimeField {
        let comps = self.parts[0].comps();
        SpaceTimeField::from_slices(*grid, comps, |n| self.at(grid.time(n)).to_real())
    }
}
