//! Solver configuration and the recipes for initial data, perturbation and force.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::random::random_snapshot;
use crate::field::{Grid, SpectralContext, SpectralSnapshot};

/// Independent switches for the non-diffusive terms of the system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TermToggles {
    /// `(u.grad)u` and `(u.grad)omega`.
    pub convection: bool,
    /// The two `curl / 2` couplings.
    pub coupling: bool,
    /// `grad div omega`.
    pub grad_div: bool,
    /// `-omega`.
    pub damping: bool,
    /// `(a.grad)u + (u.grad)a`.
    pub perturbation: bool,
    pub forcing: bool,
}

impl Default for TermToggles {
    fn default() -> Self {
        TermToggles {
            convection: true,
            coupling: true,
            grad_div: true,
            damping: true,
            perturbation: true,
            forcing: true,
        }
    }
}

impl TermToggles {
    pub fn none() -> TermToggles {
        TermToggles {
            convection: false,
            coupling: false,
            grad_div: false,
            damping: false,
            perturbation: false,
            forcing: false,
        }
    }
}

/// Recipe for an initial field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldRecipe {
    // braces so that stray keys next to the tag are rejected
    Zero {},
    /// `A (sin x cos y cos z, -cos x sin y cos z, 0)` in units of `2 pi / L`.
    TaylorGreen { amplitude: f64 },
    /// Seeded band-limited field with modes `max |k_i| <= kmax`, scaled to
    /// max-abs `amplitude`.
    Random {
        kmax: i64,
        amplitude: f64,
        #[serde(default = "yes")]
        solenoidal: bool,
    },
    /// `Re(amplitude exp(i k.x))` for an integer wavevector.
    Mode { k: [i64; 3], amplitude: [f64; 3] },
}

fn yes() -> bool {
    true
}

/// Time-independent drive for the perturbation `a` or the force `f`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DriveRecipe {
    Zero {},
    TaylorGreen { amplitude: f64 },
    /// Taylor-Green mode scaled so its `L^6_t L^6_x` norm over the run is `norm`.
    TaylorGreenL6 { norm: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialData {
    pub u: FieldRecipe,
    pub omega: FieldRecipe,
}

impl Default for InitialData {
    fn default() -> Self {
        InitialData {
            u: FieldRecipe::Random {
                kmax: 3,
                amplitude: 1.0,
                solenoidal: true,
            },
            omega: FieldRecipe::Random {
                kmax: 3,
                amplitude: 0.5,
                solenoidal: false,
            },
        }
    }
}

/// Everything a run needs. Every field has a default, unknown keys are errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Box, resolution, horizon and number of stored slices.
    pub grid: Grid,
    /// Largest time step. `None` takes one step per stored slice.
    pub dt: Option<f64>,
    /// Keep only modes with `3 |k_i| < N`, so quadratic products are alias free.
    pub dealias: bool,
    /// Largest admissible `max|u| dt / h`.
    pub cfl_limit: f64,
    pub toggles: TermToggles,
    pub seed: u64,
    pub initial: InitialData,
    pub perturbation: DriveRecipe,
    pub force: DriveRecipe,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            grid: Grid::default(),
            dt: None,
            dealias: true,
            cfl_limit: 0.5,
            toggles: TermToggles::default(),
            seed: 0,
            initial: InitialData::default(),
            perturbation: DriveRecipe::TaylorGreenL6 { norm: 1.0 },
            force: DriveRecipe::Zero {},
        }
    }
}

impl SolverConfig {
    pub fn from_json(text: &str) -> Result<SolverConfig> {
        let cfg: SolverConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Config(format!("dt = {dt} must be positive")));
            }
        }
        if !(self.cfl_limit > 0.0) {
            return Err(Error::Config(format!("cfl_limit = {} must be positive", self.cfl_limit)));
        }
        for r in [&self.initial.u, &self.initial.omega] {
            if let FieldRecipe::Random { kmax, .. } = r {
                if *kmax < 1 {
                    return Err(Error::Config(format!("random recipe needs kmax >= 1, got {kmax}")));
                }
            }
        }
        if let DriveRecipe::TaylorGreenL6 { norm } = self.perturbation {
            if !(norm >= 0.0) {
                return Err(Error::Config(format!("perturbation norm {norm} must be non-negative")));
            }
        }
        Ok(())
    }

    pub fn context(&self) -> Arc<SpectralContext> {
        SpectralContext::get(self.grid.nx, self.grid.l)
    }

    /// Largest retained `|k_i|`.
    pub fn kmax(&self) -> i64 {
        let n = self.grid.nx as i64;
        if self.dealias {
            (n - 1) / 3
        } else {
            n / 2 - 1
        }
    }

    /// Zero every mode the solver does not carry.
    pub fn band_limit(&self, s: &mut SpectralSnapshot) {
        s.drop_nyquist();
        s.truncate_to(self.kmax());
    }

    /// Initial `(u, omega)`; `u` is Leray projected and both are band limited.
    pub fn initial_state(&self) -> Result<(SpectralSnapshot, SpectralSnapshot)> {
        let ctx = self.context();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut u = build_field(&ctx, &self.initial.u, &mut rng)?;
        let mut w = build_field(&ctx, &self.initial.omega, &mut rng)?;
        self.band_limit(&mut u);
        self.band_limit(&mut w);
        u.require_solenoidal("initial velocity")?;
        Ok((u.leray_project()?, w))
    }

    /// Frozen perturbation `a`, band limited.
    pub fn perturbation_field(&self) -> Result<SpectralSnapshot> {
        self.drive(&self.perturbation)
    }

    pub fn force_field(&self) -> Result<SpectralSnapshot> {
        self.drive(&self.force)
    }

    fn drive(&self, r: &DriveRecipe) -> Result<SpectralSnapshot> {
        let ctx = self.context();
        let mut s = match r {
            DriveRecipe::Zero {} => SpectralSnapshot::zeros(&ctx, 3),
            DriveRecipe::TaylorGreen { amplitude } => taylor_green(&ctx).scaled(*amplitude),
            DriveRecipe::TaylorGreenL6 { norm } => {
                let tg = taylor_green(&ctx);
                let h3 = self.grid.h().powi(3);
                let real = tg.to_real();
                let p = ctx.points();
                let sum: f64 = (0..p)
                    .map(|i| {
                        let m2 = (0..3).map(|c| real[c * p + i].powi(2)).sum::<f64>();
                        m2 * m2 * m2
                    })
                    .sum();
                let unit = (sum * h3 * self.grid.t).powf(1.0 / 6.0);
                tg.scaled(norm / unit)
            }
        };
        self.band_limit(&mut s);
        s.require_solenoidal("drive")?;
        Ok(s)
    }
}

fn sample(ctx: &Arc<SpectralContext>, f: impl Fn([f64; 3]) -> [f64; 3]) -> SpectralSnapshot {
    let n = ctx.n();
    let h = ctx.l() / n as f64;
    let p = ctx.points();
    let mut v = vec![0.0; 3 * p];
    for i in 0..p {
        let x = [(i % n) as f64 * h, ((i / n) % n) as f64 * h, (i / (n * n)) as f64 * h];
        let r = f(x);
        for c in 0..3 {
            v[c * p + i] = r[c];
        }
    }
    SpectralSnapshot::from_real(ctx, 3, &v)
}

/// Unit Taylor-Green vortex.
pub fn taylor_green(ctx: &Arc<SpectralContext>) -> SpectralSnapshot {
    let k0 = 2.0 * std::f64::consts::PI / ctx.l();
    sample(ctx, |x| {
        let (a, b, c) = (k0 * x[0], k0 * x[1], k0 * x[2]);
        [a.sin() * b.cos() * c.cos(), -a.cos() * b.sin() * c.cos(), 0.0]
    })
}

fn build_field(ctx: &Arc<SpectralContext>, r: &FieldRecipe, rng: &mut ChaCha8Rng) -> Result<SpectralSnapshot> {
    Ok(match r {
        FieldRecipe::Zero {} => SpectralSnapshot::zeros(ctx, 3),
        FieldRecipe::TaylorGreen { amplitude } => taylor_green(ctx).scaled(*amplitude),
        FieldRecipe::Random {
            kmax,
            amplitude,
            solenoidal,
        } => random_snapshot(ctx, 3, *kmax, *solenoidal, rng).scaled(*amplitude),
        FieldRecipe::Mode { k, amplitude } => {
            let k0 = 2.0 * std::f64::consts::PI / ctx.l();
            let half = ctx.n() as i64 / 2;
            if k.iter().any(|v| v.abs() >= half) {
                return Err(Error::Config(format!("mode {k:?} is not resolved on {} points", ctx.n())));
            }
            let (k, a) = (*k, *amplitude);
            sample(ctx, move |x| {
                let phase = k0 * (k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2]);
                let c = phase.cos();
                [a[0] * c, a[1] * c, a[2] * c]
            })
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_and_reject_unknown_keys() {
        let cfg = SolverConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(SolverConfig::from_json(&text).unwrap(), cfg);
        assert_eq!(SolverConfig::from_json("{}").unwrap(), cfg);
        assert!(SolverConfig::from_json(r#"{"bogus": 1}"#).is_err());
        assert!(SolverConfig::from_json(r#"{"toggles": {"convection": false, "x": 1}}"#).is_err());
        let cfg = SolverConfig::from_json(r#"{"initial": {"u": {"kind": "taylor_green", "amplitude": 2}}}"#).unwrap();
        assert_eq!(cfg.initial.u, FieldRecipe::TaylorGreen { amplitude: 2.0 });
    }

    #[test]
    fn l6_scaling_hits_target() {
        let mut cfg = SolverConfig::default();
        cfg.grid = Grid::new(2.0 * std::f64::consts::PI, 16, 0.5, 3).unwrap();
        cfg.perturbation = DriveRecipe::TaylorGreenL6 { norm: 2.0 };
        let a = cfg.perturbation_field().unwrap().to_real();
        let p = cfg.grid.points();
        let s: f64 = (0..p)
            .map(|i| (0..3).map(|c| a[c * p + i].powi(2)).sum::<f64>().powi(3))
            .sum();
        let norm = (s * cfg.grid.h().powi(3) * 0.5).powf(1.0 / 6.0);
        assert!((norm - 2.0).abs() < 1e-12);
    }

    #[test]
    fn non_solenoidal_initial_velocity_is_rejected() {
        let mut cfg = SolverConfig::default();
        cfg.grid = Grid::new(2.0 * std::f64::consts::PI, 16, 1.0, 3).unwrap();
        cfg.initial.u = FieldRecipe::Mode {
            k: [1, 0, 0],
            amplitude: [1.0, 0.0, 0.0],
        };
        assert!(matches!(cfg.initial_state(), Err(Error::NotSolenoidal { .. })));
    }
}
