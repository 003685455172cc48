//! Time integration over a horizon with a stored space-time history.

use std::io::Write;
use std::path::Path;

use super::config::SolverConfig;
use super::step::{step, Diagnostics, SolverState, Supplier};
use crate::error::{Error, Result};
use crate::field::{pmf1, FrozenField, Grid, SpaceTimeField, SpectralSnapshot};

/// Sampled solution on the output grid.
#[derive(Clone, Debug)]
pub struct History {
    pub u: SpaceTimeField,
    pub omega: SpaceTimeField,
    pub pressure: SpaceTimeField,
}

impl History {
    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    /// Six-component state field, `u` then `omega`.
    pub fn state_field(&self) -> Result<SpaceTimeField> {
        SpaceTimeField::concat(&self.u, &self.omega)
    }

    /// Split a six-component state field.
    pub fn from_state_field(state: &SpaceTimeField) -> Result<(SpaceTimeField, SpaceTimeField)> {
        if state.components() != 6 {
            return Err(Error::Format(format!(
                "state file needs 6 components (u then omega), found {}",
                state.components()
            )));
        }
        Ok((state.select(0, 3)?, state.select(3, 3)?))
    }

    pub fn save_state(&self, path: &Path) -> Result<()> {
        pmf1::save(&self.state_field()?, path)
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    /// `None` for a zero horizon.
    pub history: Option<History>,
    pub final_state: SolverState,
    /// One entry per stored slice.
    pub diagnostics: Vec<Diagnostics>,
    pub steps: usize,
    pub dt: f64,
    /// Largest `max|div u| / rms(u)` over every step taken.
    pub max_div_ratio: f64,
}

fn div_ratio(d: &Diagnostics) -> f64 {
    if d.rms_u > 0.0 {
        d.max_div_u / d.rms_u
    } else {
        0.0
    }
}

impl Trajectory {
    pub fn write_diagnostics<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", Diagnostics::CSV_HEADER)?;
        for d in &self.diagnostics {
            writeln!(w, "{}", d.csv_row())?;
        }
        Ok(())
    }

    pub fn save_diagnostics(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_diagnostics(std::io::BufWriter::new(f))
    }
}

/// Frozen perturbation and force of a configuration, as suppliers and as
/// sampled histories on the output grid.
pub struct Drives {
    pub a: SpectralSnapshot,
    pub f: SpectralSnapshot,
}

impl Drives {
    pub fn from_config(cfg: &SolverConfig) -> Result<Drives> {
        Ok(Drives {
            a: cfg.perturbation_field()?,
            f: cfg.force_field()?,
        })
    }

    pub fn a_history(&self, grid: &Grid) -> FrozenField {
        FrozenField::new(*grid, 3, self.a.to_real())
    }

    pub fn f_history(&self, grid: &Grid) -> FrozenField {
        FrozenField::new(*grid, 3, self.f.to_real())
    }
}

/// Integrate the configuration's own initial data and drives over `grid.T`.
pub fn simulate(cfg: &SolverConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let drives = Drives::from_config(cfg)?;
    let a = |_t: f64| Ok(drives.a.clone());
    let f = |_t: f64| Ok(drives.f.clone());
    run(cfg, cfg.initial_state()?, cfg.grid.t, &a, &f)
}

/// Integrate from `initial = (u0, omega0)` to `horizon`. Slices are stored
/// with the spacing of `cfg.grid`; each slice interval is split into equal
/// steps no longer than `cfg.dt`.
pub fn run(
    cfg: &SolverConfig,
    initial: (SpectralSnapshot, SpectralSnapshot),
    horizon: f64,
    a: Supplier,
    f: Supplier,
) -> Result<Trajectory> {
    if !(horizon >= 0.0) {
        return Err(Error::NegativeDuration(horizon));
    }
    let (mut u0, mut w0) = initial;
    cfg.band_limit(&mut u0);
    cfg.band_limit(&mut w0);
    let mut state = SolverState::new(0.0, u0, w0, cfg, a, f)?;
    if horizon == 0.0 {
        return Ok(Trajectory {
            history: None,
            diagnostics: vec![state.diagnostics],
            max_div_ratio: div_ratio(&state.diagnostics),
            final_state: state,
            steps: 0,
            dt: 0.0,
        });
    }
    let intervals = ((horizon / cfg.grid.dt()).round() as usize).max(1);
    let grid = Grid::new(cfg.grid.l, cfg.grid.nx, horizon, intervals + 1)?;
    let spacing = grid.dt();
    let sub = match cfg.dt {
        Some(dt) => (spacing / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize,
        None => 1,
    };
    let dt = spacing / sub as f64;
    let len = 3 * grid.points();
    let mut u = SpaceTimeField::zeros(grid, 3);
    let mut w = SpaceTimeField::zeros(grid, 3);
    let mut pr = SpaceTimeField::zeros(grid, 1);
    let mut diagnostics = Vec::with_capacity(grid.nt);
    let mut record = |n: usize, s: &SolverState| {
        u.slice_mut(n)[..len].copy_from_slice(&s.u.to_real());
        w.slice_mut(n)[..len].copy_from_slice(&s.omega.to_real());
        pr.slice_mut(n).copy_from_slice(&s.p.to_real());
    };
    record(0, &state);
    diagnostics.push(state.diagnostics);
    let mut steps = 0;
    let mut max_div_ratio = div_ratio(&state.diagnostics);
    for n in 1..grid.nt {
        for k in 0..sub {
            state = step(&state, cfg, dt, a, f)?;
            steps += 1;
            max_div_ratio = max_div_ratio.max(div_ratio(&state.diagnostics));
            if k + 1 == sub {
                // pin the slice time against drift
                state.t = grid.time(n);
                state.diagnostics.t = state.t;
            }
        }
        record(n, &state);
        diagnostics.push(state.diagnostics);
    }
    Ok(Trajectory {
        history: Some(History { u, omega: w, pressure: pr }),
        final_state: state,
        diagnostics,
        steps,
        dt,
        max_div_ratio,
    })
}
