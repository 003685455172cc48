use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform space-time grid on the periodic box `[0, L)^3` times `[0, T]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "Nx")]
    pub nx: usize,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "Nt")]
    pub nt: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            l: 2.0 * std::f64::consts::PI,
            nx: 32,
            t: 1.0,
            nt: 128,
        }
    }
}

impl Grid {
    pub fn new(l: f64, nx: usize, t: f64, nt: usize) -> Result<Grid> {
        let g = Grid { l, nx, t, nt };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 8 || self.nx % 2 != 0 {
            return Err(Error::Grid(format!("Nx = {} must be even and >= 8", self.nx)));
        }
        if self.nt < 2 {
            return Err(Error::Grid(format!("Nt = {} must be >= 2", self.nt)));
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(Error::Grid(format!("L = {} must be positive", self.l)));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::Grid(format!("T = {} must be positive", self.t)));
        }
        Ok(())
    }

    /// Spatial spacing.
    pub fn h(&self) -> f64 {
        self.l / self.nx as f64
    }

    /// Spacing between stored time slices.
    pub fn dt(&self) -> f64 {
        self.t / (self.nt - 1) as f64
    }

    pub fn points(&self) -> usize {
        self.nx * self.nx * self.nx
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt()
    }

    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    /// Flat spatial index with x fastest.
    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        (z * self.nx + y) * self.nx + x
    }

    /// Spatial coordinates of a flat index.
    #[inline]
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let n = self.nx;
        let h = self.h();
        [(idx % n) as f64 * h, ((idx / n) % n) as f64 * h, (idx / (n * n)) as f64 * h]
    }

    /// Quadrature weight of one space-time cell.
    pub fn cell_measure(&self) -> f64 {
        self.h().powi(3) * self.dt()
    }

    /// Same samples with the time axis cut to the first `nt` slices.
    pub fn with_slices(&self, nt: usize) -> Result<Grid> {
        Grid::new(self.l, self.nx, self.dt() * (nt as f64 - 1.0), nt)
    }

    /// Wavenumber scale `2 pi / L`.
    pub fn k0(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.l
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(Grid::new(1.0, 7, 1.0, 4).is_err());
        assert!(Grid::new(1.0, 6, 1.0, 4).is_err());
        assert!(Grid::new(1.0, 8, 1.0, 1).is_err());
        assert!(Grid::new(0.0, 8, 1.0, 4).is_err());
        assert!(Grid::new(1.0, 8, -1.0, 4).is_err());
        assert!(Grid::new(1.0, 8, 1.0, 2).is_ok());
    }

    #[test]
    fn json_uses_symbolic_names() {
        let g = Grid::default();
        let s = serde_json::to_string(&g).unwrap();
        assert!(s.contains("\"Nx\":32"));
        let back: Grid = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<Grid>(r#"{"L":1,"Nx":8,"T":1,"Nt":2,"bogus":1}"#).is_err());
    }
}
