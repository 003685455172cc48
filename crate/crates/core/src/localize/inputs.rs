//! Shared inputs of the expansions and the four-term convective rewriting.

use crate::error::{Error, Result};
use crate::field::{FieldHistory, Grid, SpectralSnapshot};

use super::cutoff::Deriv;
use super::modulated::Modulated;

/// Velocity, micro-rotation, drift and force histories on one grid.
#[derive(Clone, Copy)]
pub struct FlowFields<'a> {
    pub u: &'a dyn FieldHistory,
    pub omega: &'a dyn FieldHistory,
    pub a: &'a dyn FieldHistory,
    pub f: &'a dyn FieldHistory,
}

impl<'a> FlowFields<'a> {
    pub fn grid(&self) -> Grid {
        *self.u.grid()
    }

    /// Same grid everywhere, three components, and `u`, `a`, `f` solenoidal
    /// on every slice.
    pub fn validate(&self) -> Result<()> {
        let g = self.grid();
        for (name, h) in self.named() {
            if *h.grid() != g {
                return Err(Error::Shape(format!("{name} lives on a different grid")));
            }
            if h.components() != 3 {
                return Err(Error::Shape(format!("{name} must have three components")));
            }
        }
        check_solenoidal(self.u, "u")?;
        check_solenoidal(self.a, "a")?;
        check_solenoidal(self.f, "f")
    }

    fn named(&self) -> [(&'static str, &'a dyn FieldHistory); 4] {
        [("u", self.u), ("omega", self.omega), ("a", self.a), ("f", self.f)]
    }
}

pub fn check_solenoidal(h: &dyn FieldHistory, name: &str) -> Result<()> {
    for n in 0..h.grid().nt {
        h.spectral_slice(n).require_solenoidal(&format!("{name} at slice {n}"))?;
    }
    Ok(())
}

/// The four pieces of `psi curl sum_j d_j F_j`:
/// `curl sum_j d_j(psi F_j)`, `curl sum_j (d_j psi) F_j`,
/// `sum_j d_j(grad psi x F_j)` and `sum_j (d_j grad psi) x F_j`.
/// The rewriting is `A - B - C + D`.
pub fn convective_pieces(f: &[SpectralSnapshot; 3]) -> Result<[Modulated; 4]> {
    let mut a = Modulated::empty(3);
    let mut b = Modulated::empty(3);
    let mut c = Modulated::empty(3);
    let mut d = Modulated::empty(3);
    for (j, fj) in f.iter().enumerate() {
        a.add_scaled(&Modulated::new(fj.clone()).partial(j)?, 1.0)?;
        b.add_scaled(&Modulated::with_deriv(Deriv::axis(j), fj.clone()), 1.0)?;
        for i in 0..3 {
            let cross = fj.unit_cross(i);
            c.add_scaled(&Modulated::with_deriv(Deriv::axis(i), cross.clone()).partial(j)?, 1.0)?;
            d.add_scaled(&Modulated::with_deriv(Deriv::axis(i).plus(j), cross), 1.0)?;
        }
    }
    Ok([a.curl()?, b.curl()?, c, d])
}

/// `(d_t psi + lap psi) F`.
pub fn heat_commutator(f: &SpectralSnapshot, time_coeff: f64, lap_coeff: f64) -> Modulated {
    let mut m = Modulated::with_deriv(Deriv::TIME, f.scaled(time_coeff));
    for k in 0..3 {
        let mut x = [0u8; 3];
        x[k] = 2;
        m.add_scaled(&Modulated::with_deriv(Deriv::space(x), f.clone()), lap_coeff)
            .expect("same component count");
    }
    m
}

/// `sum_j d_j((d_j psi) F)`.
pub fn gradient_commutator(f: &SpectralSnapshot) -> Result<Modulated> {
    let mut m = Modulated::empty(f.comps());
    for j in 0..3 {
        m.add_scaled(&Modulated::with_deriv(Deriv::axis(j), f.clone()).partial(j)?, 1.0)?;
    }
    Ok(m)
}
