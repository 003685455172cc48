//! Expressions `sum_alpha (d^alpha psi) F_alpha` kept in expanded form, so
//! derivatives of a cutoff times a band-limited field are exact: spatial
//! derivatives act on `F` spectrally and on `psi` analytically.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::field::SpectralSnapshot;

use super::cutoff::{CutoffSampler, Deriv};

#[derive(Clone, Debug)]
pub struct Modulated {
    comps: usize,
    terms: BTreeMap<Deriv, SpectralSnapshot>,
}

impl Modulated {
    /// `psi F`.
    pub fn new(f: SpectralSnapshot) -> Modulated {
        Modulated::with_deriv(Deriv::ZERO, f)
    }

    /// `(d^alpha psi) F`.
    pub fn with_deriv(alpha: Deriv, f: SpectralSnapshot) -> Modulated {
        let comps = f.comps();
        let mut terms = BTreeMap::new();
        terms.insert(alpha, f);
        Modulated { comps, terms }
    }

    pub fn empty(comps: usize) -> Modulated {
        Modulated {
            comps,
            terms: BTreeMap::new(),
        }
    }

    pub fn comps(&self) -> usize {
        self.comps
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn derivs(&self) -> impl Iterator<Item = &Deriv> {
        self.terms.keys()
    }

    fn push(&mut self, alpha: Deriv, f: SpectralSnapshot, a: f64) {
        match self.terms.get_mut(&alpha) {
            Some(existing) => existing.add_scaled(&f, a),
            None => {
                let f = if a == 1.0 { f } else { f.scaled(a) };
                self.terms.insert(alpha, f);
            }
        }
    }

    pub fn add_scaled(&mut self, other: &Modulated, a: f64) -> Result<()> {
        if other.comps != self.comps {
            return Err(Error::Shape(format!(
                "adding {}-component expression to {}-component one",
                other.comps, self.comps
            )));
        }
        for (alpha, f) in &other.terms {
            self.push(*alpha, f.clone(), a);
        }
        Ok(())
    }

    pub fn scaled(&self, a: f64) -> Modulated {
        let mut out = self.clone();
        for f in out.terms.values_mut() {
            *f = f.scaled(a);
        }
        out
    }

    fn map_each<F>(&self, comps: usize, mut f: F) -> Result<Modulated>
    where
        F: FnMut(&mut Modulated, Deriv, &SpectralSnapshot) -> Result<()>,
    {
        let mut out = Modulated::empty(comps);
        for (alpha, field) in &self.terms {
            f(&mut out, *alpha, field)?;
        }
        Ok(out)
    }

    pub fn partial(&self, k: usize) -> Result<Modulated> {
        self.map_each(self.comps, |out, alpha, f| {
            out.push(alpha, f.partial(k), 1.0);
            out.push(checked(alpha.plus(k))?, f.clone(), 1.0);
            Ok(())
        })
    }

    pub fn curl(&self) -> Result<Modulated> {
        self.need(3, "curl")?;
        self.map_each(3, |out, alpha, f| {
            out.push(alpha, f.curl()?, 1.0);
            for j in 0..3 {
                out.push(checked(alpha.plus(j))?, f.unit_cross(j), 1.0);
            }
            Ok(())
        })
    }

    pub fn divergence(&self) -> Result<Modulated> {
        self.need(3, "divergence")?;
        self.map_each(1, |out, alpha, f| {
            out.push(alpha, f.divergence()?, 1.0);
            for j in 0..3 {
                out.push(checked(alpha.plus(j))?, f.component(j), 1.0);
            }
            Ok(())
        })
    }

    pub fn gradient(&self) -> Result<Modulated> {
        self.need(1, "gradient")?;
        self.map_each(3, |out, alpha, f| {
            out.push(alpha, f.gradient()?, 1.0);
            for j in 0..3 {
                out.push(checked(alpha.plus(j))?, SpectralSnapshot::unit_embed(f, j), 1.0);
            }
            Ok(())
        })
    }

    pub fn laplacian(&self) -> Result<Modulated> {
        let mut out = Modulated::empty(self.comps);
        for k in 0..3 {
            out.add_scaled(&self.partial(k)?.partial(k)?, 1.0)?;
        }
        Ok(out)
    }

    fn need(&self, comps: usize, op: &str) -> Result<()> {
        if self.comps != comps {
            return Err(Error::Shape(format!(
                "{op} needs {comps} components, expression has {}",
                self.comps
            )));
        }
        Ok(())
    }

    /// Real samples at slice `n`, component-blocked.
    pub fn materialize(&self, sampler: &CutoffSampler, n: usize) -> Result<Vec<f64>> {
        let p = sampler.grid().points();
        let mut out = vec![0.0; self.comps * p];
        for (alpha, f) in &self.terms {
            let (tf, s) = sampler.parts(*alpha, n)?;
            if tf == 0.0 || s.iter().all(|v| *v == 0.0) {
                continue;
            }
            let real = f.to_real();
            for (o, chunk) in out.chunks_mut(p).zip(real.chunks(p)) {
                for ((o, v), w) in o.iter_mut().zip(chunk).zip(s) {
                    *o += tf * w * v;
                }
            }
        }
        Ok(out)
    }

    /// Spectrum of the materialized samples.
    pub fn to_spectral(&self, sampler: &CutoffSampler, n: usize) -> Result<SpectralSnapshot> {
        let g = sampler.grid();
        let ctx = crate::field::SpectralContext::get(g.nx, g.l);
        Ok(SpectralSnapshot::from_real(&ctx, self.comps, &self.materialize(sampler, n)?))
    }
}

fn checked(d: Deriv) -> Result<Deriv> {
    d.check()?;
    Ok(d)
}
