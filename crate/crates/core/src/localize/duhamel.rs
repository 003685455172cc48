//! Time-discrete Duhamel integrals `D(t) = int_0^t exp((t - s) kappa lap) R(s) ds`
//! with `R` interpolated linearly between slices and the heat kernel integrated
//! exactly per Fourier mode.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{SpectralContext, SpectralSnapshot};

/// `(1 - e^{-z}) / z` and `(1 - e^{-z}(1 + z)) / z^2`.
pub fn phi_weights(z: f64) -> (f64, f64) {
    if z < 1e-4 {
        let phi1 = 1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0;
        let psi2 = 0.5 - z / 3.0 + z * z / 8.0 - z * z * z / 30.0;
        (phi1, psi2)
    } else {
        let e = (-z).exp();
        ((1.0 - e) / z, (1.0 - e * (1.0 + z)) / (z * z))
    }
}

/// Per-mode weights of `D_{n+1} = E D_n + w0 R_n + w1 R_{n+1}`.
struct ModeWeights {
    decay: Vec<f64>,
    w0: Vec<f64>,
    w1: Vec<f64>,
}

impl ModeWeights {
    fn new(ctx: &SpectralContext, dt: f64, diffusivity: f64) -> ModeWeights {
        let p = ctx.points();
        let mut decay = Vec::with_capacity(p);
        let mut w0 = Vec::with_capacity(p);
        let mut w1 = Vec::with_capacity(p);
        for i in 0..p {
            let z = diffusivity * ctx.k2(i) * dt;
            let (phi1, psi2) = phi_weights(z);
            decay.push((-z).exp());
            w0.push(dt * psi2);
            w1.push(dt * phi1 - dt * psi2);
        }
        ModeWeights { decay, w0, w1 }
    }
}

/// Streams sources slice by slice and yields `D_n` after each push.
pub struct DuhamelStepper {
    ctx: Arc<SpectralContext>,
    weights: ModeWeights,
    state: Option<(SpectralSnapshot, SpectralSnapshot)>,
}

impl DuhamelStepper {
    pub fn new(ctx: &Arc<SpectralContext>, dt: f64, diffusivity: f64) -> Result<DuhamelStepper> {
        if !(dt > 0.0) {
            return Err(Error::NegativeDuration(dt));
        }
        if !(diffusivity >= 0.0 && diffusivity.is_finite()) {
            return Err(Error::Config(format!("diffusivity {diffusivity} must be nonnegative")));
        }
        Ok(DuhamelStepper {
            ctx: ctx.clone(),
            weights: ModeWeights::new(ctx, dt, diffusivity),
            state: None,
        })
    }

    /// Feeds `R_n` and returns `D_n`; `D_0 = 0`.
    pub fn push(&mut self, source: SpectralSnapshot) -> Result<SpectralSnapshot> {
        if !Arc::ptr_eq(source.context(), &self.ctx) {
            return Err(Error::Shape("source lives on a different grid".into()));
        }
        let next = match self.state.take() {
            None => SpectralSnapshot::zeros(&self.ctx, source.comps()),
            Some((d, r)) => {
                if r.comps() != source.comps() {
                    return Err(Error::Shape("source component count changed".into()));
                }
                let p = self.ctx.points();
                let w = &self.weights;
                let mut out = d;
                let data = out.coefficients_mut();
                let (rp, rn) = (r.coefficients(), source.coefficients());
                for (i, v) in data.iter_mut().enumerate() {
                    let m = i % p;
                    *v = *v * w.decay[m] + rp[i] * w.w0[m] + rn[i] * w.w1[m];
                }
                out
            }
        };
        self.state = Some((next.clone(), source));
        Ok(next)
    }
}

/// Duhamel integral of a whole history of spectral sources.
pub fn duhamel(sources: &[SpectralSnapshot], dt: f64, diffusivity: f64) -> Result<Vec<SpectralSnapshot>> {
    let first = sources.first().ok_or_else(|| Error::Shape("empty source history".into()))?;
    let mut stepper = DuhamelStepper::new(first.context(), dt, diffusivity)?;
    sources.iter().map(|s| stepper.push(s.clone())).collect()
}
