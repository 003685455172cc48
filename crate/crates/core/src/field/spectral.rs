//! Fourier representation of one time slice and the spectral calculus on it.
//!
//! Coefficients are normalized so that `f(x) = sum_k c_k exp(i k0 k.x)`.
//! First derivatives annihilate the Nyquist plane (its sign is ambiguous on an
//! even grid); the Laplacian and heat semigroup keep it, so `lap^{-1} lap` is
//! the identity on every zero-mean grid function.
//!
//! Products of band-limited fields are formed on a 3/2-padded grid and then
//! truncated to the modes `|k_i| < N/2`. The truncated product is exact, so it
//! commutes with spectral derivatives and the Leibniz rule holds to roundoff.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use super::fft::Fft3;
use crate::error::{Error, Result};

pub struct SpectralContext {
    n: usize,
    l: f64,
    fft: Fft3,
    pad: Fft3,
    /// Signed wavenumber times k0, Nyquist kept as -N/2.
    kval: Vec<f64>,
    /// Multiplier of one derivative along an axis (Nyquist zeroed).
    dval: Vec<f64>,
    signed: Vec<i64>,
}

type ContextKey = (usize, u64);

fn cache() -> &'static Mutex<HashMap<ContextKey, Arc<SpectralContext>>> {
    static CACHE: OnceLock<Mutex<HashMap<ContextKey, Arc<SpectralContext>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl SpectralContext {
    /// Shared context for an `n^3` box of side `l`.
    pub fn get(n: usize, l: f64) -> Arc<SpectralContext> {
        let key = (n, l.to_bits());
        let mut map = cache().lock().expect("spectral cache poisoned");
        map.entry(key)
            .or_insert_with(|| Arc::new(SpectralContext::build(n, l)))
            .clone()
    }

    fn build(n: usize, l: f64) -> SpectralContext {
        let k0 = 2.0 * std::f64::consts::PI / l;
        let signed: Vec<i64> = (0..n).map(|i| signed_index(i, n)).collect();
        let kval = signed.iter().map(|&k| k as f64 * k0).collect();
        let dval = signed
            .iter()
            .map(|&k| if k == -(n as i64) / 2 { 0.0 } else { k as f64 * k0 })
            .collect();
        SpectralContext {
            n,
            l,
            fft: Fft3::new(n),
            pad: Fft3::new(3 * n / 2),
            kval,
            dval,
            signed,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn points(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    fn split(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx % n, (idx / n) % n, idx / (n * n))
    }

    /// Derivative multipliers `(k_x, k_y, k_z)` of a flat spectral index.
    #[inline]
    pub fn dk(&self, idx: usize) -> [f64; 3] {
        let (x, y, z) = self.split(idx);
        [self.dval[x], self.dval[y], self.dval[z]]
    }

    /// `|k|^2` of a flat spectral index (Nyquist included).
    #[inline]
    pub fn k2(&self, idx: usize) -> f64 {
        let (x, y, z) = self.split(idx);
        self.kval[x] * self.kval[x] + self.kval[y] * self.kval[y] + self.kval[z] * self.kval[z]
    }

    /// Integer wavevector of a flat spectral index.
    #[inline]
    pub fn integer_k(&self, idx: usize) -> [i64; 3] {
        let (x, y, z) = self.split(idx);
        [self.signed[x], self.signed[y], self.signed[z]]
    }

    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let h = -(self.n as i64) / 2;
        let k = self.integer_k(idx);
        k.iter().any(|&v| v == h)
    }

    /// Real samples to normalized coefficients.
    pub fn forward(&self, real: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = real.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.forward(&mut buf);
        let s = 1.0 / self.points() as f64;
        for c in buf.iter_mut() {
            *c *= s;
        }
        buf
    }

    /// Normalized coefficients to real samples.
    pub fn backward(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let mut buf = coeffs.to_vec();
        self.fft.backward(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Samples of a band-limited component on the 3/2-padded grid.
    pub fn to_padded(&self, coeffs: &[Complex64]) -> Vec<f64> {
        let m = self.pad.n();
        let mut buf = vec![Complex64::default(); m * m * m];
        for (idx, c) in coeffs.iter().enumerate() {
            if self.is_nyquist(idx) {
                continue;
            }
            let k = self.integer_k(idx);
            let w = |v: i64| v.rem_euclid(m as i64) as usize;
            buf[(w(k[2]) * m + w(k[1])) * m + w(k[0])] = *c;
        }
        self.pad.backward(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Padded samples back to truncated coefficients (modes `|k_i| < N/2`).
    pub fn from_padded(&self, real: &[f64]) -> Vec<Complex64> {
        let m = self.pad.n();
        let mut buf: Vec<Complex64> = real.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.pad.forward(&mut buf);
        let s = 1.0 / (m * m * m) as f64;
        let mut out = vec![Complex64::default(); self.points()];
        for (idx, o) in out.iter_mut().enumerate() {
            if self.is_nyquist(idx) {
                continue;
            }
            let k = self.integer_k(idx);
            let w = |v: i64| v.rem_euclid(m as i64) as usize;
            *o = buf[(w(k[2]) * m + w(k[1])) * m + w(k[0])] * s;
        }
        out
    }
}

/// Signed wavenumber of FFT index `i` on `n` points; Nyquist maps to `-n/2`.
pub fn signed_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// One time slice in Fourier space: `comps` blocks of `N^3` coefficients.
#[derive(Clone)]
pub struct SpectralSnapshot {
    ctx: Arc<SpectralContext>,
    comps: usize,
    data: Vec<Complex64>,
}

impl std::fmt::Debug for SpectralSnapshot {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralSnapshot")
            .field("n", &self.ctx.n)
            .field("l", &self.ctx.l)
            .field("comps", &self.comps)
            .finish()
    }
}

const EPS_SOLENOIDAL: f64 = 1e-10;

impl SpectralSnapshot {
    pub fn zeros(ctx: &Arc<SpectralContext>, comps: usize) -> Self {
        SpectralSnapshot {
            ctx: ctx.clone(),
            comps,
            data: vec![Complex64::default(); comps * ctx.points()],
        }
    }

    /// Transform real samples laid out component-blocked, x fastest.
    pub fn from_real(ctx: &Arc<SpectralContext>, comps: usize, real: &[f64]) -> Self {
        let p = ctx.points();
        assert_eq!(real.len(), comps * p, "sample count mismatch");
        let mut data = Vec::with_capacity(comps * p);
        for c in 0..comps {
            data.extend(ctx.forward(&real[c * p..(c + 1) * p]));
        }
        SpectralSnapshot {
            ctx: ctx.clone(),
            comps,
            data,
        }
    }

    pub fn from_coefficients(ctx: &Arc<SpectralContext>, comps: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), comps * ctx.points());
        SpectralSnapshot {
            ctx: ctx.clone(),
            comps,
            data,
        }
    }

    pub fn to_real(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.data.len());
        for c in 0..self.comps {
            out.extend(self.ctx.backward(self.comp(c)));
        }
        out
    }

    pub fn context(&self) -> &Arc<SpectralContext> {
        &self.ctx
    }

    pub fn comps(&self) -> usize {
        self.comps
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.data
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn comp(&self, c: usize) -> &[Complex64] {
        let p = self.ctx.points();
        &self.data[c * p..(c + 1) * p]
    }

    pub fn comp_mut(&mut self, c: usize) -> &mut [Complex64] {
        let p = self.ctx.points();
        &mut self.data[c * p..(c + 1) * p]
    }

    /// Single component as a scalar snapshot.
    pub fn component(&self, c: usize) -> SpectralSnapshot {
        SpectralSnapshot::from_coefficients(&self.ctx, 1, self.comp(c).to_vec())
    }

    /// Stack scalar snapshots into a vector.
    pub fn stack(parts: &[&SpectralSnapshot]) -> SpectralSnapshot {
        let ctx = parts[0].ctx.clone();
        let mut data = Vec::with_capacity(parts.len() * ctx.points());
        for p in parts {
            assert_eq!(p.comps, 1);
            data.extend_from_slice(&p.data);
        }
        SpectralSnapshot {
            ctx,
            comps: parts.len(),
            data,
        }
    }

    /// Vector with `s` in component `axis` and zeros elsewhere.
    pub fn unit_embed(s: &SpectralSnapshot, axis: usize) -> SpectralSnapshot {
        let mut out = SpectralSnapshot::zeros(&s.ctx, 3);
        out.comp_mut(axis).copy_from_slice(&s.data);
        out
    }

    fn need(&self, comps: usize, op: &str) -> Result<()> {
        if self.comps != comps {
            return Err(Error::Shape(format!(
                "{op} needs {comps} component(s), got {}",
                self.comps
            )));
        }
        Ok(())
    }

    fn same_shape(&self, other: &SpectralSnapshot) {
        assert!(
            Arc::ptr_eq(&self.ctx, &other.ctx) && self.comps == other.comps,
            "snapshot shape mismatch"
        );
    }

    pub fn add_scaled(&mut self, other: &SpectralSnapshot, a: f64) {
        self.same_shape(other);
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += y * a;
        }
    }

    pub fn scaled(&self, a: f64) -> SpectralSnapshot {
        let mut out = self.clone();
        for x in out.data.iter_mut() {
            *x *= a;
        }
        out
    }

    /// Spatial mean of each component.
    pub fn means(&self) -> Vec<f64> {
        (0..self.comps).map(|c| self.comp(c)[0].re).collect()
    }

    /// `L^2` norm over the box (Parseval).
    pub fn l2_norm(&self) -> f64 {
        let vol = self.ctx.l.powi(3);
        (self.data.iter().map(|c| c.norm_sqr()).sum::<f64>() * vol).sqrt()
    }

    /// Partial derivative along `axis` of every component.
    pub fn partial(&self, axis: usize) -> SpectralSnapshot {
        let mut out = self.clone();
        let p = self.ctx.points();
        for (i, v) in out.data.iter_mut().enumerate() {
            let k = self.ctx.dk(i % p)[axis];
            *v *= Complex64::new(0.0, k);
        }
        out
    }

    pub fn curl(&self) -> Result<SpectralSnapshot> {
        self.need(3, "curl")?;
        let p = self.ctx.points();
        let mut out = SpectralSnapshot::zeros(&self.ctx, 3);
        for i in 0..p {
            let k = self.ctx.dk(i);
            let v = [self.data[i], self.data[p + i], self.data[2 * p + i]];
            let ik = |a: f64| Complex64::new(0.0, a);
            out.data[i] = ik(k[1]) * v[2] - ik(k[2]) * v[1];
            out.data[p + i] = ik(k[2]) * v[0] - ik(k[0]) * v[2];
            out.data[2 * p + i] = ik(k[0]) * v[1] - ik(k[1]) * v[0];
        }
        Ok(out)
    }

    pub fn divergence(&self) -> Result<SpectralSnapshot> {
        self.need(3, "divergence")?;
        let p = self.ctx.points();
        let mut out = SpectralSnapshot::zeros(&self.ctx, 1);
        for i in 0..p {
            let k = self.ctx.dk(i);
            out.data[i] = Complex64::new(0.0, 1.0)
                * (self.data[i] * k[0] + self.data[p + i] * k[1] + self.data[2 * p + i] * k[2]);
        }
        Ok(out)
    }

    pub fn gradient(&self) -> Result<SpectralSnapshot> {
        self.need(1, "gradient")?;
        let p = self.ctx.points();
        let mut out = SpectralSnapshot::zeros(&self.ctx, 3);
        for i in 0..p {
            let k = self.ctx.dk(i);
            for a in 0..3 {
                out.data[a * p + i] = Complex64::new(0.0, k[a]) * self.data[i];
            }
        }
        Ok(out)
    }

    pub fn laplacian(&self) -> SpectralSnapshot {
        let mut out = self.clone();
        let p = self.ctx.points();
        for (i, v) in out.data.iter_mut().enumerate() {
            *v *= -self.ctx.k2(i % p);
        }
        out
    }

    /// Inverse Laplacian. Returns the solution and the mean removed from each
    /// component. A nonzero mean is an error unless `project_mean` is set.
    pub fn inverse_laplacian(&self, project_mean: bool) -> Result<(SpectralSnapshot, Vec<f64>)> {
        let p = self.ctx.points();
        let means = self.means();
        if !project_mean {
            for c in 0..self.comps {
                let scale = self.comp(c).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if means[c].abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                    return Err(Error::MeanMode {
                        slice: 0,
                        mean: means[c],
                    });
                }
            }
        }
        let mut out = self.clone();
        for (i, v) in out.data.iter_mut().enumerate() {
            let m = i % p;
            if m == 0 {
                *v = Complex64::default();
            } else {
                *v /= -self.ctx.k2(m);
            }
        }
        Ok((out, means))
    }

    /// Removes the gradient part. Also returns the removed part's potential
    /// `g` with `v - P v = grad g`.
    pub fn leray_split(&self) -> Result<(SpectralSnapshot, SpectralSnapshot)> {
        self.need(3, "leray_project")?;
        let p = self.ctx.points();
        let mut out = self.clone();
        let mut pot = SpectralSnapshot::zeros(&self.ctx, 1);
        for i in 1..p {
            let k = self.ctx.dk(i);
            let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if kk == 0.0 {
                continue;
            }
            let dot = self.data[i] * k[0] + self.data[p + i] * k[1] + self.data[2 * p + i] * k[2];
            for a in 0..3 {
                out.data[a * p + i] -= dot * (k[a] / kk);
            }
            // grad g = k (k.v)/|k|^2  =>  i k g = k (k.v)/|k|^2
            pot.data[i] = dot / kk * Complex64::new(0.0, -1.0);
        }
        Ok((out, pot))
    }

    pub fn leray_project(&self) -> Result<SpectralSnapshot> {
        Ok(self.leray_split()?.0)
    }

    /// Heat semigroup `exp(tau * diffusivity * lap)`.
    pub fn heat_step(&self, tau: f64, diffusivity: f64) -> Result<SpectralSnapshot> {
        if tau < 0.0 || tau.is_nan() {
            return Err(Error::NegativeDuration(tau));
        }
        let mut out = self.clone();
        let p = self.ctx.points();
        for (i, v) in out.data.iter_mut().enumerate() {
            *v *= (-diffusivity * self.ctx.k2(i % p) * tau).exp();
        }
        Ok(out)
    }

    /// `e_axis x F` for a vector `F`.
    pub fn unit_cross(&self, axis: usize) -> SpectralSnapshot {
        assert_eq!(self.comps, 3);
        let mut out = SpectralSnapshot::zeros(&self.ctx, 3);
        let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
        // (e_a x F)_b = -F_c ... with (a, b, c) cyclic: (e_a x F)_b = -F_c, (e_a x F)_c = F_b
        let fb = self.comp(b).to_vec();
        let fc = self.comp(c).to_vec();
        for (o, v) in out.comp_mut(b).iter_mut().zip(&fc) {
            *o = -v;
        }
        out.comp_mut(c).copy_from_slice(&fb);
        out
    }

    /// Zero the Nyquist planes.
    pub fn drop_nyquist(&mut self) {
        let p = self.ctx.points();
        for i in 0..p {
            if self.ctx.is_nyquist(i) {
                for c in 0..self.comps {
                    self.data[c * p + i] = Complex64::default();
                }
            }
        }
    }

    /// Keep only modes with `max |k_i| <= kmax`.
    pub fn truncate_to(&mut self, kmax: i64) {
        let p = self.ctx.points();
        for i in 0..p {
            let k = self.ctx.integer_k(i);
            if k.iter().any(|v| v.abs() > kmax) {
                for c in 0..self.comps {
                    self.data[c * p + i] = Complex64::default();
                }
            }
        }
    }

    /// Largest `max_i |k_i|` carrying a coefficient above `tol`.
    pub fn bandwidth(&self, tol: f64) -> i64 {
        let p = self.ctx.points();
        let mut best = 0;
        for (i, v) in self.data.iter().enumerate() {
            if v.norm() > tol {
                let k = self.ctx.integer_k(i % p);
                best = best.max(k.iter().map(|x| x.abs()).max().unwrap_or(0));
            }
        }
        best
    }

    /// Maximum over the grid of `|div v|`.
    pub fn max_divergence(&self) -> Result<f64> {
        let d = self.divergence()?.to_real();
        Ok(d.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }

    /// Rejects vectors whose divergence exceeds `1e-10` of their RMS.
    pub fn require_solenoidal(&self, name: &str) -> Result<()> {
        let div = self.max_divergence()?;
        let rms = self.l2_norm() / self.ctx.l.powf(1.5);
        let tol = EPS_SOLENOIDAL * rms.max(1e-300);
        if div > tol && div > 1e-13 {
            return Err(Error::NotSolenoidal {
                name: name.to_string(),
                max_div: div,
                tolerance: tol,
            });
        }
        Ok(())
    }

    /// Samples of every component on the padded grid.
    pub fn padded(&self) -> Vec<Vec<f64>> {
        (0..self.comps).map(|c| self.ctx.to_padded(self.comp(c))).collect()
    }

    /// Truncated spectrum of padded samples.
    pub fn from_padded(ctx: &Arc<SpectralContext>, parts: &[Vec<f64>]) -> SpectralSnapshot {
        let mut data = Vec::with_capacity(parts.len() * ctx.points());
        for part in parts {
            data.extend(ctx.from_padded(part));
        }
        SpectralSnapshot {
            ctx: ctx.clone(),
            comps: parts.len(),
            data,
        }
    }

    /// Exact truncated product `P(b_j c)` for each `j`; `b` is a vector.
    pub fn outer(b: &SpectralSnapshot, c: &SpectralSnapshot) -> [SpectralSnapshot; 3] {
        assert_eq!(b.comps, 3);
        let pb = b.padded();
        let pc = c.padded();
        let ctx = &b.ctx;
        let make = |j: usize| {
            let parts: Vec<Vec<f64>> = pc
                .iter()
                .map(|cc| cc.iter().zip(&pb[j]).map(|(x, y)| x * y).collect())
                .collect();
            SpectralSnapshot::from_padded(ctx, &parts)
        };
        [make(0), make(1), make(2)]
    }

    /// Exact truncated `P((b . grad) c)`.
    pub fn convect(b: &SpectralSnapshot, c: &SpectralSnapshot) -> SpectralSnapshot {
        assert_eq!(b.comps, 3);
        let pb = b.padded();
        let grads: Vec<Vec<Vec<f64>>> = (0..3).map(|j| c.partial(j).padded()).collect();
        let parts: Vec<Vec<f64>> = (0..c.comps)
            .map(|a| {
                let mut acc = vec![0.0; pb[0].len()];
                for j in 0..3 {
                    for (o, (x, y)) in acc.iter_mut().zip(pb[j].iter().zip(&grads[j][a])) {
                        *o += x * y;
                    }
                }
                acc
            })
            .collect();
        SpectralSnapshot::from_padded(&b.ctx, &parts)
    }

    /// Exact truncated pointwise product of two scalars.
    pub fn times(a: &SpectralSnapshot, b: &SpectralSnapshot) -> SpectralSnapshot {
        assert_eq!(a.comps, 1);
        let pa = a.padded();
        let pb = b.padded();
        let parts: Vec<Vec<f64>> = pb
            .iter()
            .map(|v| v.iter().zip(&pa[0]).map(|(x, y)| x * y).collect())
            .collect();
        SpectralSnapshot::from_padded(&a.ctx, &parts)
    }

    /// Max absolute difference of coefficients.
    pub fn max_coeff_diff(&self, other: &SpectralSnapshot) -> f64 {
        self.same_shape(other);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

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

    #[test]
    fn curl_of_vertical_sine() {
        let ctx = SpectralContext::get(16, 2.0 * PI);
        let v = sample(&ctx, |x| [0.0, 0.0, x[0].sin()]);
        let c = v.curl().unwrap();
        let want = sample(&ctx, |x| [0.0, -x[0].cos(), 0.0]);
        assert!(c.max_coeff_diff(&want) < 1e-13);
    }

    #[test]
    fn padded_product_is_exact() {
        let ctx = SpectralContext::get(8, 2.0 * PI);
        // highest retained mode is 3; 3 + 3 = 6 folds away entirely
        let a = sample(&ctx, |x| [(3.0 * x[0]).cos(), x[1].sin(), 1.0]);
        let b = sample(&ctx, |x| [(3.0 * x[0]).cos(), (2.0 * x[2]).cos(), 0.5]);
        let prod = SpectralSnapshot::outer(&a, &b);
        // a_0 * b_0 = cos^2(3x) = 1/2 + cos(6x)/2, truncated to 1/2
        let want = 0.5;
        let r = prod[0].component(0).to_real();
        for v in r {
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_cross_matches_determinant() {
        let ctx = SpectralContext::get(8, 2.0 * PI);
        let f = sample(&ctx, |_| [1.0, 2.0, 3.0]);
        let e = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let fv = [1.0, 2.0, 3.0];
        for a in 0..3 {
            let got = f.unit_cross(a).means();
            let w = [
                e[a][1] * fv[2] - e[a][2] * fv[1],
                e[a][2] * fv[0] - e[a][0] * fv[2],
                e[a][0] * fv[1] - e[a][1] * fv[0],
            ];
            for c in 0..3 {
                assert!((got[c] - w[c]).abs() < 1e-14);
            }
        }
    }
}
