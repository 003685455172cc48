//! Serial 3D complex FFT on cubes, built from rustfft line transforms.
//! Parallelism is applied one level up (slices, components).

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub struct Fft3 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    pub fn new(n: usize) -> Fft3 {
        let mut planner = FftPlanner::new();
        Fft3 {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Unnormalized forward transform, `sum_x f(x) e^{-i k x}`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.fwd);
    }

    /// Unnormalized inverse transform, `sum_k c_k e^{i k x}`.
    pub fn backward(&self, data: &mut [Complex64]) {
        self.run(data, &self.inv);
    }

    fn run(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n, "cube size mismatch");
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        // x lines are contiguous
        plan.process_with_scratch(data, &mut scratch);
        // y lines: transpose each z plane
        let mut plane = vec![Complex64::default(); n * n];
        for z in 0..n {
            let p = &mut data[z * n * n..(z + 1) * n * n];
            for y in 0..n {
                for x in 0..n {
                    plane[x * n + y] = p[y * n + x];
                }
            }
            plan.process_with_scratch(&mut plane, &mut scratch);
            for y in 0..n {
                for x in 0..n {
                    p[y * n + x] = plane[x * n + y];
                }
            }
        }
        // z lines: full transpose to (x, y) major
        let nn = n * n;
        let mut cube = vec![Complex64::default(); n * nn];
        for z in 0..n {
            for xy in 0..nn {
                cube[xy * n + z] = data[z * nn + xy];
            }
        }
        plan.process_with_scratch(&mut cube, &mut scratch);
        for z in 0..n {
            for xy in 0..nn {
                data[z * nn + xy] = cube[xy * n + z];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(data: &[Complex64], n: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); n * n * n];
        let w = -2.0 * std::f64::consts::PI / n as f64;
        for kz in 0..n {
            for ky in 0..n {
                for kx in 0..n {
                    let mut acc = Complex64::default();
                    for z in 0..n {
                        for y in 0..n {
                            for x in 0..n {
                                let ph = w * ((kx * x + ky * y + kz * z) % n) as f64;
                                acc += data[(z * n + y) * n + x] * Complex64::from_polar(1.0, ph);
                            }
                        }
                    }
                    out[(kz * n + ky) * n + kx] = acc;
                }
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft() {
        let n = 4;
        let data: Vec<Complex64> = (0..n * n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut fast = data.clone();
        Fft3::new(n).forward(&mut fast);
        let slow = naive(&data, n);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn roundtrip_scales_by_volume() {
        let n = 6;
        let f = Fft3::new(n);
        let data: Vec<Complex64> = (0..n * n * n).map(|i| Complex64::new(i as f64, 0.0)).collect();
        let mut d = data.clone();
        f.forward(&mut d);
        f.backward(&mut d);
        for (a, b) in d.iter().zip(&data) {
            assert!((a / (n * n * n) as f64 - b).norm() < 1e-9);
        }
    }
}
