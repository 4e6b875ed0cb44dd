//! Centered discrete Fourier coefficients on the periodic box `[−L, L)²`.
//!
//! With `x_i = −L + i h`, a sampled symbol is `A_ij = Σ_k â_k e^{iκ k·X_ij}` for
//! `κ = π/L` and `k ∈ [−N/2, N/2)²`. Coefficient arrays are indexed by
//! `k + N/2` along each axis.

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub(crate) struct Plans {
    pub forward: Arc<dyn Fft<f64>>,
    pub inverse: Arc<dyn Fft<f64>>,
}

pub(crate) fn plans(n: usize) -> Plans {
    let mut planner = FftPlanner::new();
    Plans { forward: planner.plan_fft_forward(n), inverse: planner.plan_fft_inverse(n) }
}

fn transform_axes(a: &mut Array2<Complex64>, fft: &dyn Fft<f64>) {
    for axis in [Axis(1), Axis(0)] {
        for mut lane in a.lanes_mut(axis) {
            let mut buf: Vec<Complex64> = lane.iter().copied().collect();
            fft.process(&mut buf);
            for (dst, src) in lane.iter_mut().zip(buf) {
                *dst = src;
            }
        }
    }
}

fn sign(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Unnormalized two-dimensional forward transform `Σ_ij A_ij e^{−2πi(k·ij)/N}`.
pub fn fft2(samples: &Array2<Complex64>) -> Array2<Complex64> {
    let n = samples.nrows();
    let mut a = samples.clone();
    transform_axes(&mut a, plans(n).forward.as_ref());
    a
}

/// Centered coefficients `â_k` of the samples.
pub fn coefficients(samples: &Array2<Complex64>) -> Array2<Complex64> {
    let n = samples.nrows();
    let f = fft2(samples);
    let half = (n / 2) as i64;
    let norm = 1.0 / (n * n) as f64;
    Array2::from_shape_fn((n, n), |(a, b)| {
        let (kx, kxi) = (a as i64 - half, b as i64 - half);
        let src = (kx.rem_euclid(n as i64) as usize, kxi.rem_euclid(n as i64) as usize);
        f[src] * (sign(kx + kxi) * norm)
    })
}

/// Samples of `Σ_k ĉ_k e^{iκ k·X}` from centered coefficients.
pub fn synthesize(coeffs: &Array2<Complex64>) -> Array2<Complex64> {
    let n = coeffs.nrows();
    let half = (n / 2) as i64;
    let mut a = Array2::zeros((n, n));
    for ((i, j), c) in coeffs.indexed_iter() {
        let (kx, kxi) = (i as i64 - half, j as i64 - half);
        a[(kx.rem_euclid(n as i64) as usize, kxi.rem_euclid(n as i64) as usize)] = c * sign(kx + kxi);
    }
    transform_axes(&mut a, plans(n).inverse.as_ref());
    a
}

/// Multiply centered coefficients by `(iκk_x)^nx (iκk_ξ)^nxi`.
pub fn differentiate(coeffs: &Array2<Complex64>, kappa: f64, nx: u32, nxi: u32) -> Array2<Complex64> {
    let n = coeffs.nrows();
    let half = (n / 2) as i64;
    let mut out = coeffs.clone();
    for ((i, j), c) in out.indexed_iter_mut() {
        let kx = Complex64::new(0.0, kappa * (i as i64 - half) as f64);
        let kxi = Complex64::new(0.0, kappa * (j as i64 - half) as f64);
        *c *= kx.powu(nx) * kxi.powu(nxi);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_round_trip() {
        let n = 16;
        let a = Array2::from_shape_fn((n, n), |(i, j)| Complex64::new((i * 3 + j) as f64, (i as f64 - j as f64).sin()));
        let back = synthesize(&coefficients(&a));
        let err = (&back - &a).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn plane_wave_has_one_coefficient() {
        let (n, l) = (16usize, 3.0f64);
        let h = 2.0 * l / n as f64;
        let kappa = std::f64::consts::PI / l;
        let (kx, kxi) = (2i64, -3i64);
        let a = Array2::from_shape_fn((n, n), |(i, j)| {
            let (x, xi) = (-l + i as f64 * h, -l + j as f64 * h);
            Complex64::from_polar(1.0, kappa * (kx as f64 * x + kxi as f64 * xi))
        });
        let c = coefficients(&a);
        let idx = ((kx + 8) as usize, (kxi + 8) as usize);
        assert!((c[idx] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let total: f64 = c.iter().map(|z| z.norm()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
