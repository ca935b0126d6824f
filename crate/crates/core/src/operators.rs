//! Spectral differential operators and norms.
//!
//! All derivatives use the derivative wavevectors of [`Grid`]: physical
//! `k = (2*pi/L) * m` with the Nyquist bin of each axis set to zero, so every
//! operator maps Hermitian spectra to Hermitian spectra.

use num_complex::Complex64;

use crate::error::Result;
use crate::field::{SpectralVectorField, VectorField};
use crate::grid::Grid;

pub fn fft_forward(f: &VectorField) -> SpectralVectorField {
    SpectralVectorField::forward(f)
}

pub fn fft_inverse(f: &SpectralVectorField) -> Result<VectorField> {
    f.inverse()
}

#[inline]
fn i_times(z: Complex64) -> Complex64 {
    Complex64::new(-z.im, z.re)
}

/// `i k x F_k` applied in place of a fresh spectral field.
pub fn curl_spectral(f: &SpectralVectorField) -> SpectralVectorField {
    let g = *f.grid();
    let n = g.n();
    let kd = g.derivative_wavenumbers();
    let [fx, fy, fz] = f.modes();
    let mut out = [
        vec![Complex64::new(0.0, 0.0); g.len()],
        vec![Complex64::new(0.0, 0.0); g.len()],
        vec![Complex64::new(0.0, 0.0); g.len()],
    ];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let idx = (a * n + b) * n + c;
                let (kx, ky, kz) = (kd[a], kd[b], kd[c]);
                out[0][idx] = i_times(fz[idx] * ky - fy[idx] * kz);
                out[1][idx] = i_times(fx[idx] * kz - fz[idx] * kx);
                out[2][idx] = i_times(fy[idx] * kx - fx[idx] * ky);
            }
        }
    }
    SpectralVectorField::new(g, out).expect("shape preserved")
}

/// Vorticity `omega = curl u`, computed spectrally.
pub fn curl(u: &VectorField) -> Result<VectorField> {
    curl_spectral(&fft_forward(u)).inverse()
}

/// Velocity recovered from vorticity together with the mean that had to be
/// projected out first.
#[derive(Debug, Clone)]
pub struct BiotSavart {
    pub velocity: VectorField,
    /// Per-component mean of the input that was discarded (zero for a curl).
    pub removed_mean: [f64; 3],
}

impl BiotSavart {
    pub fn mean_was_removed(&self) -> bool {
        self.removed_mean.iter().any(|m| *m != 0.0)
    }
}

/// Spectral Biot-Savart inversion `u_k = i k x omega_k / |k|^2`.
///
/// Modes whose derivative wavevector vanishes (the mean and pure-Nyquist
/// bins) carry no velocity.
pub fn biot_savart_spectral(omega: &SpectralVectorField) -> SpectralVectorField {
    let g = *omega.grid();
    let n = g.n();
    let kd = g.derivative_wavenumbers();
    let mut u = curl_spectral(omega);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let idx = (a * n + b) * n + c;
                let k2 = kd[a] * kd[a] + kd[b] * kd[b] + kd[c] * kd[c];
                let inv = if k2 > 0.0 { 1.0 / k2 } else { 0.0 };
                for j in 0..3 {
                    u.component_mut(j)[idx] *= inv;
                }
            }
        }
    }
    u
}

pub fn biot_savart(omega: &VectorField) -> Result<BiotSavart> {
    let spec = fft_forward(omega);
    let norm = 1.0 / omega.grid().len() as f64;
    let removed_mean = [0, 1, 2].map(|j| spec.component(j)[0].re * norm);
    if removed_mean.iter().any(|m| m.abs() > 0.0) {
        log::warn!("biot_savart: projecting out nonzero vorticity mean {removed_mean:?}");
    }
    let velocity = biot_savart_spectral(&spec).inverse()?;
    Ok(BiotSavart { velocity, removed_mean })
}

/// Leray projector `P_k = I - k k^T / |k|^2`, in place.
pub fn leray_project(f: &mut SpectralVectorField) {
    let g = *f.grid();
    let n = g.n();
    let kd = g.derivative_wavenumbers();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let idx = (a * n + b) * n + c;
                let k = [kd[a], kd[b], kd[c]];
                let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                if k2 == 0.0 {
                    continue;
                }
                let dot = (0..3).fold(Complex64::new(0.0, 0.0), |s, j| s + f.component(j)[idx] * k[j]);
                let scale = dot / k2;
                for (j, kj) in k.iter().enumerate() {
                    f.component_mut(j)[idx] -= scale * *kj;
                }
            }
        }
    }
}

/// Zeroes every mode with an axis mode number above `n/3`.
pub fn dealias(f: &mut SpectralVectorField) {
    let g = *f.grid();
    let mask = dealias_mask(&g);
    for j in 0..3 {
        for (z, keep) in f.component_mut(j).iter_mut().zip(&mask) {
            if !keep {
                *z = Complex64::new(0.0, 0.0);
            }
        }
    }
}

pub fn dealias_mask(g: &Grid) -> Vec<bool> {
    let n = g.n();
    let mut mask = Vec::with_capacity(g.len());
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                mask.push(g.keeps_mode(a, b, c));
            }
        }
    }
    mask
}

/// Component-max norm: `max_x max_j |f_j(x)|`.
///
/// This is the single definition of `||.||_inf` used throughout the crate.
pub fn max_norm(f: &VectorField) -> f64 {
    f.components()
        .iter()
        .flat_map(|c| c.iter())
        .fold(0.0, |m, v| m.max(v.abs()))
}

/// Discrete `L^2` norm with volume weight `spacing^3`. Summation order fixed.
pub fn l2_norm(f: &VectorField) -> f64 {
    let mut s = 0.0;
    for c in f.components() {
        for v in c {
            s += v * v;
        }
    }
    (s * f.grid().cell_volume()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn max_diff(a: &VectorField, b: &VectorField) -> f64 {
        (0..3)
            .flat_map(|j| a.component(j).iter().zip(b.component(j)).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    fn random_field(g: Grid, seed: u64) -> VectorField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        VectorField::new(g, [0, 1, 2].map(|_| (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()))
            .unwrap()
    }

    fn abc(a: f64, b: f64, c: f64) -> impl Fn([f64; 3]) -> [f64; 3] {
        move |p: [f64; 3]| {
            let (x, y, z) = (p[0], p[1], p[2]);
            [a * z.sin() + c * y.cos(), b * x.sin() + a * z.cos(), c * y.sin() + b * x.cos()]
        }
    }

    #[test]
    fn curl_of_constant_vanishes() {
        let g = Grid::new(8, 2.0).unwrap();
        let u = VectorField::from_fn(g, |_| [1.5, -2.0, 0.25]).unwrap();
        assert!(max_norm(&curl(&u).unwrap()) < 1e-14);
    }

    #[test]
    fn curl_of_taylor_green() {
        let g = Grid::periodic_2pi(16).unwrap();
        let u = VectorField::from_fn(g, |p| {
            [p[0].cos() * p[1].sin(), -p[0].sin() * p[1].cos(), 0.0]
        })
        .unwrap();
        // d/dx(-sin x cos y) - d/dy(cos x sin y) = -2 cos x cos y
        let expected = VectorField::from_fn(g, |p| [0.0, 0.0, -2.0 * p[0].cos() * p[1].cos()]).unwrap();
        assert!(max_diff(&curl(&u).unwrap(), &expected) < 1e-13);
    }

    #[test]
    fn abc_flow_is_beltrami() {
        let g = Grid::periodic_2pi(16).unwrap();
        let u = VectorField::from_fn(g, abc(1.0, 0.7, 0.4)).unwrap();
        assert!(max_diff(&curl(&u).unwrap(), &u) < 1e-13);
    }

    #[test]
    fn biot_savart_of_zero_and_abc() {
        let g = Grid::periodic_2pi(16).unwrap();
        let z = biot_savart(&VectorField::zeros(g)).unwrap();
        assert_eq!(max_norm(&z.velocity), 0.0);
        assert!(!z.mean_was_removed());

        let u = VectorField::from_fn(g, abc(1.0, 0.7, 0.4)).unwrap();
        let back = biot_savart(&u).unwrap();
        assert!(max_diff(&back.velocity, &u) < 1e-10);
    }

    #[test]
    fn biot_savart_reports_projected_mean() {
        let g = Grid::periodic_2pi(8).unwrap();
        let w = VectorField::from_fn(g, |p| [p[1].sin() + 0.5, 0.0, 0.0]).unwrap();
        let r = biot_savart(&w).unwrap();
        assert!(r.mean_was_removed());
        assert!((r.removed_mean[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn curl_inverts_biot_savart_on_random_solenoidal_fields() {
        let g = Grid::new(32, 1.7).unwrap();
        for seed in 0..3 {
            // A curl is solenoidal and mean-free.
            let w = curl(&random_field(g, seed)).unwrap();
            let u = biot_savart(&w).unwrap().velocity;
            let back = curl(&u).unwrap();
            assert!(max_diff(&back, &w) <= 1e-10 * max_norm(&w));
            let div = fft_forward(&u).max_divergence();
            assert!(div <= 1e-12 * max_norm(&w), "div = {div}");
        }
    }

    #[test]
    fn leray_projection_is_idempotent_and_solenoidal() {
        let g = Grid::new(8, 1.0).unwrap();
        let mut s = fft_forward(&random_field(g, 4));
        leray_project(&mut s);
        assert!(s.max_divergence() < 1e-14);
        let once = s.clone();
        leray_project(&mut s);
        for j in 0..3 {
            for (a, b) in s.component(j).iter().zip(once.component(j)) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn max_norm_examples() {
        let g = Grid::new(16, 3.0).unwrap();
        assert_eq!(max_norm(&VectorField::zeros(g)), 0.0);
        let f = VectorField::from_fn(g, |p| [2.0 * (2.0 * PI * p[0] / 3.0).sin(), 0.0, 0.0]).unwrap();
        assert_eq!(max_norm(&f), 2.0);

        let g = Grid::periodic_2pi(64).unwrap();
        let tg = VectorField::from_fn(g, |p| {
            [p[0].cos() * p[1].sin(), -p[0].sin() * p[1].cos(), 0.0]
        })
        .unwrap();
        assert!((max_norm(&tg) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn l2_norm_examples() {
        let g = Grid::periodic_2pi(16).unwrap();
        assert_eq!(l2_norm(&VectorField::zeros(g)), 0.0);
        let one = VectorField::from_fn(g, |_| [1.0, 0.0, 0.0]).unwrap();
        let expect = (2.0 * PI).powf(1.5);
        assert!((l2_norm(&one) - expect).abs() < 1e-12 * expect);
        let s = VectorField::from_fn(g, |p| [p[0].sin(), 0.0, 0.0]).unwrap();
        assert!((l2_norm(&s) - expect / 2f64.sqrt()).abs() < 1e-12 * expect);
    }

    #[test]
    fn parseval_holds_on_random_fields() {
        let g = Grid::new(16, 2.3).unwrap();
        for seed in 0..4 {
            let f = random_field(g, 100 + seed);
            let real = l2_norm(&f).powi(2);
            let spec = fft_forward(&f).l2_norm_sqr();
            assert!((real - spec).abs() <= 1e-10 * real);
        }
    }

    #[test]
    fn round_trip_is_tight_on_32_cube() {
        let g = Grid::new(32, 1.0).unwrap();
        let f = random_field(g, 9);
        let back = fft_inverse(&fft_forward(&f)).unwrap();
        assert!(max_diff(&back, &f) < 1e-12 * max_norm(&f));
    }
}
