//! Initial conditions.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{SpectralVectorField, VectorField};
use crate::grid::Grid;
use crate::operators::{leray_project, max_norm};

/// Kida's high-symmetry vortex,
///
/// `u1 = sin x (cos 3y cos z - cos y cos 3z)` and its two cyclic
/// permutations, with coordinates scaled by `2*pi/L`.
pub fn init_kida(grid: &Grid) -> VectorField {
    let k0 = grid.k0();
    let kida = |a: f64, b: f64, c: f64| a.sin() * ((3.0 * b).cos() * c.cos() - b.cos() * (3.0 * c).cos());
    VectorField::from_fn(*grid, |p| {
        let (x, y, z) = (k0 * p[0], k0 * p[1], k0 * p[2]);
        [kida(x, y, z), kida(y, z, x), kida(z, x, y)]
    })
    .expect("trigonometric samples are finite")
}

/// Spectrum of the low-frequency noise field: random Hermitian coefficients
/// on `0 < |m| <= k_max` (integer mode vector `m`), Leray-projected and
/// scaled so the real-space component-max norm equals `amplitude`.
///
/// Every mode outside the shell is exactly zero.
pub fn lowfreq_noise_spectrum(
    grid: &Grid,
    seed: u64,
    k_max: usize,
    amplitude: f64,
) -> Result<SpectralVectorField> {
    let n = grid.n();
    if k_max < 1 || k_max > n / 4 {
        return Err(Error::InvalidParameter {
            name: "k_max",
            reason: format!("{k_max} outside [1, n/4 = {}]", n / 4),
        });
    }
    if !(amplitude.is_finite() && amplitude > 0.0) {
        return Err(Error::InvalidParameter {
            name: "amplitude",
            reason: format!("{amplitude} must be positive"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut modes = [
        vec![Complex64::new(0.0, 0.0); grid.len()],
        vec![Complex64::new(0.0, 0.0); grid.len()],
        vec![Complex64::new(0.0, 0.0); grid.len()],
    ];
    let kmax2 = (k_max * k_max) as i64;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let (ma, mb, mc) = (grid.mode_number(a), grid.mode_number(b), grid.mode_number(c));
                let m2 = ma * ma + mb * mb + mc * mc;
                if m2 == 0 || m2 > kmax2 {
                    continue;
                }
                let idx = grid.index(a, b, c);
                let mirror = grid.index(grid.mirror(a), grid.mirror(b), grid.mirror(c));
                // Draw once per conjugate pair, from the lower flat index.
                if mirror < idx {
                    continue;
                }
                for comp in modes.iter_mut() {
                    let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    comp[idx] = z;
                    comp[mirror] = z.conj();
                }
            }
        }
    }
    let mut spec = SpectralVectorField::new(*grid, modes)?;
    leray_project(&mut spec);
    let peak = max_norm(&spec.inverse()?);
    if peak == 0.0 {
        return Err(Error::InvalidParameter {
            name: "k_max",
            reason: "shell produced an identically zero field".into(),
        });
    }
    let scale = amplitude / peak;
    for j in 0..3 {
        for z in spec.component_mut(j) {
            *z *= scale;
        }
    }
    Ok(spec)
}

/// Real-space low-frequency noise field; see [`lowfreq_noise_spectrum`].
pub fn init_lowfreq_noise(grid: &Grid, seed: u64, k_max: usize, amplitude: f64) -> Result<VectorField> {
    lowfreq_noise_spectrum(grid, seed, k_max, amplitude)?.inverse()
}

/// Embedded two-dimensional Taylor-Green vortex `(cos x sin y, -sin x cos y, 0)`
/// with amplitude `amp`.
pub fn taylor_green(grid: &Grid, amp: f64) -> VectorField {
    let k0 = grid.k0();
    VectorField::from_fn(*grid, |p| {
        let (x, y) = (k0 * p[0], k0 * p[1]);
        [amp * x.cos() * y.sin(), -amp * x.sin() * y.cos(), 0.0]
    })
    .expect("trigonometric samples are finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{fft_forward, l2_norm};
    use std::f64::consts::PI;

    #[test]
    fn kida_is_solenoidal_and_vanishes_on_x_zero() {
        let g = Grid::periodic_2pi(32).unwrap();
        let u = init_kida(&g);
        let div = fft_forward(&u).max_divergence();
        assert!(div <= 1e-12 * max_norm(&u), "div = {div}");
        for j in 0..32 {
            for k in 0..32 {
                assert_eq!(u.component(0)[g.index(0, j, k)], 0.0);
            }
        }
    }

    #[test]
    fn kida_energy_matches_quadrature() {
        // Independent tensor-product midpoint quadrature of |u|^2 over the
        // 2*pi box; exact for these trigonometric polynomials (degree <= 8).
        let m = 24;
        let h = 2.0 * PI / m as f64;
        let mut q = 0.0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let (x, y, z) = ((i as f64 + 0.5) * h, (j as f64 + 0.5) * h, (k as f64 + 0.5) * h);
                    let f = |a: f64, b: f64, c: f64| {
                        a.sin() * ((3.0 * b).cos() * c.cos() - b.cos() * (3.0 * c).cos())
                    };
                    q += f(x, y, z).powi(2) + f(y, z, x).powi(2) + f(z, x, y).powi(2);
                }
            }
        }
        let quadrature_energy = 0.5 * q * h.powi(3);
        // Frozen: 3*pi^3.
        const KIDA_ENERGY: f64 = 93.018_830_040_899_46;
        assert!((quadrature_energy - KIDA_ENERGY).abs() < 1e-9);

        let g = Grid::periodic_2pi(32).unwrap();
        let e = 0.5 * l2_norm(&init_kida(&g)).powi(2);
        assert!((e - KIDA_ENERGY).abs() < 1e-9 * KIDA_ENERGY);
    }

    #[test]
    fn noise_is_deterministic_per_seed() {
        let g = Grid::new(16, 1.0).unwrap();
        let a = init_lowfreq_noise(&g, 7, 3, 0.5).unwrap();
        let b = init_lowfreq_noise(&g, 7, 3, 0.5).unwrap();
        let c = init_lowfreq_noise(&g, 8, 3, 0.5).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!((max_norm(&a) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn noise_support_and_divergence() {
        let g = Grid::new(16, 2.0).unwrap();
        let spec = lowfreq_noise_spectrum(&g, 1, 2, 1.0).unwrap();
        for idx in 0..g.len() {
            let (a, b, c) = g.unflatten(idx);
            let m2 = [a, b, c].iter().map(|&x| g.mode_number(x).pow(2)).sum::<i64>();
            if m2 == 0 || m2 > 4 {
                for j in 0..3 {
                    assert_eq!(spec.component(j)[idx], Complex64::new(0.0, 0.0));
                }
            }
        }
        assert!(spec.max_divergence() <= 1e-12);
        assert!(spec.hermitian_defect() == 0.0);
    }

    #[test]
    fn noise_rejects_out_of_range_kmax() {
        let g = Grid::new(16, 1.0).unwrap();
        assert!(init_lowfreq_noise(&g, 0, 0, 1.0).is_err());
        assert!(init_lowfreq_noise(&g, 0, 5, 1.0).is_err());
        assert!(init_lowfreq_noise(&g, 0, 4, 1.0).is_ok());
    }
}
