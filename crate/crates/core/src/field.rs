//! Real-space and Fourier-space field containers.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::Grid;

fn check_finite(what: &'static str, data: &[f64]) -> Result<()> {
    match data.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { what, index }),
        None => Ok(()),
    }
}

/// `n^3` real samples on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {}",
                data.len(),
                grid.len()
            )));
        }
        check_finite("scalar field", &data)?;
        Ok(Self { grid, data })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, data: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        let data = (0..grid.len()).map(|idx| f(grid.position(idx))).collect();
        Self::new(grid, data)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Positive part `max(f, 0)`.
    pub fn positive_part(&self) -> ScalarField {
        Self { grid: self.grid, data: self.data.iter().map(|v| v.max(0.0)).collect() }
    }

    /// Negative part `-min(f, 0)`, itself nonnegative.
    pub fn negative_part(&self) -> ScalarField {
        Self { grid: self.grid, data: self.data.iter().map(|v| (-v).max(0.0)).collect() }
    }
}

/// Three real components on a shared grid (velocity or vorticity).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    components: [Vec<f64>; 3],
}

impl VectorField {
    pub fn new(grid: Grid, components: [Vec<f64>; 3]) -> Result<Self> {
        for c in &components {
            if c.len() != grid.len() {
                return Err(Error::GridMismatch(format!(
                    "component of {} samples for a grid of {}",
                    c.len(),
                    grid.len()
                )));
            }
            check_finite("vector field", c)?;
        }
        Ok(Self { grid, components })
    }

    pub fn zeros(grid: Grid) -> Self {
        let z = vec![0.0; grid.len()];
        Self { grid, components: [z.clone(), z.clone(), z] }
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Result<Self> {
        let mut components = [
            Vec::with_capacity(grid.len()),
            Vec::with_capacity(grid.len()),
            Vec::with_capacity(grid.len()),
        ];
        for idx in 0..grid.len() {
            let v = f(grid.position(idx));
            for (c, x) in components.iter_mut().zip(v) {
                c.push(x);
            }
        }
        Self::new(grid, components)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn component(&self, j: usize) -> &[f64] {
        &self.components[j]
    }

    pub fn components(&self) -> &[Vec<f64>; 3] {
        &self.components
    }

    pub fn into_components(self) -> [Vec<f64>; 3] {
        self.components
    }

    pub fn scalar(&self, j: usize) -> ScalarField {
        ScalarField { grid: self.grid, data: self.components[j].clone() }
    }

    pub fn scaled(&self, c: f64) -> VectorField {
        let components = self.components.clone().map(|v| v.into_iter().map(|x| x * c).collect());
        Self { grid: self.grid, components }
    }

    /// Sample at grid point `idx` as a vector.
    pub fn at(&self, idx: usize) -> [f64; 3] {
        [self.components[0][idx], self.components[1][idx], self.components[2][idx]]
    }
}

/// Fourier coefficients of a real vector field.
///
/// Modes are stored unnormalized, exactly as produced by the forward FFT, on
/// the full `n^3` index cube. The physical wavevector of bin `(a, b, c)` is
/// `(2*pi/L) * (mode_number(a), mode_number(b), mode_number(c))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralVectorField {
    grid: Grid,
    modes: [Vec<Complex64>; 3],
}

impl SpectralVectorField {
    pub fn new(grid: Grid, modes: [Vec<Complex64>; 3]) -> Result<Self> {
        for m in &modes {
            if m.len() != grid.len() {
                return Err(Error::GridMismatch(format!(
                    "{} modes for a grid of {}",
                    m.len(),
                    grid.len()
                )));
            }
        }
        Ok(Self { grid, modes })
    }

    pub fn zeros(grid: Grid) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self { grid, modes: [z.clone(), z.clone(), z] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn component(&self, j: usize) -> &[Complex64] {
        &self.modes[j]
    }

    pub fn component_mut(&mut self, j: usize) -> &mut [Complex64] {
        &mut self.modes[j]
    }

    pub fn modes(&self) -> &[Vec<Complex64>; 3] {
        &self.modes
    }

    pub fn into_modes(self) -> [Vec<Complex64>; 3] {
        self.modes
    }

    /// Forward transform of a real field (three real transforms in two FFTs).
    pub fn forward(field: &VectorField) -> Self {
        let plan = fft::plan(field.grid());
        let c = field.components();
        let (m0, m1) = plan.forward_real_pair(&c[0], &c[1]);
        let m2 = plan.forward_real(&c[2]);
        Self { grid: *field.grid(), modes: [m0, m1, m2] }
    }

    /// Inverse transform; fails if the modes hold non-finite values.
    pub fn inverse(&self) -> Result<VectorField> {
        let plan = fft::plan(&self.grid);
        let (c0, c1) = plan.inverse_real_pair(&self.modes[0], &self.modes[1]);
        let c2 = plan.inverse_real(&self.modes[2]);
        VectorField::new(self.grid, [c0, c1, c2])
    }

    /// `sum_k w(|k|^2) |c_k|^2` over all modes and components, with `c_k` the
    /// normalized coefficient. Summation order is fixed.
    pub fn weighted_sum(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let g = &self.grid;
        let n = g.n();
        let k = g.wavenumbers();
        let norm = 1.0 / (g.len() as f64);
        let mut total = 0.0;
        for a in 0..n {
            for b in 0..n {
                let kab = k[a] * k[a] + k[b] * k[b];
                for c in 0..n {
                    let idx = (a * n + b) * n + c;
                    let w = weight(kab + k[c] * k[c]);
                    let mut s = 0.0;
                    for m in &self.modes {
                        s += (m[idx] * norm).norm_sqr();
                    }
                    total += w * s;
                }
            }
        }
        total
    }

    /// `||f||_2^2` through Parseval.
    pub fn l2_norm_sqr(&self) -> f64 {
        self.grid.volume() * self.weighted_sum(|_| 1.0)
    }

    /// Largest `|k . c_k|` over all modes (normalized coefficients, derivative
    /// wavevectors), i.e. the spectral divergence residual.
    pub fn max_divergence(&self) -> f64 {
        let g = &self.grid;
        let n = g.n();
        let kd = g.derivative_wavenumbers();
        let norm = 1.0 / (g.len() as f64);
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let idx = (a * n + b) * n + c;
                    let d = self.modes[0][idx] * kd[a]
                        + self.modes[1][idx] * kd[b]
                        + self.modes[2][idx] * kd[c];
                    worst = worst.max(d.norm() * norm);
                }
            }
        }
        worst
    }

    /// Largest normalized coefficient modulus with some axis mode number above
    /// the two-thirds cutoff.
    pub fn max_outside_dealias(&self) -> f64 {
        let g = &self.grid;
        let n = g.n();
        let norm = 1.0 / (g.len() as f64);
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if g.keeps_mode(a, b, c) {
                        continue;
                    }
                    let idx = (a * n + b) * n + c;
                    for m in &self.modes {
                        worst = worst.max(m[idx].norm() * norm);
                    }
                }
            }
        }
        worst
    }

    /// Largest asymmetry `|c_{-k} - conj(c_k)|` (zero for real fields).
    pub fn hermitian_defect(&self) -> f64 {
        let g = &self.grid;
        let n = g.n();
        let norm = 1.0 / (g.len() as f64);
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let idx = (a * n + b) * n + c;
                    let midx = (g.mirror(a) * n + g.mirror(b)) * n + g.mirror(c);
                    for m in &self.modes {
                        worst = worst.max((m[midx] - m[idx].conj()).norm() * norm);
                    }
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_non_finite_samples() {
        let g = Grid::new(4, 1.0).unwrap();
        let mut d = vec![0.0; g.len()];
        d[5] = f64::NAN;
        assert!(matches!(ScalarField::new(g, d.clone()), Err(Error::NonFinite { index: 5, .. })));
        let z = vec![0.0; g.len()];
        assert!(VectorField::new(g, [z.clone(), d, z]).is_err());
    }

    #[test]
    fn zero_field_has_zero_modes() {
        let g = Grid::new(8, 1.0).unwrap();
        let s = SpectralVectorField::forward(&VectorField::zeros(g));
        assert!(s.modes().iter().all(|m| m.iter().all(|z| z.norm() == 0.0)));
        assert_eq!(s.inverse().unwrap(), VectorField::zeros(g));
    }

    #[test]
    fn single_harmonic_has_two_modes() {
        let g = Grid::new(16, 3.0).unwrap();
        let f = VectorField::from_fn(g, |x| [(2.0 * PI * x[0] / 3.0).sin(), 0.0, 0.0]).unwrap();
        let s = SpectralVectorField::forward(&f);
        let n = g.n();
        let tol = 1e-12 * g.len() as f64;
        let mut nonzero = vec![];
        for comp in 0..3 {
            for (idx, z) in s.component(comp).iter().enumerate() {
                if z.norm() > tol {
                    nonzero.push((comp, g.unflatten(idx)));
                }
            }
        }
        assert_eq!(nonzero, vec![(0, (1, 0, 0)), (0, (n - 1, 0, 0))]);
        // sin = (e^{ix} - e^{-ix}) / 2i
        let c = s.component(0)[g.index(1, 0, 0)] / g.len() as f64;
        assert!((c - Complex64::new(0.0, -0.5)).norm() < 1e-14);
        let back = s.inverse().unwrap();
        for (a, b) in back.component(0).iter().zip(f.component(0)) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn parts_are_nonnegative_and_recompose() {
        let g = Grid::new(4, 1.0).unwrap();
        let f = ScalarField::from_fn(g, |x| (x[0] * 3.0).sin() - 0.2).unwrap();
        let p = f.positive_part();
        let m = f.negative_part();
        for i in 0..g.len() {
            assert!(p.data()[i] >= 0.0 && m.data()[i] >= 0.0);
            assert_eq!(p.data()[i] - m.data()[i], f.data()[i]);
        }
    }
}
