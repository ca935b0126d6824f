//! Three-dimensional complex FFTs on the periodic grid.
//!
//! Normalization is fixed everywhere in the crate: the forward transform is
//! unnormalized, `F_k = sum_x f(x) exp(-i k.x)`, and the inverse divides by
//! `n^3`. The continuum Fourier-series coefficient is therefore `F_k / n^3`
//! and Parseval reads `||f||_2^2 = L^3 sum_k |F_k / n^3|^2`.
//!
//! Real fields are transformed two at a time by packing them into the real
//! and imaginary parts of one complex buffer.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

pub struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plan_cache() -> &'static Mutex<HashMap<usize, Arc<Fft3>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft3>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared plan for an `n^3` transform.
pub fn plan(grid: &Grid) -> Arc<Fft3> {
    let n = grid.n();
    let mut cache = plan_cache().lock().expect("fft plan cache poisoned");
    cache
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Fft3 {
                n,
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

impl Fft3 {
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward, None, false);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse, None, true);
        self.normalize(data);
    }

    /// Forward transform whose output is only needed on modes with every axis
    /// mode number `|m| <= cutoff`; all other modes are returned as zero.
    pub fn forward_banded(&self, data: &mut [Complex64], cutoff: i64) {
        self.transform(data, &self.forward, Some(cutoff), false);
        self.zero_outside(data, cutoff);
    }

    fn zero_outside(&self, data: &mut [Complex64], cutoff: i64) {
        let n = self.n;
        let band = self.band(cutoff);
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if !(band[a] && band[b] && band[c]) {
                        data[(a * n + b) * n + c] = Complex64::new(0.0, 0.0);
                    }
                }
            }
        }
    }

    /// Inverse transform of a spectrum supported on `|m| <= cutoff` per axis.
    /// The input must vanish outside the band.
    pub fn inverse_banded(&self, data: &mut [Complex64], cutoff: i64) {
        self.transform(data, &self.inverse, Some(cutoff), true);
        self.normalize(data);
    }

    fn normalize(&self, data: &mut [Complex64]) {
        let scale = 1.0 / (self.n * self.n * self.n) as f64;
        data.par_iter_mut().for_each(|z| *z *= scale);
    }

    fn band(&self, cutoff: i64) -> Vec<bool> {
        let n = self.n as i64;
        (0..n).map(|m| if m <= n / 2 { m } else { m - n }.abs() <= cutoff).collect()
    }

    /// Separable transform. With a band, the inverse skips lines that are
    /// identically zero on input and the forward skips lines whose output is
    /// discarded; the axis order is chosen so both prunings apply.
    fn transform(
        &self,
        data: &mut [Complex64],
        fft: &Arc<dyn Fft<f64>>,
        band: Option<i64>,
        inverse: bool,
    ) {
        let n = self.n;
        assert_eq!(data.len(), n * n * n, "buffer does not match the plan");
        let band = match band {
            Some(c) => self.band(c),
            None => vec![true; n],
        };
        if inverse {
            self.pass_k(data, fft, &band);
            self.pass_j(data, fft, &band);
            self.pass_i(data, fft);
        } else {
            self.pass_i(data, fft);
            self.pass_j(data, fft, &band);
            self.pass_k(data, fft, &band);
        }
    }

    // Axis 2 (contiguous): lines (a, b) with both indices in the band.
    fn pass_k(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>, band: &[bool]) {
        let n = self.n;
        data.par_chunks_mut(n * n).enumerate().for_each(|(a, slab)| {
            if !band[a] {
                return;
            }
            let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
            // Batch each maximal run of in-band lines into one call.
            let mut b = 0;
            while b < n {
                if !band[b] {
                    b += 1;
                    continue;
                }
                let start = b;
                while b < n && band[b] {
                    b += 1;
                }
                fft.process_with_scratch(&mut slab[start * n..b * n], &mut scratch);
            }
        });
    }

    // Axis 1: transpose each slab with `a` in the band, transform, transpose back.
    fn pass_j(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>, band: &[bool]) {
        let n = self.n;
        let zero = Complex64::new(0.0, 0.0);
        data.par_chunks_mut(n * n).enumerate().for_each_init(
            || (vec![zero; n * n], vec![zero; fft.get_inplace_scratch_len()]),
            |(plane, scratch), (a, slab)| {
                if !band[a] {
                    return;
                }
                transpose(slab, plane, n);
                fft.process_with_scratch(plane, scratch);
                transpose(plane, slab, n);
            },
        );
    }

    // Axis 0: one (i, k) plane per j at a time, always full.
    fn pass_i(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let mut plane = vec![Complex64::new(0.0, 0.0); n * n];
        let mut rows = vec![Complex64::new(0.0, 0.0); n * n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for j in 0..n {
            for (i, row) in rows.chunks_exact_mut(n).enumerate() {
                row.copy_from_slice(&data[(i * n + j) * n..(i * n + j + 1) * n]);
            }
            transpose(&rows, &mut plane, n);
            fft.process_with_scratch(&mut plane, &mut scratch);
            transpose(&plane, &mut rows, n);
            for (i, row) in rows.chunks_exact(n).enumerate() {
                data[(i * n + j) * n..(i * n + j + 1) * n].copy_from_slice(row);
            }
        }
    }

    /// Forward transform; with a band, out-of-band entries are left
    /// unspecified.
    fn forward_raw(&self, data: &mut [Complex64], band: Option<i64>) {
        self.transform(data, &self.forward, band, false);
    }

    /// Unnormalized inverse transform.
    fn inverse_raw(&self, data: &mut [Complex64], band: Option<i64>) {
        self.transform(data, &self.inverse, band, true);
    }

    /// Transform of one real field.
    pub fn forward_real(&self, a: &[f64]) -> Vec<Complex64> {
        self.forward_real_in(a, None)
    }

    pub fn forward_real_in(&self, a: &[f64], band: Option<i64>) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); a.len()];
        self.forward_real_into(a, band, &mut out);
        out
    }

    /// Writes the transform of `a` into `out`.
    pub fn forward_real_into(&self, a: &[f64], band: Option<i64>, out: &mut [Complex64]) {
        for (z, &x) in out.iter_mut().zip(a) {
            *z = Complex64::new(x, 0.0);
        }
        self.forward_raw(out, band);
        if let Some(c) = band {
            self.zero_outside(out, c);
        }
    }

    /// Transforms of two real fields from a single complex FFT.
    pub fn forward_real_pair(&self, a: &[f64], b: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        self.forward_real_pair_in(a, b, None)
    }

    pub fn forward_real_pair_in(
        &self,
        a: &[f64],
        b: &[f64],
        band: Option<i64>,
    ) -> (Vec<Complex64>, Vec<Complex64>) {
        let zero = Complex64::new(0.0, 0.0);
        let mut work = vec![zero; a.len()];
        let mut fa = vec![zero; a.len()];
        let mut fb = vec![zero; a.len()];
        self.forward_real_pair_into(a, b, band, &mut work, &mut fa, &mut fb);
        (fa, fb)
    }

    /// Buffer-reusing form of [`Fft3::forward_real_pair_in`]. With a band,
    /// only in-band entries of `fa` and `fb` are written.
    pub fn forward_real_pair_into(
        &self,
        a: &[f64],
        b: &[f64],
        band: Option<i64>,
        work: &mut [Complex64],
        fa: &mut [Complex64],
        fb: &mut [Complex64],
    ) {
        let n = self.n;
        for ((z, &x), &y) in work.iter_mut().zip(a).zip(b) {
            *z = Complex64::new(x, y);
        }
        self.forward_raw(work, band);
        let buf: &[Complex64] = work;
        let keep = match band {
            Some(c) => self.band(c),
            None => vec![true; n],
        };
        fa.par_chunks_mut(n * n)
            .zip(fb.par_chunks_mut(n * n))
            .enumerate()
            .for_each(|(i, (sa, sb))| {
                if !keep[i] {
                    return;
                }
                let mi = (n - i) % n;
                for j in 0..n {
                    if !keep[j] {
                        continue;
                    }
                    let mj = (n - j) % n;
                    for k in 0..n {
                        if !keep[k] {
                            continue;
                        }
                        let mk = (n - k) % n;
                        let c = buf[(i * n + j) * n + k];
                        let cm = buf[(mi * n + mj) * n + mk].conj();
                        sa[j * n + k] = (c + cm) * 0.5;
                        // (c - cm) / (2i)
                        let d = c - cm;
                        sb[j * n + k] = Complex64::new(d.im * 0.5, -d.re * 0.5);
                    }
                }
            });
    }

    /// Real part of the inverse transform. Input must be Hermitian for the
    /// result to be the exact real field.
    pub fn inverse_real(&self, fa: &[Complex64]) -> Vec<f64> {
        self.inverse_real_in(fa, None)
    }

    pub fn inverse_real_in(&self, fa: &[Complex64], band: Option<i64>) -> Vec<f64> {
        let mut work = vec![Complex64::new(0.0, 0.0); fa.len()];
        let mut out = vec![0.0; fa.len()];
        self.inverse_real_into(fa, band, &mut work, &mut out);
        out
    }

    pub fn inverse_real_into(
        &self,
        fa: &[Complex64],
        band: Option<i64>,
        work: &mut [Complex64],
        out: &mut [f64],
    ) {
        work.copy_from_slice(fa);
        self.inverse_raw(work, band);
        let scale = 1.0 / work.len() as f64;
        for (o, z) in out.iter_mut().zip(work.iter()) {
            *o = z.re * scale;
        }
    }

    /// Two Hermitian spectra back to real space with a single complex FFT.
    pub fn inverse_real_pair(&self, fa: &[Complex64], fb: &[Complex64]) -> (Vec<f64>, Vec<f64>) {
        self.inverse_real_pair_in(fa, fb, None)
    }

    pub fn inverse_real_pair_in(
        &self,
        fa: &[Complex64],
        fb: &[Complex64],
        band: Option<i64>,
    ) -> (Vec<f64>, Vec<f64>) {
        let mut work = vec![Complex64::new(0.0, 0.0); fa.len()];
        let mut a = vec![0.0; fa.len()];
        let mut b = vec![0.0; fa.len()];
        self.inverse_real_pair_into(fa, fb, band, &mut work, &mut a, &mut b);
        (a, b)
    }

    pub fn inverse_real_pair_into(
        &self,
        fa: &[Complex64],
        fb: &[Complex64],
        band: Option<i64>,
        work: &mut [Complex64],
        a: &mut [f64],
        b: &mut [f64],
    ) {
        for ((z, x), y) in work.iter_mut().zip(fa).zip(fb) {
            *z = Complex64::new(x.re - y.im, x.im + y.re);
        }
        self.inverse_raw(work, band);
        let scale = 1.0 / work.len() as f64;
        for ((z, ra), rb) in work.iter().zip(a.iter_mut()).zip(b.iter_mut()) {
            *ra = z.re * scale;
            *rb = z.im * scale;
        }
    }
}

/// `dst[c * n + r] = src[r * n + c]` for an `n x n` block, in 8 x 8 tiles.
fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const T: usize = 8;
    for r0 in (0..n).step_by(T) {
        for c0 in (0..n).step_by(T) {
            for r in r0..(r0 + T).min(n) {
                let row = &src[r * n..(r + 1) * n];
                for c in c0..(c0 + T).min(n) {
                    dst[c * n + r] = row[c];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive_dft(n: usize, data: &[Complex64]) -> Vec<Complex64> {
        let tau = 2.0 * std::f64::consts::PI / n as f64;
        let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut s = Complex64::new(0.0, 0.0);
                    for i in 0..n {
                        for j in 0..n {
                            for k in 0..n {
                                let phase = -tau * ((a * i + b * j + c * k) % n) as f64;
                                s += data[(i * n + j) * n + k] * Complex64::from_polar(1.0, phase);
                            }
                        }
                    }
                    out[(a * n + b) * n + c] = s;
                }
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft() {
        let grid = Grid::new(6, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data: Vec<Complex64> = (0..grid.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let expected = naive_dft(6, &data);
        let mut got = data.clone();
        plan(&grid).forward(&mut got);
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).norm() < 1e-10);
        }
        plan(&grid).inverse(&mut got);
        for (g, d) in got.iter().zip(&data) {
            assert!((g - d).norm() < 1e-13);
        }
    }

    #[test]
    fn banded_transforms_agree_on_band_limited_data() {
        let grid = Grid::new(12, 1.0).unwrap();
        let p = plan(&grid);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let full = p.forward_real(&a);
        let banded = p.forward_real_in(&a, Some(4));
        for a_ in 0..12 {
            for b in 0..12 {
                for c in 0..12 {
                    let idx = grid.index(a_, b, c);
                    if grid.keeps_mode(a_, b, c) {
                        assert!((full[idx] - banded[idx]).norm() < 1e-12);
                    } else {
                        assert_eq!(banded[idx].norm(), 0.0);
                    }
                }
            }
        }
        let r1 = p.inverse_real(&banded);
        let r2 = p.inverse_real_in(&banded, Some(4));
        for (x, y) in r1.iter().zip(&r2) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn real_pair_packing_matches_single_transforms() {
        let grid = Grid::new(8, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let p = plan(&grid);
        let (fa, fb) = p.forward_real_pair(&a, &b);
        let fa1 = p.forward_real(&a);
        let fb1 = p.forward_real(&b);
        for i in 0..grid.len() {
            assert!((fa[i] - fa1[i]).norm() < 1e-12);
            assert!((fb[i] - fb1[i]).norm() < 1e-12);
        }
        let (ra, rb) = p.inverse_real_pair(&fa, &fb);
        for i in 0..grid.len() {
            assert!((ra[i] - a[i]).abs() < 1e-14);
            assert!((rb[i] - b[i]).abs() < 1e-14);
        }
    }
}
