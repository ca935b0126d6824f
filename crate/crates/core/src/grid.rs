//! Periodic cubic grid on the torus `[0, L)^3`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` samples per axis on a periodic box of side `length`.
///
/// Sample `(i, j, k)` sits at `x = (i, j, k) * spacing` and is stored at flat
/// index `(i * n + j) * n + k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: usize,
    length: f64,
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n = {n}: need an even sample count of at least 4"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("box length {length} must be positive")));
        }
        Ok(Self { n, length })
    }

    /// The `2*pi` box on which the analytic test flows live.
    pub fn periodic_2pi(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * PI)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.length
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    #[inline]
    pub fn volume(&self) -> f64 {
        self.length.powi(3)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn unflatten(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    pub fn position(&self, idx: usize) -> [f64; 3] {
        let (i, j, k) = self.unflatten(idx);
        let h = self.spacing();
        [i as f64 * h, j as f64 * h, k as f64 * h]
    }

    /// Signed integer wavenumber of FFT bin `m`; the Nyquist bin maps to `+n/2`.
    #[inline]
    pub fn mode_number(&self, m: usize) -> i64 {
        if m <= self.n / 2 {
            m as i64
        } else {
            m as i64 - self.n as i64
        }
    }

    /// Bin holding the wavenumber opposite to bin `m`.
    #[inline]
    pub fn mirror(&self, m: usize) -> usize {
        (self.n - m) % self.n
    }

    #[inline]
    pub fn is_nyquist(&self, m: usize) -> bool {
        m == self.n / 2
    }

    /// Fundamental wavenumber `2*pi/L`.
    #[inline]
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Physical wavenumber used by derivatives along one axis. The Nyquist bin
    /// has no real-valued derivative and is mapped to zero.
    pub fn derivative_wavenumbers(&self) -> Vec<f64> {
        (0..self.n)
            .map(|m| {
                if self.is_nyquist(m) {
                    0.0
                } else {
                    self.k0() * self.mode_number(m) as f64
                }
            })
            .collect()
    }

    /// Physical wavenumber magnitude per bin along one axis (Nyquist kept at `n/2`).
    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|m| self.k0() * self.mode_number(m) as f64).collect()
    }

    /// Largest retained mode number under the two-thirds rule.
    #[inline]
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n / 3) as i64
    }

    /// True when every axis index of the mode survives the two-thirds rule.
    #[inline]
    pub fn keeps_mode(&self, i: usize, j: usize, k: usize) -> bool {
        let c = self.dealias_cutoff();
        self.mode_number(i).abs() <= c
            && self.mode_number(j).abs() <= c
            && self.mode_number(k).abs() <= c
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "n = {}, L = {} vs n = {}, L = {}",
                self.n, self.length, other.n, other.length
            )))
        }
    }
}
