//! Ball fractions by spectral convolution, semi-mixedness and 3D sparseness scales.

use num_complex::Complex64;
use serde::Serialize;

use super::LevelSet;
use crate::error::{Error, Result};
use crate::fft;
use crate::field::ScalarField;
use crate::grid::Grid;

/// Discrete periodic ball: the grid offsets `o` with `|o| h <= r`.
///
/// Valid for `0 < r < L/2`, where distinct offsets land on distinct cells.
#[derive(Debug, Clone)]
pub struct DiscreteBall {
    radius: f64,
    cells: usize,
    /// Fourier transform of the indicator; real because the ball is symmetric.
    spectrum: Vec<f64>,
}

impl DiscreteBall {
    pub fn new(grid: &Grid, radius: f64) -> Result<Self> {
        let limit = 0.5 * grid.length();
        if !(radius > 0.0 && radius < limit) {
            return Err(Error::RadiusOutOfRange { radius, limit });
        }
        let n = grid.n();
        let h = grid.spacing();
        let reach = ((radius / h).floor() as i64).min(n as i64 / 2);
        let wrap = |o: i64| o.rem_euclid(n as i64) as usize;
        let mut indicator = vec![Complex64::new(0.0, 0.0); grid.len()];
        let mut cells = 0;
        for a in -reach..=reach {
            for b in -reach..=reach {
                for c in -reach..=reach {
                    if ((a * a + b * b + c * c) as f64) * h * h <= radius * radius {
                        indicator[grid.index(wrap(a), wrap(b), wrap(c))] = Complex64::new(1.0, 0.0);
                        cells += 1;
                    }
                }
            }
        }
        fft::plan(grid).forward(&mut indicator);
        Ok(Self { radius, cells, spectrum: indicator.into_iter().map(|z| z.re).collect() })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Number of cells in the ball.
    pub fn cells(&self) -> usize {
        self.cells
    }
}

/// Mask spectra of several level sets on one grid, packed two per complex
/// transform, ready to be convolved with any number of balls.
pub struct BallFractions {
    grid: Grid,
    sets: usize,
    packed: Vec<Vec<Complex64>>,
}

impl BallFractions {
    pub fn new(sets: &[&LevelSet]) -> Result<Self> {
        let grid = match sets.first() {
            Some(s) => *s.grid(),
            None => return Err(Error::InvalidParameter { name: "sets", reason: "no level sets".into() }),
        };
        for s in sets {
            grid.check_same(s.grid())?;
        }
        let plan = fft::plan(&grid);
        let packed = sets
            .chunks(2)
            .map(|pair| {
                let one = |b: bool| if b { 1.0 } else { 0.0 };
                let mut buf: Vec<Complex64> = match pair {
                    [a, b] => a.mask().iter().zip(b.mask()).map(|(&x, &y)| Complex64::new(one(x), one(y))).collect(),
                    [a] => a.mask().iter().map(|&x| Complex64::new(one(x), 0.0)).collect(),
                    _ => unreachable!(),
                };
                plan.forward(&mut buf);
                buf
            })
            .collect();
        Ok(Self { grid, sets: sets.len(), packed })
    }

    /// Per set, the number of set cells inside the ball centered at every
    /// grid point. The convolution with a real symmetric kernel keeps the two
    /// packed masks in the real and imaginary parts; rounding recovers the
    /// exact integer counts.
    pub fn counts(&self, ball: &DiscreteBall) -> Vec<Vec<u32>> {
        let mut out = Vec::with_capacity(self.sets);
        self.for_each_count_pair(ball, |re, im| {
            out.push(re);
            if let Some(im) = im {
                out.push(im);
            }
        });
        out
    }

    /// Per set, the largest fraction of the ball covered by the set over all
    /// centers.
    pub fn max_fractions(&self, ball: &DiscreteBall) -> Vec<f64> {
        let cells = ball.cells() as f64;
        let max = |v: &[u32]| v.iter().copied().max().unwrap_or(0) as f64 / cells;
        let mut out = Vec::with_capacity(self.sets);
        self.for_each_count_pair(ball, |re, im| {
            out.push(max(&re));
            if let Some(im) = im {
                out.push(max(&im));
            }
        });
        out
    }

    fn for_each_count_pair(&self, ball: &DiscreteBall, mut f: impl FnMut(Vec<u32>, Option<Vec<u32>>)) {
        assert_eq!(ball.spectrum.len(), self.grid.len(), "ball built for another grid");
        let plan = fft::plan(&self.grid);
        let mut buf = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        let count = |x: f64| x.round().max(0.0) as u32;
        for (p, spec) in self.packed.iter().enumerate() {
            for ((z, s), k) in buf.iter_mut().zip(spec).zip(&ball.spectrum) {
                *z = s * k;
            }
            plan.inverse(&mut buf);
            let re = buf.iter().map(|z| count(z.re)).collect();
            let im = (2 * p + 1 < self.sets).then(|| buf.iter().map(|z| count(z.im)).collect());
            f(re, im);
        }
    }
}

/// Fraction of the discrete ball `B(x, r)` covered by `set`, at every grid point `x`.
pub fn ball_fraction_field(set: &LevelSet, r: f64) -> Result<ScalarField> {
    let ball = DiscreteBall::new(set.grid(), r)?;
    let counts = BallFractions::new(&[set])?.counts(&ball).remove(0);
    let cells = ball.cells() as f64;
    ScalarField::new(*set.grid(), counts.into_iter().map(|c| (c as f64 / cells).min(1.0)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SemiMixed {
    pub passed: bool,
    pub max_fraction: f64,
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "delta", reason: format!("{delta} outside (0, 1)") })
    }
}

/// `set` is `r`-semi-mixed with ratio `delta`: no ball of radius `r` is more
/// than a fraction `delta` full.
pub fn is_semi_mixed(set: &LevelSet, r: f64, delta: f64) -> Result<SemiMixed> {
    check_delta(delta)?;
    let ball = DiscreteBall::new(set.grid(), r)?;
    let max_fraction = BallFractions::new(&[set])?.max_fractions(&ball)[0];
    Ok(SemiMixed { passed: max_fraction <= delta, max_fraction })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleSearch {
    /// Smallest radius of the grid at which the set is semi-mixed.
    pub scale: Option<f64>,
    /// `(r, max fraction)` for every radius; not monotone in general.
    pub curve: Vec<(f64, f64)>,
}

/// Geometric radii `lo * 10^(i / per_decade)` below `hi`.
pub fn geometric_radii(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let step = 10f64.powf(1.0 / per_decade as f64);
    std::iter::successors(Some(lo), |r| Some(r * step)).take_while(|&r| r < hi).collect()
}

/// 3D sparseness scale of one set over an ascending radius grid.
pub fn sparseness_scale(set: &LevelSet, delta: f64, radii: &[f64]) -> Result<ScaleSearch> {
    Ok(sparseness_scales(&[set], delta, radii)?.remove(0))
}

/// [`sparseness_scale`] for several sets sharing the transforms.
pub fn sparseness_scales(sets: &[&LevelSet], delta: f64, radii: &[f64]) -> Result<Vec<ScaleSearch>> {
    check_delta(delta)?;
    if radii.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter { name: "radii", reason: "must be strictly ascending".into() });
    }
    let fractions = BallFractions::new(sets)?;
    let mut curves = vec![Vec::with_capacity(radii.len()); sets.len()];
    for &r in radii {
        let ball = DiscreteBall::new(&fractions.grid, r)?;
        for (curve, frac) in curves.iter_mut().zip(fractions.max_fractions(&ball)) {
            curve.push((r, frac));
        }
    }
    Ok(curves
        .into_iter()
        .map(|curve| ScaleSearch { scale: curve.iter().find(|(_, f)| *f <= delta).map(|(r, _)| *r), curve })
        .collect())
}
