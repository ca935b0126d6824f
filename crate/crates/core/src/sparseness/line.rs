//! Line sampling for 1D sparseness.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Periodic trilinear interpolation of `f` at the physical point `p`.
pub fn interpolate(f: &ScalarField, p: [f64; 3]) -> f64 {
    let g = f.grid();
    let n = g.n();
    let h = g.spacing();
    let mut base = [0usize; 3];
    let mut w = [0.0; 3];
    for a in 0..3 {
        let u = p[a] / h;
        let fl = u.floor();
        w[a] = u - fl;
        base[a] = (fl as i64).rem_euclid(n as i64) as usize;
    }
    let next = |i: usize| if i + 1 == n { 0 } else { i + 1 };
    let d = f.data();
    let mut acc = 0.0;
    for (ci, wi) in [(base[0], 1.0 - w[0]), (next(base[0]), w[0])] {
        for (cj, wj) in [(base[1], 1.0 - w[1]), (next(base[1]), w[1])] {
            for (ck, wk) in [(base[2], 1.0 - w[2]), (next(base[2]), w[2])] {
                acc += wi * wj * wk * d[(ci * n + cj) * n + ck];
            }
        }
    }
    acc
}

/// Fraction of `m_line` midpoint samples on the open segment
/// `(x0 - rho d, x0 + rho d)` where the interpolated field exceeds `cut`.
pub fn line_fraction(f: &ScalarField, x0: [f64; 3], d: [f64; 3], rho: f64, cut: f64, m_line: usize) -> f64 {
    let mut above = 0;
    for i in 0..m_line {
        let s = rho * (-1.0 + (2 * i + 1) as f64 / m_line as f64);
        let p = [x0[0] + s * d[0], x0[1] + s * d[1], x0[2] + s * d[2]];
        if interpolate(f, p) > cut {
            above += 1;
        }
    }
    above as f64 / m_line as f64
}

/// The set `{f > cut}` is 1D `delta`-sparse around `x0` along `d` at scale `rho`.
pub fn is_1d_sparse(
    f: &ScalarField,
    x0: [f64; 3],
    d: [f64; 3],
    rho: f64,
    delta: f64,
    cut: f64,
    m_line: usize,
) -> Result<bool> {
    let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter { name: "direction", reason: format!("|d| = {norm}, expected 1") });
    }
    let limit = 0.5 * f.grid().length();
    if !(rho > 0.0 && rho < limit) {
        return Err(Error::RadiusOutOfRange { radius: rho, limit });
    }
    if m_line == 0 {
        return Err(Error::InvalidParameter { name: "m_line", reason: "need at least one sample".into() });
    }
    Ok(line_fraction(f, x0, d, rho, cut, m_line) <= delta)
}

/// `count` nearly uniform unit vectors on golden-angle spiral points.
pub fn fibonacci_sphere(count: usize) -> Vec<[f64; 3]> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2 * i + 1) as f64 / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}
