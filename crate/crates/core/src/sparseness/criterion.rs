//! Geometric check of the 1D-sparseness regularity criterion on one snapshot.

use rayon::prelude::*;
use serde::Serialize;

use super::line::{fibonacci_sphere, line_fraction};
use super::{part_field, Sign};
use crate::bounds::frozen_constants;
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::operators::max_norm;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriterionParams {
    /// Analyticity constant `c(M)`; not quantified in closed form, so every
    /// result is reported as a function of it.
    pub c_m: f64,
    /// Cut fraction of the super-level sets.
    pub lambda: f64,
    /// 1D sparseness ratio.
    pub delta1: f64,
    pub n_dir: usize,
    pub m_line: usize,
    /// Scale grid: `per_decade` geometric steps over `decades` below the bound.
    pub rho_per_decade: usize,
    pub rho_decades: f64,
    /// Test every `point_stride`-th grid point along each axis.
    pub point_stride: usize,
}

impl Default for CriterionParams {
    fn default() -> Self {
        Self {
            c_m: 1.0,
            lambda: frozen_constants().lambda_cut,
            delta1: 0.75f64.cbrt(),
            n_dir: 64,
            m_line: 256,
            rho_per_decade: 24,
            rho_decades: 2.0,
            point_stride: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub direction: [f64; 3],
    pub rho: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResult {
    pub index: usize,
    pub position: [f64; 3],
    /// Selected component, counted from 1.
    pub component: usize,
    pub sign: Sign,
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub params: CriterionParams,
    pub omega_inf: f64,
    pub cut: f64,
    /// `1 / (2 c_M ||w||_inf^{1/2})`.
    pub rho_bound: f64,
    /// Scales searched, ascending, all below `L/2`.
    pub rhos: Vec<f64>,
    pub points_tested: usize,
    pub points_passed: usize,
    pub fraction_passing: f64,
    pub points: Vec<PointResult>,
}

/// `(j, sign)` with `|w| = w_j^sign`, `|w|` the component max; ties go to the
/// smallest `j`, then to `+`. `j` is 0-based.
pub fn select_component(w: [f64; 3]) -> (usize, Sign) {
    let max = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let j = w.iter().position(|v| v.abs() == max).unwrap_or(0);
    (j, if w[j] >= 0.0 { Sign::Plus } else { Sign::Minus })
}

/// For each sampled point, searches scales `rho <= rho_bound` (ascending) and
/// directions for a segment on which the selected super-level set fills at
/// most `delta1`; the first hit is the witness.
pub fn regularity_criterion_check(omega: &VectorField, params: &CriterionParams) -> Result<CriterionReport> {
    let positive = |name: &'static str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter { name, reason: format!("{v} must be positive") })
        }
    };
    positive("c_m", params.c_m)?;
    positive("delta1", params.delta1)?;
    if !(params.lambda > 0.0 && params.lambda < 1.0) {
        return Err(Error::InvalidParameter { name: "lambda", reason: format!("{} outside (0, 1)", params.lambda) });
    }
    if params.n_dir == 0 || params.m_line == 0 || params.rho_per_decade == 0 || params.point_stride == 0 {
        return Err(Error::InvalidParameter {
            name: "criterion",
            reason: "n_dir, m_line, rho_per_decade and point_stride must be positive".into(),
        });
    }
    let omega_inf = max_norm(omega);
    if omega_inf == 0.0 {
        return Err(Error::ZeroField);
    }
    let g = *omega.grid();
    let half_box = 0.5 * g.length();
    let rho_bound = 1.0 / (2.0 * params.c_m * omega_inf.sqrt());
    let steps = (params.rho_decades * params.rho_per_decade as f64).round() as i32;
    let mut rhos: Vec<f64> = (0..=steps)
        .map(|i| rho_bound * 10f64.powf(-(i as f64) / params.rho_per_decade as f64))
        .filter(|&r| r < half_box)
        .collect();
    if rhos.is_empty() {
        return Err(Error::ScaleOverflow { bound: rho_bound, half_box });
    }
    rhos.reverse();

    let cut = params.lambda * omega_inf;
    let parts: Vec<ScalarField> = (0..6)
        .map(|s| part_field(omega, s / 2, if s % 2 == 0 { Sign::Plus } else { Sign::Minus }))
        .collect();
    let dirs = fibonacci_sphere(params.n_dir);
    let n = g.n();
    let samples: Vec<usize> = (0..n)
        .step_by(params.point_stride)
        .flat_map(|i| (0..n).step_by(params.point_stride).map(move |j| (i, j)))
        .flat_map(|(i, j)| (0..n).step_by(params.point_stride).map(move |k| (i * n + j) * n + k))
        .collect();

    let points: Vec<PointResult> = samples
        .par_iter()
        .map(|&index| {
            let (j, sign) = select_component(omega.at(index));
            let field = &parts[2 * j + (sign == Sign::Minus) as usize];
            let x0 = g.position(index);
            let witness = rhos.iter().find_map(|&rho| {
                dirs.iter().find_map(|&d| {
                    let fraction = line_fraction(field, x0, d, rho, cut, params.m_line);
                    (fraction <= params.delta1).then_some(Witness { direction: d, rho, fraction })
                })
            });
            PointResult { index, position: x0, component: j + 1, sign, witness }
        })
        .collect();
    let points_passed = points.iter().filter(|p| p.witness.is_some()).count();
    Ok(CriterionReport {
        params: *params,
        omega_inf,
        cut,
        rho_bound,
        rhos,
        points_tested: points.len(),
        points_passed,
        fraction_passing: points_passed as f64 / points.len() as f64,
        points,
    })
}
