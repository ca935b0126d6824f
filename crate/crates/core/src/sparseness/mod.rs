//! Super-level sets of vorticity components and their 1D/3D sparseness.

mod ball;
mod criterion;
mod line;
mod report;

pub use ball::{
    ball_fraction_field, geometric_radii, is_semi_mixed, sparseness_scale, sparseness_scales, BallFractions,
    DiscreteBall, ScaleSearch, SemiMixed,
};
pub use criterion::{regularity_criterion_check, select_component, CriterionParams, CriterionReport, PointResult};
pub use line::{fibonacci_sphere, interpolate, is_1d_sparse, line_fraction};
pub use report::{diagnose, DiagnoseParams, SetReport, SparsenessReport};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::operators::max_norm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// Positive (`Plus`) or negative (`Minus`) part of component `j` (0-based).
pub fn part_field(omega: &VectorField, j: usize, sign: Sign) -> ScalarField {
    let s = omega.scalar(j);
    match sign {
        Sign::Plus => s.positive_part(),
        Sign::Minus => s.negative_part(),
    }
}

/// Binary mask of grid cells on a periodic grid, tagged with the component,
/// sign and absolute cut level it was extracted with.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSet {
    grid: Grid,
    mask: Vec<bool>,
    /// 0-based component index.
    pub component: usize,
    pub sign: Sign,
    pub cut: f64,
}

impl LevelSet {
    /// An untagged mask, e.g. for geometric tests.
    pub fn from_mask(grid: Grid, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != grid.len() {
            return Err(Error::GridMismatch(format!("mask has {} cells, grid {}", mask.len(), grid.len())));
        }
        Ok(Self { grid, mask, component: 0, sign: Sign::Plus, cut: 0.0 })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&b| b)
    }

    /// `"1+"`, `"3-"`, ... with the component counted from 1.
    pub fn id(&self) -> String {
        format!("{}{}", self.component + 1, self.sign.symbol())
    }
}

/// The six sets `{x : w_j^+-(x) > lambda ||w||_inf}` in the order
/// `1+, 1-, 2+, 2-, 3+, 3-`.
pub fn superlevel_sets(omega: &VectorField, lambda: f64) -> Result<[LevelSet; 6]> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("{lambda} outside (0, 1)"),
        });
    }
    let w_inf = max_norm(omega);
    if w_inf == 0.0 {
        return Err(Error::ZeroField);
    }
    let cut = lambda * w_inf;
    let grid = *omega.grid();
    Ok(std::array::from_fn(|s| {
        let (j, sign) = (s / 2, if s % 2 == 0 { Sign::Plus } else { Sign::Minus });
        let c = omega.component(j);
        let mask = match sign {
            Sign::Plus => c.iter().map(|&v| v > cut).collect(),
            Sign::Minus => c.iter().map(|&v| -v > cut).collect(),
        };
        LevelSet { grid, mask, component: j, sign, cut }
    }))
}
