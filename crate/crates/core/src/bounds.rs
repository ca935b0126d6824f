//! H^-1 norms, harmonic-measure constants, mixing-lemma constants and the
//! a priori sparseness scale they certify.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{SpectralVectorField, VectorField};
use crate::operators::max_norm;
use crate::sparseness::{superlevel_sets, BallFractions, DiscreteBall};

/// Volume of the unit ball in three dimensions.
pub const UNIT_BALL_VOLUME: f64 = 4.0 * PI / 3.0;

/// Ratio of the 3D sparseness condition at the regularity threshold.
pub const DELTA_3D: f64 = 0.75;

/// `||f||_{H^-1}^2 = L^3 sum_k |c_k|^2 / (1 + |k|^2)`, mean mode included.
pub fn h_minus1_norm(f: &VectorField) -> f64 {
    h_minus1_norm_spectral(&SpectralVectorField::forward(f))
}

pub fn h_minus1_norm_spectral(f: &SpectralVectorField) -> f64 {
    (f.grid().volume() * f.weighted_sum(|k2| 1.0 / (1.0 + k2))).sqrt()
}

/// Harmonic measure of the extremal slit configuration at the origin of the
/// unit disk, `(2/pi) asin((1 - (1-l)^2) / (1 + (1-l)^2))`.
pub fn harmonic_measure_extremal(lambda: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("{lambda} outside [0, 1]"),
        });
    }
    let q = (1.0 - lambda) * (1.0 - lambda);
    Ok(((1.0 - q) / (1.0 + q)).asin() / FRAC_PI_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrozenConstants {
    pub h_star: f64,
    /// Solution of `h*/2 + (1 - h*) M = 1`.
    pub m: f64,
    /// Super-level cut fraction `1/(2M)`.
    pub lambda_cut: f64,
}

impl FrozenConstants {
    /// Residual of the defining identity of `M`.
    pub fn identity_residual(&self) -> f64 {
        0.5 * self.h_star + (1.0 - self.h_star) * self.m - 1.0
    }
}

pub fn frozen_constants() -> FrozenConstants {
    let lambda = 1.0 - 0.75f64.cbrt();
    let h_star = harmonic_measure_extremal(lambda).expect("lambda lies in [0, 1]");
    let m = (1.0 - 0.5 * h_star) / (1.0 - h_star);
    FrozenConstants { h_star, m, lambda_cut: 1.0 / (2.0 * m) }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaConstants {
    pub lambda: f64,
    pub delta: f64,
    /// Relative shell width of the cutoff, `(1+eta)^3 = (delta(1+lambda) + 1)/2`.
    pub eta: f64,
    /// `c(eta)` in `||phi||_{H^1} <= c(eta) r^{1/2}` for `r <= 1`.
    pub c_cutoff: f64,
    pub c_star: f64,
}

/// Constants of the mixing lemma for cut `lambda` and ratio `delta`.
///
/// The cutoff `phi` is 1 on `B(x0, r)` and decays linearly to 0 across the
/// shell of width `eta r`, so
/// `||phi||_{H^1}^2 <= V3 (1+eta)^3 r^3 + V3 ((1+eta)^3 - 1) r / eta^2`.
/// Testing `f_i` against `phi` on a ball where `S^{i,+}` fills more than
/// `delta` of the volume gives
/// `|<f_i, phi>| >= I - |II| - |III| > (delta(1+lambda) - (1+eta)^3) V3 r^3 ||f||_inf`,
/// and dividing by `||phi||_{H^1}` yields `c*`.
pub fn lemma_constants(lambda: f64, delta: f64) -> Result<LemmaConstants> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("{lambda} outside (0, 1)"),
        });
    }
    let threshold = 1.0 / (1.0 + lambda);
    if !(delta > threshold) {
        return Err(Error::LemmaHypothesis { delta, threshold });
    }
    if !(delta < 1.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: format!("{delta} must be below 1"),
        });
    }
    let shell = (delta * (1.0 + lambda) + 1.0) / 2.0;
    let eta = shell.cbrt() - 1.0;
    let c_cutoff = (UNIT_BALL_VOLUME * shell + UNIT_BALL_VOLUME * (shell - 1.0) / (eta * eta)).sqrt();
    let c_star = UNIT_BALL_VOLUME / c_cutoff * (delta * (1.0 + lambda) - 1.0) / 2.0;
    Ok(LemmaConstants { lambda, delta, eta, c_cutoff, c_star })
}

/// Lemma constants at the frozen cut and `delta = 3/4`.
pub fn default_lemma_constants() -> LemmaConstants {
    lemma_constants(frozen_constants().lambda_cut, DELTA_3D).expect("frozen constants satisfy the hypothesis")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GuaranteedScale {
    /// `(||w||_{H^-1} / (c* ||w||_inf))^{2/5}`.
    pub r_star: f64,
    pub h_minus1: f64,
    pub omega_inf: f64,
    /// Coarser scale with `||w||_{H^-1}` replaced by a reference `||u0||_2`.
    pub r_star_energy: Option<f64>,
    /// `r* < L/2`, i.e. the certificate can be checked on the box.
    pub within_box: bool,
    /// `r* <= 1`, the range where the lemma is stated.
    pub within_unit: bool,
}

pub fn guaranteed_sparseness_scale(
    omega: &VectorField,
    constants: &LemmaConstants,
    reference_l2: Option<f64>,
) -> Result<GuaranteedScale> {
    let omega_inf = max_norm(omega);
    if omega_inf == 0.0 {
        return Err(Error::ZeroField);
    }
    let h_minus1 = h_minus1_norm(omega);
    let scale = |num: f64| (num / (constants.c_star * omega_inf)).powf(0.4);
    let r_star = scale(h_minus1);
    let half_box = 0.5 * omega.grid().length();
    if r_star >= half_box {
        log::warn!("r* = {r_star:.4} is not below L/2 = {half_box:.4}; certificate cannot be checked on the box");
    }
    Ok(GuaranteedScale {
        r_star,
        h_minus1,
        omega_inf,
        r_star_energy: reference_l2.map(scale),
        within_box: r_star < half_box,
        within_unit: r_star <= 1.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingVerdict {
    pub radius: f64,
    /// All six super-level sets are `delta`-semi-mixed at `radius`.
    pub semi_mixed: bool,
    pub max_fraction: f64,
    pub h_minus1: f64,
    /// `c* r^{5/2} ||f||_inf`.
    pub bound: f64,
    /// Semi-mixedness failed although `h_minus1 <= bound`.
    pub violation: bool,
}

/// Checks the contrapositive of the mixing lemma at one radius: a failing
/// super-level set must come with `||f||_{H^-1} > c* r^{5/2} ||f||_inf`.
pub fn verify_mixing_lemma(f: &VectorField, constants: &LemmaConstants, r: f64) -> Result<MixingVerdict> {
    Ok(verify_mixing_lemma_radii(f, constants, &[r])?.remove(0))
}

/// [`verify_mixing_lemma`] over several radii sharing the mask transforms.
pub fn verify_mixing_lemma_radii(
    f: &VectorField,
    constants: &LemmaConstants,
    radii: &[f64],
) -> Result<Vec<MixingVerdict>> {
    let g = f.grid();
    let limit = (0.5 * g.length()).min(1.0);
    for &r in radii {
        if !(r > 0.0 && r <= limit) || (r >= 0.5 * g.length()) {
            return Err(Error::RadiusOutOfRange { radius: r, limit });
        }
    }
    let f_inf = max_norm(f);
    let h_minus1 = h_minus1_norm(f);
    if f_inf == 0.0 {
        return Ok(radii
            .iter()
            .map(|&radius| MixingVerdict {
                radius,
                semi_mixed: true,
                max_fraction: 0.0,
                h_minus1,
                bound: 0.0,
                violation: false,
            })
            .collect());
    }
    let sets = superlevel_sets(f, constants.lambda)?;
    let fractions = BallFractions::new(&sets.iter().collect::<Vec<_>>())?;
    radii
        .iter()
        .map(|&radius| {
            let ball = DiscreteBall::new(g, radius)?;
            let max_fraction = fractions.max_fractions(&ball).into_iter().fold(0.0, f64::max);
            let semi_mixed = max_fraction <= constants.delta;
            let bound = constants.c_star * radius.powf(2.5) * f_inf;
            Ok(MixingVerdict {
                radius,
                semi_mixed,
                max_fraction,
                h_minus1,
                bound,
                violation: !semi_mixed && !(h_minus1 > bound),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::operators::{curl, l2_norm};
    use proptest::prelude::*;

    // Frozen from an independent 50-digit evaluation of the closed forms.
    const H_STAR: f64 = 0.060_954_683_483_033_29;
    const M: f64 = 1.032_455_666_628_060_9;
    const LAMBDA_CUT: f64 = 0.484_282_295_270_818_1;
    const ETA_CUT: f64 = 0.018_523_385_862_764_648;
    const C_ETA_CUT: f64 = 26.371_870_711_148_41;
    const C_STAR_CUT: f64 = 0.008_991_022_197_172_695;
    const ETA_HALF: f64 = 0.020_413_775_479_337_018;

    #[test]
    fn frozen_constants_match_high_precision_values() {
        let c = frozen_constants();
        assert!((c.h_star - H_STAR).abs() < 1e-15);
        assert!((c.m - M).abs() < 1e-14);
        assert!((c.lambda_cut - LAMBDA_CUT).abs() < 1e-14);
        assert!(c.identity_residual().abs() < 1e-12);
        assert!(1.0 < c.m && c.m < 1.5);
    }

    #[test]
    fn harmonic_measure_endpoints_and_domain() {
        assert_eq!(harmonic_measure_extremal(0.0).unwrap(), 0.0);
        assert_eq!(harmonic_measure_extremal(1.0).unwrap(), 1.0);
        assert!(harmonic_measure_extremal(-0.1).is_err());
        assert!(harmonic_measure_extremal(1.1).is_err());
    }

    #[test]
    fn lemma_constants_at_the_frozen_cut() {
        let c = lemma_constants(LAMBDA_CUT, 0.75).unwrap();
        assert!((c.eta - ETA_CUT).abs() < 1e-14);
        assert!((c.c_cutoff - C_ETA_CUT).abs() < 1e-11);
        assert!((c.c_star - C_STAR_CUT).abs() < 1e-15);
        assert!(((1.0 + c.eta).powi(3) - (0.75 * (1.0 + c.lambda) + 1.0) / 2.0).abs() < 1e-12);
        let half = lemma_constants(0.5, 0.75).unwrap();
        assert!((half.eta - ETA_HALF).abs() < 1e-14);
    }

    #[test]
    fn lemma_hypothesis_is_enforced() {
        assert!(matches!(lemma_constants(0.5, 2.0 / 3.0), Err(Error::LemmaHypothesis { .. })));
        assert!(lemma_constants(0.5, 1.0).is_err());
        assert!(lemma_constants(0.0, 0.9).is_err());
        // c* vanishes as delta approaches the threshold.
        let near = lemma_constants(0.5, 2.0 / 3.0 + 1e-9).unwrap();
        assert!(near.c_star > 0.0 && near.c_star < 1e-8);
    }

    #[test]
    fn h_minus1_of_single_modes() {
        let g = Grid::periodic_2pi(16).unwrap();
        assert_eq!(h_minus1_norm(&VectorField::zeros(g)), 0.0);
        let f = VectorField::from_fn(g, |p| [p[0].sin(), 0.0, 0.0]).unwrap();
        assert!((h_minus1_norm(&f) - l2_norm(&f) / 2f64.sqrt()).abs() < 1e-12);
        // (2 pi)^{3/2} / 2 for the unit sine on the 2 pi box.
        let expected = (2.0 * PI).powf(1.5) / 2.0;
        assert!((h_minus1_norm(&f) - expected).abs() < 1e-12);
    }

    #[test]
    fn guaranteed_scale_of_a_sine() {
        let g = Grid::periodic_2pi(16).unwrap();
        let c = default_lemma_constants();
        let f = VectorField::from_fn(g, |p| [p[0].sin(), 0.0, 0.0]).unwrap();
        let s = guaranteed_sparseness_scale(&f, &c, Some(10.0)).unwrap();
        let expected = ((2.0 * PI).powf(1.5) / 2.0 / c.c_star).powf(0.4);
        assert!((s.r_star - expected).abs() < 1e-12 * expected);
        assert!(!s.within_box);
        assert!((s.r_star_energy.unwrap() - (10.0 / c.c_star).powf(0.4)).abs() < 1e-12);
        assert!(matches!(
            guaranteed_sparseness_scale(&VectorField::zeros(g), &c, None),
            Err(Error::ZeroField)
        ));
    }

    #[test]
    fn guaranteed_scale_shrinks_with_frequency() {
        let g = Grid::periodic_2pi(16).unwrap();
        let c = default_lemma_constants();
        let r = |m: f64| {
            let f = VectorField::from_fn(g, |p| [(m * p[0]).sin(), 0.0, 0.0]).unwrap();
            guaranteed_sparseness_scale(&f, &c, None).unwrap().r_star
        };
        assert!(r(2.0) < r(1.0));
        assert!(r(5.0) < r(2.0));
    }

    #[test]
    fn mixing_lemma_on_constant_and_zero_fields() {
        let g = Grid::periodic_2pi(16).unwrap();
        let c = lemma_constants(0.5, 0.75).unwrap();
        let zero = verify_mixing_lemma(&VectorField::zeros(g), &c, 0.5).unwrap();
        assert!(zero.semi_mixed && !zero.violation);
        // S^{1,+} is the whole box; ||f||_{H^-1} = (2 pi)^{3/2} beats the bound.
        let one = VectorField::from_fn(g, |_| [1.0, 0.0, 0.0]).unwrap();
        let v = verify_mixing_lemma(&one, &c, 0.9).unwrap();
        assert!(!v.semi_mixed);
        assert_eq!(v.max_fraction, 1.0);
        assert!((v.h_minus1 - (2.0 * PI).powf(1.5)).abs() < 1e-10);
        assert!((v.bound - c.c_star * 0.9f64.powf(2.5)).abs() < 1e-15);
        assert!(!v.violation);
        assert!(verify_mixing_lemma(&one, &c, 1.5).is_err());
        let small = Grid::new(16, 1.0).unwrap();
        assert!(verify_mixing_lemma(&VectorField::zeros(small), &c, 0.5).is_err());
    }

    fn trig_field(g: Grid, coeffs: &[f64]) -> VectorField {
        VectorField::from_fn(g, |p| {
            let s = |a: usize| coeffs[a] * (p[0] + 2.0 * p[1]).sin() + coeffs[a + 1] * (p[2] - p[0]).cos();
            [s(0), s(2), s(4)]
        })
        .unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn harmonic_measure_is_increasing(a in 0.0f64..1.0, b in 0.0f64..1.0) {
            prop_assume!(a < b);
            prop_assert!(harmonic_measure_extremal(a).unwrap() < harmonic_measure_extremal(b).unwrap());
        }

        #[test]
        fn h_minus1_is_dominated(coeffs in prop::collection::vec(-2.0f64..2.0, 6)) {
            let g = Grid::periodic_2pi(8).unwrap();
            let u = trig_field(g, &coeffs);
            prop_assert!(h_minus1_norm(&u) <= l2_norm(&u));
            prop_assert!(h_minus1_norm(&curl(&u).unwrap()) <= l2_norm(&u) * (1.0 + 1e-12));
        }

        #[test]
        fn guaranteed_scale_is_scale_invariant(c in 0.01f64..100.0) {
            let g = Grid::periodic_2pi(8).unwrap();
            let u = trig_field(g, &[1.0, 0.5, -0.3, 0.2, 0.7, -1.0]);
            let k = default_lemma_constants();
            let a = guaranteed_sparseness_scale(&u, &k, None).unwrap().r_star;
            let b = guaranteed_sparseness_scale(&u.scaled(c), &k, None).unwrap().r_star;
            prop_assert!((a - b).abs() <= 1e-12 * a);
        }
    }
}
