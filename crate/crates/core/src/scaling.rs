//! Vorticity time series: escape times, the observation window after an
//! escape time, diffusion scales and power-law fits of sparseness scale
//! against diffusion scale.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Samples `(t, ||w(t)||_inf)` with strictly increasing `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaSeries {
    samples: Vec<(f64, f64)>,
    pub nu: f64,
}

impl OmegaSeries {
    pub fn new(samples: Vec<(f64, f64)>, nu: f64) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(Error::InvalidParameter { name: "nu", reason: format!("{nu} must be positive") });
        }
        for (i, &(t, w)) in samples.iter().enumerate() {
            if !t.is_finite() || !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidParameter {
                    name: "series",
                    reason: format!("sample {i}: (t, omega_inf) = ({t}, {w})"),
                });
            }
            if i > 0 && !(t > samples[i - 1].0) {
                return Err(Error::InvalidParameter {
                    name: "series",
                    reason: format!("times not strictly increasing at sample {i}"),
                });
            }
        }
        Ok(Self { samples, nu })
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.0).collect()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Index of the first maximum.
    pub fn peak(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, s) in self.samples.iter().enumerate() {
            if best.map_or(true, |b| s.1 > self.samples[b].1) {
                best = Some(i);
            }
        }
        best
    }

    /// `[t_lo, t_peak]` of the growth phase. An initial decay is skipped: the
    /// phase starts at the first local minimum, `t_peak` is the first maximum
    /// after it and `t_lo` the first time from the minimum on at which the
    /// series reaches half of that maximum.
    pub fn growth_window(&self) -> Option<(f64, f64)> {
        let s = &self.samples;
        if s.is_empty() {
            return None;
        }
        let start = (0..s.len()).find(|&i| i + 1 == s.len() || s[i + 1].1 > s[i].1)?;
        let mut p = start;
        for i in start..s.len() {
            if s[i].1 > s[p].1 {
                p = i;
            }
        }
        let half = 0.5 * s[p].1;
        let lo = s[start..=p].iter().find(|x| x.1 >= half)?;
        Some((lo.0, s[p].0))
    }
}

/// Indices `i` whose value is exceeded by every later sample. The last sample
/// has no later samples to witness this and is never included.
pub fn escape_times(series: &OmegaSeries) -> Vec<usize> {
    let s = series.samples();
    let mut out = Vec::new();
    let mut later_min = f64::INFINITY;
    for i in (0..s.len()).rev() {
        if i + 1 < s.len() && s[i].1 < later_min {
            out.push(i);
        }
        later_min = later_min.min(s[i].1);
    }
    out.reverse();
    out
}

/// Admissible window `[t + 1/(4 c w), t + 1/(c w)]` after time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SWindow {
    pub lo: f64,
    pub hi: f64,
    /// Midpoint `t + 5/(8 c w)`.
    pub s: f64,
}

impl SWindow {
    /// Errors when the whole window lies beyond `t_end`.
    pub fn check_within(&self, t_end: f64) -> Result<()> {
        if self.lo > t_end {
            Err(Error::WindowOverflow { lo: self.lo, hi: self.hi, t_end })
        } else {
            Ok(())
        }
    }

    /// Index of the time in the window closest to the midpoint (earlier on ties).
    pub fn snap(&self, times: &[f64]) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, &t) in times.iter().enumerate() {
            if t < self.lo || t > self.hi {
                continue;
            }
            if best.map_or(true, |b| (t - self.s).abs() < (times[b] - self.s).abs()) {
                best = Some(i);
            }
        }
        best
    }
}

pub fn pick_s(t: f64, omega_inf: f64, c_m: f64) -> Result<SWindow> {
    if !(omega_inf > 0.0 && omega_inf.is_finite()) {
        return Err(Error::InvalidParameter { name: "omega_inf", reason: format!("{omega_inf} must be positive") });
    }
    if !(c_m > 0.0 && c_m.is_finite()) {
        return Err(Error::InvalidParameter { name: "c_m", reason: format!("{c_m} must be positive") });
    }
    let unit = 1.0 / (c_m * omega_inf);
    Ok(SWindow { lo: t + 0.25 * unit, hi: t + unit, s: t + 0.625 * unit })
}

/// `d = (nu / ||w||_inf)^{1/2}`.
pub fn diffusion_scale(omega_inf: f64, nu: f64) -> Result<f64> {
    if !(omega_inf > 0.0) {
        return Err(Error::InvalidParameter { name: "omega_inf", reason: format!("{omega_inf} must be positive") });
    }
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter { name: "nu", reason: format!("{nu} must be positive") });
    }
    Ok((nu / omega_inf).sqrt())
}

/// `log r = intercept + slope * log d`, natural logarithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub intercept: f64,
    pub slope: f64,
    /// RMS of the log residuals.
    pub residual: f64,
    pub points: usize,
    /// Only two points: the line interpolates them exactly.
    pub underdetermined: bool,
}

/// Ordinary least squares on `(ln d, ln r)`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 2 {
        return Err(Error::TooFewRows { needed: 2, got: points.len() });
    }
    if let Some(&(d, r)) = points.iter().find(|(d, r)| !(*d > 0.0 && *r > 0.0 && d.is_finite() && r.is_finite())) {
        return Err(Error::InvalidParameter { name: "rows", reason: format!("(d, r) = ({d}, {r}) must be positive") });
    }
    let underdetermined = points.len() == 2;
    if underdetermined {
        log::warn!("power-law fit through two points is an exact interpolation");
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit);
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Ok(PowerLawFit { intercept, slope, residual: (ss / n).sqrt(), points: points.len(), underdetermined })
}

/// `r ~ ||w||^{-alpha}` and `d ~ ||w||^{-1/2}` at fixed `nu` give `r ~ d^{2 alpha}`.
pub fn alpha_from_slope(beta: f64) -> f64 {
    beta / 2.0
}

/// Reporting bins for the class index; a convention, not a theorem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassLabel {
    /// `alpha <= 1/3`, the level of the energy bound.
    Energy,
    /// `1/3 < alpha <= 2/5`, within the a priori bound.
    APriori,
    /// `2/5 < alpha < 1/2`, between the a priori bound and the criterion.
    SubcriticalGap,
    /// `alpha >= 1/2`, at or beyond the regularity threshold.
    CriterionLevel,
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassLabel::Energy => "energy class (<= 1/3)",
            ClassLabel::APriori => "a priori class (1/3, 2/5]",
            ClassLabel::SubcriticalGap => "scaling gap (2/5, 1/2)",
            ClassLabel::CriterionLevel => "beyond regularity threshold (>= 1/2)",
        })
    }
}

pub fn class_label(alpha: f64) -> ClassLabel {
    if alpha <= 1.0 / 3.0 {
        ClassLabel::Energy
    } else if alpha <= 0.4 {
        ClassLabel::APriori
    } else if alpha < 0.5 {
        ClassLabel::SubcriticalGap
    } else {
        ClassLabel::CriterionLevel
    }
}

pub const LANDMARKS: [(f64, &str); 4] = [(1.0 / 3.0, "Z_{1/3}"), (0.4, "Z_{2/5}"), (0.5, "Z_{1/2}"), (0.6, "Z_{3/5}")];

/// Landmark class closest to `alpha`.
pub fn nearest_landmark(alpha: f64) -> &'static str {
    LANDMARKS
        .iter()
        .min_by(|a, b| (a.0 - alpha).abs().total_cmp(&(b.0 - alpha).abs()))
        .map(|l| l.1)
        .expect("landmarks are non-empty")
}

/// Weak-`L^p` exponent to class index, `alpha = p/3`.
pub fn lorentz_to_alpha(p: f64) -> Result<f64> {
    if !(p > 0.0) {
        return Err(Error::InvalidParameter { name: "p", reason: format!("{p} must be positive") });
    }
    Ok(p / 3.0)
}

pub fn alpha_to_lorentz(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter { name: "alpha", reason: format!("{alpha} must be positive") });
    }
    Ok(3.0 * alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn series(values: &[f64]) -> OmegaSeries {
        OmegaSeries::new(values.iter().enumerate().map(|(i, &w)| (i as f64, w)).collect(), 1.0).unwrap()
    }

    fn brute_escape(values: &[f64]) -> Vec<usize> {
        (0..values.len())
            .filter(|&i| i + 1 < values.len() && (i + 1..values.len()).all(|j| values[j] > values[i]))
            .collect()
    }

    #[test]
    fn escape_time_examples() {
        assert_eq!(escape_times(&series(&[1.0, 2.0, 3.0, 4.0])), vec![0, 1, 2]);
        assert!(escape_times(&series(&[4.0, 3.0, 2.0])).is_empty());
        assert_eq!(escape_times(&series(&[1.0, 3.0, 2.0, 4.0, 5.0])), vec![0, 2, 3]);
        assert_eq!(escape_times(&series(&[1.0, 1.0, 2.0])), vec![1]);
    }

    #[test]
    fn series_validation() {
        assert!(OmegaSeries::new(vec![(0.0, 1.0), (0.0, 2.0)], 1.0).is_err());
        assert!(OmegaSeries::new(vec![(0.0, -1.0)], 1.0).is_err());
        assert!(OmegaSeries::new(vec![(0.0, 1.0)], 0.0).is_err());
    }

    #[test]
    fn growth_window_runs_from_half_peak_to_peak() {
        let s = series(&[1.0, 2.0, 3.0, 5.0, 8.0, 6.0]);
        assert_eq!(s.growth_window(), Some((3.0, 4.0)));
        // initial decay is skipped
        let s = series(&[8.0, 6.0, 4.0, 4.5, 6.0, 7.0, 5.0]);
        assert_eq!(s.growth_window(), Some((2.0, 5.0)));
        let s = series(&[3.0, 2.0, 1.0]);
        assert_eq!(s.growth_window(), Some((2.0, 2.0)));
    }

    #[test]
    fn s_window() {
        let w = pick_s(0.0, 1.0, 1.0).unwrap();
        assert_eq!((w.lo, w.hi, w.s), (0.25, 1.0, 0.625));
        let w2 = pick_s(0.0, 2.0, 1.0).unwrap();
        assert!((w2.hi - w2.lo - 0.5 * (w.hi - w.lo)).abs() < 1e-15);
        assert_eq!(w.snap(&[0.0, 0.1, 2.0]), None);
        assert_eq!(w.snap(&[0.0, 0.3, 0.6, 0.9]), Some(2));
        assert!(matches!(w.check_within(0.2), Err(Error::WindowOverflow { .. })));
        assert!(w.check_within(0.5).is_ok());
        assert!(pick_s(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn diffusion_scales() {
        assert_eq!(diffusion_scale(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(diffusion_scale(4.0, 1.0).unwrap(), 0.5);
        assert!((diffusion_scale(10.0, 1e-3).unwrap() - 0.01).abs() < 1e-15);
        assert!(diffusion_scale(0.0, 1.0).is_err());
    }

    #[test]
    fn exact_power_law() {
        let pts: Vec<_> = (1..20).map(|i| (0.01 * i as f64, (0.01 * i as f64).powf(1.2))).collect();
        let fit = fit_power_law(&pts).unwrap();
        assert!((fit.slope - 1.2).abs() < 1e-10);
        assert!(fit.intercept.abs() < 1e-10 && fit.residual < 1e-12);
        assert_eq!(nearest_landmark(alpha_from_slope(fit.slope)), "Z_{3/5}");
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<_> = (0..100)
            .map(|i| {
                let d = 0.01 * 1.04f64.powi(i);
                (d, 3.0 * d.powf(0.8) * (0.01 * standard_normal(&mut rng)).exp())
            })
            .collect();
        let fit = fit_power_law(&pts).unwrap();
        assert!((fit.slope - 0.8).abs() < 0.02, "{}", fit.slope);
        assert!((fit.residual - 0.01).abs() < 0.003);
    }

    // Box-Muller, enough for a test.
    fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
        let (u, v): (f64, f64) = (rng.gen_range(f64::EPSILON..1.0), rng.gen());
        (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
    }

    #[test]
    fn fit_edge_cases() {
        let two = fit_power_law(&[(1.0, 2.0), (2.0, 8.0)]).unwrap();
        assert!(two.underdetermined && (two.slope - 2.0).abs() < 1e-12);
        assert!(matches!(fit_power_law(&[(1.0, 1.0)]), Err(Error::TooFewRows { .. })));
        assert!(matches!(fit_power_law(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]), Err(Error::DegenerateFit)));
        assert!(fit_power_law(&[(1.0, 1.0), (0.0, 2.0), (2.0, 3.0)]).is_err());
    }

    #[test]
    fn class_labels() {
        assert_eq!(class_label(alpha_from_slope(1.2)), ClassLabel::CriterionLevel);
        assert_eq!(class_label(alpha_from_slope(2.0 / 3.0)), ClassLabel::Energy);
        assert_eq!(class_label(alpha_from_slope(0.8)), ClassLabel::APriori);
        assert_eq!(class_label(0.45), ClassLabel::SubcriticalGap);
        assert_eq!(class_label(0.5), ClassLabel::CriterionLevel);
        assert_eq!(nearest_landmark(1.0 / 3.0), "Z_{1/3}");
        assert_eq!(nearest_landmark(0.41), "Z_{2/5}");
        assert_eq!(ClassLabel::CriterionLevel.to_string(), "beyond regularity threshold (>= 1/2)");
    }

    #[test]
    fn lorentz_exponents() {
        assert!((lorentz_to_alpha(1.5).unwrap() - 0.5).abs() < 1e-15);
        assert!((lorentz_to_alpha(1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((lorentz_to_alpha(1.2).unwrap() - 0.4).abs() < 1e-15);
        assert!((alpha_to_lorentz(0.4).unwrap() - 1.2).abs() < 1e-15);
        assert!(lorentz_to_alpha(0.0).is_err());
    }

    proptest! {
        #[test]
        fn escape_times_match_brute_force(values in prop::collection::vec(0u8..20, 2..60)) {
            let v: Vec<f64> = values.iter().map(|&x| x as f64).collect();
            prop_assert_eq!(escape_times(&series(&v)), brute_escape(&v));
        }

        #[test]
        fn fit_is_scale_covariant(c in 0.01f64..100.0, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<(f64, f64)> = (0..12).map(|i| (0.1 + i as f64 * 0.05, rng.gen_range(0.5..2.0))).collect();
            let scaled: Vec<_> = pts.iter().map(|&(d, r)| (d, c * r)).collect();
            let (a, b) = (fit_power_law(&pts).unwrap(), fit_power_law(&scaled).unwrap());
            prop_assert!((a.slope - b.slope).abs() <= 1e-12);
            prop_assert!((b.intercept - a.intercept - c.ln()).abs() <= 1e-12);
        }

        #[test]
        fn slope_recovers_alpha(k in 0usize..4) {
            let alpha = [1.0 / 3.0, 0.4, 0.5, 0.6][k];
            let pts: Vec<_> = (1..30).map(|i| { let d = 0.003 * i as f64; (d, d.powf(2.0 * alpha)) }).collect();
            prop_assert!((alpha_from_slope(fit_power_law(&pts).unwrap().slope) - alpha).abs() <= 1e-10);
        }
    }
}
