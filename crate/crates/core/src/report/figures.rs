//! Plot data: the normalized error curve with its linear bounds, and the
//! optimal weight over a log-spaced grid of the two ratio bounds.

use crate::report::real;
use crate::theory::{self, ErrorProfile, Extended, TheoryError};

pub const DEFAULT_CURVE_POINTS: usize = 1001;
pub const DEFAULT_CONTOUR_POINTS: usize = 61;
pub const DEFAULT_CONTOUR_LOG10: (f64, f64) = (-3.0, 3.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub alpha: f64,
    /// `e(α) / e0`.
    pub ese_ratio: f64,
    /// `1 − 2α`, valid for every weight.
    pub lower_bound: f64,
    /// `1 − α`, valid for `α ≤ α*` only.
    pub upper_bound_segment: Option<f64>,
}

pub fn curve_point(profile: &ErrorProfile, alpha: f64) -> Result<CurvePoint, TheoryError> {
    if !(profile.alpha_star() > 0.0) {
        return Err(TheoryError::NonPositiveAlphaStar(profile.alpha_star()));
    }
    let ese_ratio = theory::ese_of_alpha(profile, alpha)? / profile.e0();
    Ok(CurvePoint {
        alpha,
        ese_ratio,
        lower_bound: 1.0 - 2.0 * alpha,
        upper_bound_segment: (alpha <= profile.alpha_star()).then_some(1.0 - alpha),
    })
}

/// Uniform grid of `points` weights on `[0, 1]`.
pub fn error_curve(profile: &ErrorProfile, points: usize) -> Result<Vec<CurvePoint>, TheoryError> {
    if points < 2 {
        return Err(TheoryError::InvalidParameter(format!(
            "curve needs >= 2 points, got {points}"
        )));
    }
    let last = (points - 1) as f64;
    (0..points)
        .map(|i| curve_point(profile, i as f64 / last))
        .collect()
}

pub const CURVE_HEADER: [&str; 4] = ["alpha", "ese_ratio", "lower_bound", "upper_bound_segment"];

pub fn curve_records(points: &[CurvePoint]) -> Vec<Vec<String>> {
    points
        .iter()
        .map(|p| {
            vec![
                real(p.alpha),
                real(p.ese_ratio),
                real(p.lower_bound),
                p.upper_bound_segment.map(real).unwrap_or_default(),
            ]
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourCell {
    /// `Var[X̄] / bias²`.
    pub varx_over_bias2: f64,
    /// `Var[X̄] / Var[Ȳ]`.
    pub varx_over_vary: f64,
    pub alpha_star: f64,
}

/// `points` values spaced evenly in log10 between `10^lo` and `10^hi`.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>, TheoryError> {
    if points < 2 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(TheoryError::InvalidParameter(format!(
            "log grid needs lo < hi and >= 2 points, got [{lo}, {hi}] x {points}"
        )));
    }
    let step = (hi - lo) / (points - 1) as f64;
    Ok((0..points)
        .map(|i| 10f64.powf(lo + step * i as f64))
        .collect())
}

/// Optimal weight on the square grid `axis × axis`, row-major in the
/// bias ratio.
pub fn contour_grid(axis: &[f64]) -> Result<Vec<ContourCell>, TheoryError> {
    let mut cells = Vec::with_capacity(axis.len() * axis.len());
    for &b in axis {
        for &v in axis {
            cells.push(ContourCell {
                varx_over_bias2: b,
                varx_over_vary: v,
                alpha_star: theory::alpha_star_from_ratios(
                    Extended::Finite(b),
                    Extended::Finite(v),
                )?,
            });
        }
    }
    Ok(cells)
}

pub const CONTOUR_HEADER: [&str; 3] = ["varx_over_bias2", "varx_over_vary", "alpha_star"];

pub fn contour_records(cells: &[ContourCell]) -> Vec<Vec<String>> {
    cells
        .iter()
        .map(|c| {
            vec![
                real(c.varx_over_bias2),
                real(c.varx_over_vary),
                real(c.alpha_star),
            ]
        })
        .collect()
}
