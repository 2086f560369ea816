//! Closed-form error analysis of the weighted model average.
//!
//! With `e0 = Var[X̄]` (error of the local mean) and
//! `e1 = (μ_Y − μ_X)² + Var[Ȳ]` (error of the helper mean), the error of the
//! average with helper weight `α` is the convex parabola
//! `e(α) = (1 − α)² e0 + α² e1`, minimized at `α* = e0 / (e0 + e1)` where it
//! equals `(1 − α*) e0`. Everything else here is a rearrangement of those two
//! facts.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::distributions::DistributionSpec;
use crate::estimation::{check_alpha, EstimationError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoryError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Alpha(#[from] EstimationError),
    #[error("optimal weight must be > 0 for the reduced error form, got {0}")]
    NonPositiveAlphaStar(f64),
    #[error("the local variance is zero; the weight bounds are undefined")]
    ZeroLocalVariance,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// A sample count that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SampleCount {
    Finite(u64),
    Infinite,
}

impl SampleCount {
    pub fn finite(self) -> Option<u64> {
        match self {
            Self::Finite(n) => Some(n),
            Self::Infinite => None,
        }
    }
}

impl fmt::Display for SampleCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(n) => write!(f, "{n}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for SampleCount {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if matches!(
            t.to_ascii_lowercase().as_str(),
            "inf" | "+inf" | "infinity" | "∞"
        ) {
            return Ok(Self::Infinite);
        }
        match t.parse::<u64>() {
            Ok(0) => Err("sample count must be >= 1".to_string()),
            Ok(n) => Ok(Self::Finite(n)),
            Err(_) => Err(format!("expected a positive integer or `inf`, got `{s}`")),
        }
    }
}

/// A non-negative quantity that may be `+∞`, kept out of float arithmetic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(f64),
    Infinite,
}

impl Extended {
    /// `numerator / denominator` with `x / 0 = +∞` for `x > 0`.
    pub fn ratio(numerator: f64, denominator: f64) -> Self {
        if denominator == 0.0 {
            Self::Infinite
        } else {
            Self::Finite(numerator / denominator)
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(v),
            Self::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinite)
    }

    pub fn min(self, other: Self) -> Self {
        match (self, other) {
            (Self::Finite(a), Self::Finite(b)) => Self::Finite(a.min(b)),
            (Self::Finite(a), Self::Infinite) | (Self::Infinite, Self::Finite(a)) => {
                Self::Finite(a)
            }
            (Self::Infinite, Self::Infinite) => Self::Infinite,
        }
    }

    /// `x < self`, with everything finite below `+∞`.
    pub fn exceeds(self, x: f64) -> bool {
        match self {
            Self::Finite(v) => x < v,
            Self::Infinite => true,
        }
    }

    /// Reciprocal with `1/∞ = 0`; `None` for `1/0`.
    pub fn recip(self) -> Option<f64> {
        match self {
            Self::Infinite => Some(0.0),
            Self::Finite(0.0) => None,
            Self::Finite(v) => Some(1.0 / v),
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(v) => write!(f, "{v}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

/// The two-agent problem: local variable X with `n_x` samples, helper
/// variable Y with `n_y` samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub mu_x: f64,
    pub var_x: f64,
    pub n_x: u64,
    pub mu_y: f64,
    pub var_y: f64,
    pub n_y: SampleCount,
}

impl Scenario {
    pub fn new(
        mu_x: f64,
        var_x: f64,
        n_x: u64,
        mu_y: f64,
        var_y: f64,
        n_y: SampleCount,
    ) -> Result<Self, TheoryError> {
        let bad = |msg: String| Err(TheoryError::InvalidScenario(msg));
        for (name, v) in [
            ("mu_x", mu_x),
            ("var_x", var_x),
            ("mu_y", mu_y),
            ("var_y", var_y),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite, got {v}"));
            }
        }
        if var_x < 0.0 || var_y < 0.0 {
            return bad(format!(
                "variances must be >= 0, got var_x={var_x}, var_y={var_y}"
            ));
        }
        if n_x == 0 || n_y == SampleCount::Finite(0) {
            return bad("sample counts must be >= 1".to_string());
        }
        let s = Self {
            mu_x,
            var_x,
            n_x,
            mu_y,
            var_y,
            n_y,
        };
        if !(s.bias_sq() + s.var_helper_mean()).is_finite() {
            return bad("helper error overflows".to_string());
        }
        Ok(s)
    }

    /// Scenario realized by two distributions.
    pub fn from_specs(
        x: &DistributionSpec,
        n_x: u64,
        y: &DistributionSpec,
        n_y: SampleCount,
    ) -> Result<Self, TheoryError> {
        let (mx, my) = (x.moments(), y.moments());
        Self::new(mx.mean, mx.variance, n_x, my.mean, my.variance, n_y)
    }

    pub fn bias_sq(&self) -> f64 {
        let d = self.mu_y - self.mu_x;
        d * d
    }

    /// `Var[X̄]`.
    pub fn var_local_mean(&self) -> f64 {
        self.var_x / self.n_x as f64
    }

    /// `Var[Ȳ]`, zero for infinitely many helper samples.
    pub fn var_helper_mean(&self) -> f64 {
        match self.n_y {
            SampleCount::Finite(n) => self.var_y / n as f64,
            SampleCount::Infinite => 0.0,
        }
    }
}

/// Error of the local mean: `var_x / n_x`.
pub fn ese0(s: &Scenario) -> f64 {
    s.var_local_mean()
}

/// Error of the helper mean: squared bias plus `Var[Ȳ]`.
pub fn ese1(s: &Scenario) -> f64 {
    s.bias_sq() + s.var_helper_mean()
}

/// Endpoint errors and the optimal weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorProfile {
    e0: f64,
    e1: f64,
    alpha_star: f64,
    degenerate: bool,
}

impl ErrorProfile {
    /// Builds a profile from the two endpoint errors. When both are zero
    /// every weight is optimal; the profile is flagged degenerate and
    /// reports `α* = 0`.
    pub fn from_errors(e0: f64, e1: f64) -> Result<Self, TheoryError> {
        if !(e0.is_finite() && e1.is_finite() && e0 >= 0.0 && e1 >= 0.0) {
            return Err(TheoryError::InvalidParameter(format!(
                "endpoint errors must be finite and >= 0, got e0={e0}, e1={e1}"
            )));
        }
        let total = e0 + e1;
        let (alpha_star, degenerate) = if total > 0.0 {
            (e0 / total, false)
        } else {
            (0.0, true)
        };
        Ok(Self {
            e0,
            e1,
            alpha_star,
            degenerate,
        })
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    pub fn e1(&self) -> f64 {
        self.e1
    }

    pub fn alpha_star(&self) -> f64 {
        self.alpha_star
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Minimal error `(1 − α*) e0`.
    pub fn ese_at_optimum(&self) -> f64 {
        (1.0 - self.alpha_star) * self.e0
    }

    /// Largest weight whose error does not exceed `e0`.
    pub fn break_even_weight(&self) -> f64 {
        2.0 * self.alpha_star
    }

    /// `e(α) / e0`; `None` when `e0 = 0`.
    pub fn ratio_to_local(&self, alpha: f64) -> Result<Option<f64>, TheoryError> {
        let e = ese_of_alpha(self, alpha)?;
        Ok((self.e0 > 0.0).then(|| e / self.e0))
    }
}

pub fn error_profile(s: &Scenario) -> ErrorProfile {
    // A valid scenario always has finite, non-negative endpoint errors.
    ErrorProfile::from_errors(ese0(s), ese1(s)).expect("scenario invariants")
}

/// `(1 − α)² e0 + α² e1`.
pub fn ese_of_alpha(profile: &ErrorProfile, alpha: f64) -> Result<f64, TheoryError> {
    let a = check_alpha(alpha)?;
    let keep = 1.0 - a;
    Ok(keep * keep * profile.e0 + a * a * profile.e1)
}

/// The same error written through `α*` alone: `(1 + α (α/α* − 2)) e0`.
pub fn ese_of_alpha_reduced(alpha: f64, alpha_star: f64, e0: f64) -> Result<f64, TheoryError> {
    if !(alpha_star > 0.0) {
        return Err(TheoryError::NonPositiveAlphaStar(alpha_star));
    }
    Ok((1.0 + alpha * (alpha / alpha_star - 2.0)) * e0)
}

/// The two simple upper bounds on the optimal weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperBounds {
    /// `Var[X̄] / bias²`.
    pub bias: Extended,
    /// `Var[X̄] / Var[Ȳ]`.
    pub variance: Extended,
}

impl UpperBounds {
    pub fn min(&self) -> Extended {
        self.bias.min(self.variance)
    }
}

/// `α* < min(Var[X̄]/bias², Var[X̄]/Var[Ȳ])`, reading `x/0` as `+∞`.
pub fn alpha_star_upper_bounds(s: &Scenario) -> Result<UpperBounds, TheoryError> {
    if s.var_x <= 0.0 {
        return Err(TheoryError::ZeroLocalVariance);
    }
    let v = s.var_local_mean();
    Ok(UpperBounds {
        bias: Extended::ratio(v, s.bias_sq()),
        variance: Extended::ratio(v, s.var_helper_mean()),
    })
}

/// Worst error over `α ∈ [0, 1]`: `e0` if `e0 > 0` and `α* ≥ ½`, else `e1`.
pub fn max_ese(profile: &ErrorProfile) -> f64 {
    if profile.e0 > 0.0 && profile.alpha_star >= 0.5 {
        profile.e0
    } else {
        profile.e1
    }
}

/// Optimal weight from the two ratios plotted on the weight contour map:
/// `α* = 1 / (1 + bias²/Var[X̄] + Var[Ȳ]/Var[X̄])`. Both ratios must be
/// positive; `+∞` means the corresponding term vanishes.
pub fn alpha_star_from_ratios(
    varx_over_bias2: Extended,
    varx_over_vary: Extended,
) -> Result<f64, TheoryError> {
    let terms = [varx_over_bias2, varx_over_vary].map(|r| match r {
        Extended::Finite(v) if !(v > 0.0) || v.is_nan() => None,
        _ => r.recip(),
    });
    match terms {
        [Some(a), Some(b)] => Ok(1.0 / (1.0 + a + b)),
        _ => Err(TheoryError::InvalidParameter(format!(
            "ratios must be > 0, got ({varx_over_bias2}, {varx_over_vary})"
        ))),
    }
}

/// Optimal error under the random-means model: both true means drawn
/// independently with variance `sigma2`, both variables with noise variance
/// `mu_e`.
///
/// `(2 n_y² σ² + μ_e n_y) / (n_y (n_y + n_x) + 2 n_x n_y² σ² / μ_e)`
pub fn donahue_mse(n_x: u64, n_y: u64, sigma2: f64, mu_e: f64) -> Result<f64, TheoryError> {
    if n_x == 0 || n_y == 0 {
        return Err(TheoryError::InvalidParameter(
            "sample counts must be >= 1".into(),
        ));
    }
    if !(sigma2 >= 0.0 && sigma2.is_finite()) {
        return Err(TheoryError::InvalidParameter(format!(
            "sigma2 must be >= 0, got {sigma2}"
        )));
    }
    if !(mu_e > 0.0 && mu_e.is_finite()) {
        return Err(TheoryError::InvalidParameter(format!(
            "mu_e must be > 0, got {mu_e}"
        )));
    }
    let (nx, ny) = (n_x as f64, n_y as f64);
    let num = 2.0 * ny * ny * sigma2 + mu_e * ny;
    let den = ny * (ny + nx) + 2.0 * nx * ny * ny * sigma2 / mu_e;
    Ok(num / den)
}

/// The two-agent scenario matching the random-means model in expectation:
/// squared bias `2σ²` and both variances `μ_e`.
pub fn donahue_scenario(
    n_x: u64,
    n_y: u64,
    sigma2: f64,
    mu_e: f64,
) -> Result<Scenario, TheoryError> {
    Scenario::new(
        0.0,
        mu_e,
        n_x,
        (2.0 * sigma2).sqrt(),
        mu_e,
        SampleCount::Finite(n_y),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scen(mu_x: f64, var_x: f64, n_x: u64, mu_y: f64, var_y: f64, n_y: SampleCount) -> Scenario {
        Scenario::new(mu_x, var_x, n_x, mu_y, var_y, n_y).unwrap()
    }

    use SampleCount::{Finite, Infinite};

    #[test]
    fn ese0_examples() {
        assert_eq!(ese0(&scen(0.0, 4.0, 16, 0.0, 1.0, Finite(1))), 0.25);
        assert_eq!(ese0(&scen(0.0, 0.0, 7, 0.0, 1.0, Finite(1))), 0.0);
        assert_eq!(ese0(&scen(0.0, 1.0, 10, 0.0, 1.0, Finite(1))), 0.1);
    }

    #[test]
    fn ese1_examples() {
        assert_eq!(ese1(&scen(0.0, 1.0, 1, 0.5, 1.0, Finite(4))), 0.5);
        assert_eq!(ese1(&scen(2.0, 1.0, 1, 2.0, 3.0, Infinite)), 0.0);
        assert_eq!(ese1(&scen(0.0, 1.0, 1, 1.0, 0.0, Finite(9))), 1.0);
    }

    #[test]
    fn scenario_validation() {
        assert!(Scenario::new(0.0, -1.0, 1, 0.0, 0.0, Finite(1)).is_err());
        assert!(Scenario::new(0.0, 1.0, 0, 0.0, 0.0, Finite(1)).is_err());
        assert!(Scenario::new(0.0, 1.0, 1, 0.0, 0.0, Finite(0)).is_err());
        assert!(Scenario::new(f64::NAN, 1.0, 1, 0.0, 0.0, Finite(1)).is_err());
        assert!(Scenario::new(0.0, 1.0, 1, 1e200, 0.0, Infinite).is_err());
    }

    #[test]
    fn optimal_weight_examples() {
        // No bias, equal variances, six times the helper samples.
        let p = error_profile(&scen(0.0, 1.0, 10, 0.0, 1.0, Finite(60)));
        assert!((p.alpha_star() - 6.0 / 7.0).abs() < 1e-15);
        assert_eq!(format!("{:.2}", p.alpha_star()), "0.86");

        let p = error_profile(&scen(0.0, 0.0, 10, 1.0, 1.0, Finite(60)));
        assert_eq!(p.alpha_star(), 0.0);
        assert!(!p.is_degenerate());

        // bias² = var_x, n_x = 50, constant helper.
        let p = error_profile(&scen(0.0, 1.0, 50, 1.0, 0.0, Infinite));
        assert!((p.alpha_star() - 0.02 / 1.02).abs() < 1e-15);
        assert_eq!(format!("{:.2}", p.alpha_star()), "0.02");
    }

    #[test]
    fn degenerate_profile_reports_zero() {
        let p = error_profile(&scen(1.0, 0.0, 3, 1.0, 0.0, Finite(2)));
        assert!(p.is_degenerate());
        assert_eq!(p.alpha_star(), 0.0);
        assert_eq!(p.ese_at_optimum(), 0.0);
        assert_eq!(max_ese(&p), 0.0);
    }

    #[test]
    fn ese_of_alpha_endpoints_and_midpoint() {
        let p = ErrorProfile::from_errors(1.0, 3.0).unwrap();
        assert_eq!(ese_of_alpha(&p, 0.0).unwrap(), 1.0);
        assert_eq!(ese_of_alpha(&p, 1.0).unwrap(), 3.0);
        assert_eq!(ese_of_alpha(&p, 0.5).unwrap(), 1.0);
        assert!(ese_of_alpha(&p, 1.5).is_err());
        assert!(ese_of_alpha(&p, -0.1).is_err());
    }

    #[test]
    fn reduced_form_examples() {
        let p = ErrorProfile::from_errors(1.0, 3.0).unwrap();
        let a = p.alpha_star();
        let at_opt = ese_of_alpha_reduced(a, a, 1.0).unwrap();
        assert!((at_opt - (1.0 - a)).abs() < 1e-15);
        assert_eq!(ese_of_alpha_reduced(2.0 * a, a, 1.0).unwrap(), 1.0);
        // α* = 1/26, α = ½ → 6.5 e0.
        let v = ese_of_alpha_reduced(0.5, 1.0 / 26.0, 1.0).unwrap();
        assert!((v - 6.5).abs() < 1e-12);
        assert_eq!(format!("{v:.2}"), "6.50");
        assert!(matches!(
            ese_of_alpha_reduced(0.5, 0.0, 1.0),
            Err(TheoryError::NonPositiveAlphaStar(_))
        ));
    }

    #[test]
    fn upper_bound_examples() {
        // Var[X̄] = 0.1, bias² = 0.25, constant helper.
        let s = scen(0.0, 1.0, 10, 0.5, 0.0, Finite(1));
        let b = alpha_star_upper_bounds(&s).unwrap();
        assert!((b.bias.finite().unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(b.variance, Extended::Infinite);
        let a = error_profile(&s).alpha_star();
        assert!((a - 0.1 / 0.35).abs() < 1e-15);
        assert!(b.min().exceeds(a));

        let s = scen(0.0, 2.0, 2, 0.0, 1.0, Finite(1));
        assert_eq!(
            alpha_star_upper_bounds(&s).unwrap().bias,
            Extended::Infinite
        );

        // Var[X̄] = bias² = Var[Ȳ] = 1.
        let s = scen(0.0, 1.0, 1, 1.0, 1.0, Finite(1));
        let b = alpha_star_upper_bounds(&s).unwrap();
        assert_eq!(
            (b.bias, b.variance),
            (Extended::Finite(1.0), Extended::Finite(1.0))
        );
        let a = error_profile(&s).alpha_star();
        assert!((a - 1.0 / 3.0).abs() < 1e-15 && b.min().exceeds(a));

        let s = scen(0.0, 0.0, 1, 1.0, 1.0, Finite(1));
        assert_eq!(
            alpha_star_upper_bounds(&s),
            Err(TheoryError::ZeroLocalVariance)
        );
    }

    #[test]
    fn max_ese_examples() {
        let p = ErrorProfile::from_errors(1.0, 1.0).unwrap();
        assert_eq!(p.alpha_star(), 0.5);
        assert_eq!(max_ese(&p), 1.0);
        // α* = 0.2 with e0 = 1 forces e1 = (1/0.2 − 1) e0 = 4.
        let p = ErrorProfile::from_errors(1.0, 4.0).unwrap();
        assert!((p.alpha_star() - 0.2).abs() < 1e-15);
        assert_eq!(max_ese(&p), 4.0);
        let p = ErrorProfile::from_errors(0.0, 2.5).unwrap();
        assert_eq!(max_ese(&p), 2.5);
    }

    #[test]
    fn donahue_examples() {
        // Substitution oracle: e0 = μ_e/n_x, e1 = 2σ² + μ_e/n_y, e* = e0 e1 / (e0 + e1).
        let oracle = |nx: f64, ny: f64, s2: f64, me: f64| {
            let e0 = me / nx;
            let e1 = 2.0 * s2 + me / ny;
            e0 * e1 / (e0 + e1)
        };
        assert_eq!(oracle(1.0, 1.0, 1.0, 1.0), 0.75);
        assert!((oracle(4.0, 2.0, 0.5, 1.0) - 6.0 / 28.0).abs() < 1e-15);

        assert!((donahue_mse(1, 1, 1.0, 1.0).unwrap() - 0.75).abs() < 1e-15);
        assert!((donahue_mse(4, 2, 0.5, 1.0).unwrap() - 6.0 / 28.0).abs() < 1e-15);
        let v = donahue_mse(3, 5, 0.0, 2.0).unwrap();
        assert!((v - 2.0 / 8.0).abs() < 1e-15);
        assert!(donahue_mse(1, 1, 1.0, 0.0).is_err());
    }

    #[test]
    fn contour_formula_examples() {
        let a = alpha_star_from_ratios(Extended::Finite(1.0), Extended::Infinite).unwrap();
        assert_eq!(a, 0.5);
        let a = alpha_star_from_ratios(Extended::Infinite, Extended::Infinite).unwrap();
        assert_eq!(a, 1.0);
        let a = alpha_star_from_ratios(Extended::Finite(0.01), Extended::Finite(1e6)).unwrap();
        assert!((a - 1.0 / 101.000001).abs() < 1e-15);
        assert_eq!(format!("{a:.4}"), "0.0099");
        assert!(alpha_star_from_ratios(Extended::Finite(0.0), Extended::Infinite).is_err());
        assert!(alpha_star_from_ratios(Extended::Finite(-1.0), Extended::Infinite).is_err());
    }

    #[test]
    fn contour_formula_agrees_with_profile() {
        let s = scen(0.3, 2.0, 7, -0.4, 5.0, Finite(3));
        let v = s.var_local_mean();
        let a = alpha_star_from_ratios(
            Extended::ratio(v, s.bias_sq()),
            Extended::ratio(v, s.var_helper_mean()),
        )
        .unwrap();
        assert!((a - error_profile(&s).alpha_star()).abs() < 1e-14);
    }

    #[test]
    fn sample_count_parsing() {
        assert_eq!("inf".parse::<SampleCount>(), Ok(Infinite));
        assert_eq!("+Inf".parse::<SampleCount>(), Ok(Infinite));
        assert_eq!(" 12 ".parse::<SampleCount>(), Ok(Finite(12)));
        assert!("0".parse::<SampleCount>().is_err());
        assert!("-3".parse::<SampleCount>().is_err());
        assert_eq!(Infinite.to_string(), "inf");
    }
}
