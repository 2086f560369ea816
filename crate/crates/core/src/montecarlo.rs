//! Monte Carlo estimates of the weighted average's error.
//!
//! A run draws, for every trial `t`, the local sample and the helper sample
//! from substream `t` of the run's seed and records the two empirical means.
//! All weights on a curve are evaluated on the same per-trial means (common
//! random numbers). Trials run in parallel; per-trial results are collected
//! in trial order and reduced sequentially, so output is bit-identical for
//! any worker count.

use rayon::prelude::*;
use thiserror::Error;

use crate::distributions::{DistributionSpec, SeedSpec};
use crate::estimation::{self, check_alpha, interpolate, squared_error, EstimationError};
use crate::federation::{pooled_moments, Agent};
use crate::theory::{self, ErrorProfile, SampleCount, Scenario, TheoryError};

pub const MIN_TRIALS: u64 = 100;
pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_K: f64 = 4.0;
/// Points in the fixed validation grid `{0, 0.05, …, 1}`.
pub const VALIDATION_GRID_POINTS: usize = 21;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonteCarloError {
    #[error("infinite helper sample count cannot be simulated")]
    InfiniteSampleCount,
    #[error("at least {MIN_TRIALS} trials are required, got {0}")]
    TooFewTrials(u64),
    #[error("sample counts must be >= 1")]
    EmptySample,
    #[error("federation has no helpers")]
    NoHelpers,
    #[error(transparent)]
    Alpha(#[from] EstimationError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
}

/// Source of the helper estimate `Ȳ`.
#[derive(Debug, Clone, PartialEq)]
pub enum HelperModel {
    /// `n` draws from one distribution.
    Single { spec: DistributionSpec, n: u64 },
    /// Union of every helper's samples; `Ȳ` is the pooled mean.
    Pooled(Vec<Agent>),
}

impl HelperModel {
    pub fn single(spec: DistributionSpec, n_y: SampleCount) -> Result<Self, MonteCarloError> {
        match n_y {
            SampleCount::Infinite => Err(MonteCarloError::InfiniteSampleCount),
            SampleCount::Finite(0) => Err(MonteCarloError::EmptySample),
            SampleCount::Finite(n) => Ok(Self::Single { spec, n }),
        }
    }

    fn validate(&self) -> Result<(), MonteCarloError> {
        match self {
            Self::Single { n: 0, .. } => Err(MonteCarloError::EmptySample),
            Self::Pooled(agents) if agents.is_empty() => Err(MonteCarloError::NoHelpers),
            Self::Pooled(agents) if agents.iter().any(|a| a.n == 0) => {
                Err(MonteCarloError::EmptySample)
            }
            _ => Ok(()),
        }
    }

    /// `(μ_Y, var_y, n_y)` such that `var_y / n_y = Var[Ȳ]`.
    pub fn moments(&self) -> (f64, f64, u64) {
        match self {
            Self::Single { spec, n } => {
                let m = spec.moments();
                (m.mean, m.variance, *n)
            }
            Self::Pooled(agents) => {
                let p = pooled_moments(agents);
                (p.mean, p.var_y, p.total)
            }
        }
    }

    /// Closed-form scenario for this helper paired with a local variable.
    pub fn scenario(&self, x: &DistributionSpec, n_x: u64) -> Result<Scenario, TheoryError> {
        let (mu_y, var_y, n_y) = self.moments();
        let mx = x.moments();
        Scenario::new(
            mx.mean,
            mx.variance,
            n_x,
            mu_y,
            var_y,
            SampleCount::Finite(n_y),
        )
    }

    fn total_samples(&self) -> usize {
        match self {
            Self::Single { n, .. } => *n as usize,
            Self::Pooled(agents) => agents.iter().map(|a| a.n as usize).sum(),
        }
    }
}

/// Simulated error of one estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean_sq_error: f64,
    /// Sample standard deviation of the per-trial squared errors over `√trials`.
    pub std_error: f64,
    pub trials: u64,
    pub seed: SeedSpec,
}

/// Simulated mean and variance of an estimator, with standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMoments {
    pub mean: f64,
    pub mean_se: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Large-sample standard error of the variance, `√((m4 − m2²)/T)`.
    pub variance_se: f64,
}

impl SampleMoments {
    pub fn of(values: &[f64]) -> Self {
        let t = values.len() as f64;
        let mean = estimation::mean_of(values);
        let (mut m2, mut m4) = (0.0, 0.0);
        for v in values {
            let d = v - mean;
            let d2 = d * d;
            m2 += d2;
            m4 += d2 * d2;
        }
        let variance = m2 / (t - 1.0);
        let (m2, m4) = (m2 / t, m4 / t);
        Self {
            mean,
            mean_se: (variance / t).sqrt(),
            variance,
            variance_se: ((m4 - m2 * m2).max(0.0) / t).sqrt(),
        }
    }
}

/// A configured simulation.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub x: DistributionSpec,
    pub n_x: u64,
    pub helper: HelperModel,
    pub trials: u64,
    pub seed: SeedSpec,
}

/// Per-trial empirical means of a finished run, in trial order.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedMeans {
    pub local: Vec<f64>,
    pub helper: Vec<f64>,
    /// Target of the squared error: the true local mean.
    pub target: f64,
    pub seed: SeedSpec,
}

impl Simulation {
    pub fn new(
        x: DistributionSpec,
        n_x: u64,
        helper: HelperModel,
        trials: u64,
        seed: SeedSpec,
    ) -> Result<Self, MonteCarloError> {
        if trials < MIN_TRIALS {
            return Err(MonteCarloError::TooFewTrials(trials));
        }
        if n_x == 0 {
            return Err(MonteCarloError::EmptySample);
        }
        helper.validate()?;
        Ok(Self {
            x,
            n_x,
            helper,
            trials,
            seed,
        })
    }

    pub fn run(&self) -> SimulatedMeans {
        let n_x = self.n_x as usize;
        let cap = n_x.max(self.helper.total_samples());
        let pairs: Vec<(f64, f64)> = (0..self.trials)
            .into_par_iter()
            .map_init(
                || Vec::with_capacity(cap),
                |buf, t| {
                    let mut rng = self.seed.substream_rng(t);
                    buf.clear();
                    self.x.sample_into(n_x, &mut rng, buf);
                    let local = estimation::mean_of(buf);
                    buf.clear();
                    match &self.helper {
                        HelperModel::Single { spec, n } => {
                            spec.sample_into(*n as usize, &mut rng, buf)
                        }
                        HelperModel::Pooled(agents) => {
                            for a in agents {
                                a.spec.sample_into(a.n as usize, &mut rng, buf);
                            }
                        }
                    }
                    (local, estimation::mean_of(buf))
                },
            )
            .collect();
        let (local, helper) = pairs.into_iter().unzip();
        SimulatedMeans {
            local,
            helper,
            target: self.x.mean(),
            seed: self.seed,
        }
    }
}

impl SimulatedMeans {
    pub fn trials(&self) -> u64 {
        self.local.len() as u64
    }

    /// Per-trial weighted averages `(1 − α) X̄_t + α Ȳ_t`.
    pub fn averages(&self, alpha: f64) -> Result<Vec<f64>, MonteCarloError> {
        let a = check_alpha(alpha)?;
        Ok(self
            .local
            .iter()
            .zip(&self.helper)
            .map(|(&x, &y)| interpolate(x, y, a))
            .collect())
    }

    pub fn ese(&self, alpha: f64) -> Result<MonteCarloEstimate, MonteCarloError> {
        let errors: Vec<f64> = self
            .averages(alpha)?
            .into_iter()
            .map(|m| squared_error(m, self.target))
            .collect();
        let s = SampleMoments::of(&errors);
        Ok(MonteCarloEstimate {
            mean_sq_error: s.mean,
            std_error: s.mean_se,
            trials: self.trials(),
            seed: self.seed,
        })
    }

    pub fn curve(&self, alphas: &[f64]) -> Result<Vec<MonteCarloEstimate>, MonteCarloError> {
        alphas.iter().map(|&a| self.ese(a)).collect()
    }

    pub fn estimator_moments(&self, alpha: f64) -> Result<SampleMoments, MonteCarloError> {
        Ok(SampleMoments::of(&self.averages(alpha)?))
    }

    pub fn helper_moments(&self) -> SampleMoments {
        SampleMoments::of(&self.helper)
    }
}

/// Simulated error of `(1 − α) X̄ + α Ȳ` against `E[X]`.
pub fn estimate_ese(
    x: &DistributionSpec,
    n_x: u64,
    y: &DistributionSpec,
    n_y: SampleCount,
    alpha: f64,
    trials: u64,
    seed: SeedSpec,
) -> Result<MonteCarloEstimate, MonteCarloError> {
    check_alpha(alpha)?;
    let sim = Simulation::new(*x, n_x, HelperModel::single(*y, n_y)?, trials, seed)?;
    sim.run().ese(alpha)
}

/// [`estimate_ese`] over a grid of weights, sharing draws across weights.
pub fn estimate_error_curve(
    x: &DistributionSpec,
    n_x: u64,
    y: &DistributionSpec,
    n_y: SampleCount,
    alphas: &[f64],
    trials: u64,
    seed: SeedSpec,
) -> Result<Vec<MonteCarloEstimate>, MonteCarloError> {
    for &a in alphas {
        check_alpha(a)?;
    }
    let sim = Simulation::new(*x, n_x, HelperModel::single(*y, n_y)?, trials, seed)?;
    sim.run().curve(alphas)
}

/// `{0, 0.05, …, 1}`.
pub fn validation_grid() -> Vec<f64> {
    let last = (VALIDATION_GRID_POINTS - 1) as f64;
    (0..VALIDATION_GRID_POINTS)
        .map(|i| i as f64 / last)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationPoint {
    pub alpha: f64,
    pub estimate: MonteCarloEstimate,
    pub closed_form: f64,
    pub abs_diff: f64,
    /// `k · std_error` plus a floating-point rounding allowance.
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub k: f64,
    pub trials: u64,
    pub seed: SeedSpec,
    pub profile: ErrorProfile,
    pub points: Vec<ValidationPoint>,
    pub passed: bool,
}

/// Checks simulation against the closed form on the 21-point grid.
pub fn validate_scenario(
    x: &DistributionSpec,
    n_x: u64,
    helper: &HelperModel,
    trials: u64,
    seed: SeedSpec,
    k: f64,
) -> Result<ValidationReport, MonteCarloError> {
    let profile = theory::error_profile(&helper.scenario(x, n_x)?);
    validate_against(x, n_x, helper, trials, seed, k, &profile)
}

/// As [`validate_scenario`] with a caller-supplied closed form, e.g. a
/// deliberately wrong one to check that the harness can fail.
pub fn validate_against(
    x: &DistributionSpec,
    n_x: u64,
    helper: &HelperModel,
    trials: u64,
    seed: SeedSpec,
    k: f64,
    profile: &ErrorProfile,
) -> Result<ValidationReport, MonteCarloError> {
    let means = Simulation::new(*x, n_x, helper.clone(), trials, seed)?.run();
    // Magnitude of the quantities whose difference forms each error.
    let scale = means.target.abs().max(helper.moments().0.abs());
    let mut points = Vec::with_capacity(VALIDATION_GRID_POINTS);
    for alpha in validation_grid() {
        let estimate = means.ese(alpha)?;
        let closed_form = theory::ese_of_alpha(profile, alpha)?;
        let abs_diff = (estimate.mean_sq_error - closed_form).abs();
        let e = closed_form.abs().max(estimate.mean_sq_error.abs());
        let rounding = 64.0 * f64::EPSILON * (e + 2.0 * scale * e.sqrt());
        let tolerance = k * estimate.std_error + rounding;
        points.push(ValidationPoint {
            alpha,
            estimate,
            closed_form,
            abs_diff,
            tolerance,
            pass: abs_diff <= tolerance,
        });
    }
    let passed = points.iter().all(|p| p.pass);
    Ok(ValidationReport {
        k,
        trials,
        seed,
        profile: *profile,
        points,
        passed,
    })
}
