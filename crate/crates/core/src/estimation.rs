//! Estimators built from realized samples: empirical means, the weighted
//! model average and shrinkage toward a fixed anchor.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimationError {
    #[error("sample set `{0}` is empty")]
    EmptySample(SampleSource),
    #[error("weight alpha must lie in [0, 1], got {0}")]
    AlphaOutOfRange(f64),
}

/// Where a sample set came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleSource {
    Local,
    Helper,
    Agent(usize),
}

impl std::fmt::Display for SampleSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Local => f.write_str("X"),
            Self::Helper => f.write_str("Y"),
            Self::Agent(i) => write!(f, "agent {i}"),
        }
    }
}

/// A non-empty set of observations.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    values: Vec<f64>,
    source: SampleSource,
}

impl SampleSet {
    pub fn new(values: Vec<f64>, source: SampleSource) -> Result<Self, EstimationError> {
        if values.is_empty() {
            return Err(EstimationError::EmptySample(source));
        }
        Ok(Self { values, source })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> SampleSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

pub fn empirical_mean(s: &SampleSet) -> f64 {
    mean_of(&s.values)
}

/// Arithmetic mean of a slice, summed in index order with Neumaier
/// compensation. Returns NaN for an empty slice; use [`SampleSet`] where
/// emptiness must be an error.
pub fn mean_of(values: &[f64]) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for &v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    (sum + comp) / values.len() as f64
}

pub fn check_alpha(alpha: f64) -> Result<f64, EstimationError> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(alpha)
    } else {
        Err(EstimationError::AlphaOutOfRange(alpha))
    }
}

/// `(1 - alpha) * local + alpha * helper`.
pub fn weighted_average(local: f64, helper: f64, alpha: f64) -> Result<f64, EstimationError> {
    check_alpha(alpha)?;
    Ok(interpolate(local, helper, alpha))
}

/// Unchecked form of [`weighted_average`] for hot loops that validated
/// `alpha` once up front.
#[inline]
pub(crate) fn interpolate(local: f64, helper: f64, alpha: f64) -> f64 {
    (1.0 - alpha) * local + alpha * helper
}

/// Shrinks `local` toward `anchor`; with `anchor = 0` this is `(1 - alpha) * local`.
pub fn shrink(local: f64, anchor: f64, alpha: f64) -> Result<f64, EstimationError> {
    weighted_average(local, anchor, alpha)
}

pub fn squared_error(estimate: f64, target: f64) -> f64 {
    let d = estimate - target;
    d * d
}
