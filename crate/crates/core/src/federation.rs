//! Multi-agent reduction: every helper's samples are pooled into one helper
//! estimate `Ȳ = (1/N) Σ n_i θ̂_i`, which turns a federation back into the
//! two-agent scenario.

use thiserror::Error;

use crate::distributions::DistributionSpec;
use crate::theory::{self, ErrorProfile, SampleCount, Scenario, TheoryError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FederationError {
    #[error("a federation needs at least one helper")]
    NoHelpers,
    #[error("agent {0} has zero samples")]
    EmptyAgent(usize),
    #[error(transparent)]
    Theory(#[from] TheoryError),
}

/// One participant: its data distribution and sample count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agent {
    pub spec: DistributionSpec,
    pub n: u64,
}

impl Agent {
    pub fn new(spec: DistributionSpec, n: u64) -> Self {
        Self { spec, n }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FederationScenario {
    focal: Agent,
    helpers: Vec<Agent>,
}

impl FederationScenario {
    pub fn new(focal: Agent, helpers: Vec<Agent>) -> Result<Self, FederationError> {
        if helpers.is_empty() {
            return Err(FederationError::NoHelpers);
        }
        if focal.n == 0 {
            return Err(FederationError::EmptyAgent(0));
        }
        if let Some(i) = helpers.iter().position(|h| h.n == 0) {
            return Err(FederationError::EmptyAgent(i + 1));
        }
        Ok(Self { focal, helpers })
    }

    pub fn focal(&self) -> &Agent {
        &self.focal
    }

    pub fn helpers(&self) -> &[Agent] {
        &self.helpers
    }
}

/// Moments of the pooled helper mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PooledMoments {
    /// `Σ n_i μ_i / N`.
    pub mean: f64,
    /// `N · Var[Ȳ] = Σ n_i σ_i² / N`.
    pub var_y: f64,
    /// `N = Σ n_i`.
    pub total: u64,
}

impl PooledMoments {
    /// `Var[Ȳ] = Σ n_i σ_i² / N²`.
    pub fn var_mean(&self) -> f64 {
        self.var_y / self.total as f64
    }
}

/// Sample-count-weighted moments of the helpers' union.
///
/// Terms are summed in a canonical order (by count, then mean, then
/// variance) so the result does not depend on helper order, and as
/// offsets from the first canonical helper so identical helpers reproduce
/// their own moments exactly.
pub fn pooled_moments(helpers: &[Agent]) -> PooledMoments {
    let mut terms: Vec<(u64, f64, f64)> = helpers
        .iter()
        .map(|h| {
            let m = h.spec.moments();
            (h.n, m.mean, m.variance)
        })
        .collect();
    terms.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then_with(|| a.1.total_cmp(&b.1))
            .then_with(|| a.2.total_cmp(&b.2))
    });
    let total: u64 = terms.iter().map(|t| t.0).sum();
    let n_total = total as f64;
    let (_, mean_ref, var_ref) = terms[0];
    let mut mean_off = 0.0;
    let mut var_off = 0.0;
    for &(n, mean, var) in &terms {
        let w = n as f64 / n_total;
        mean_off += w * (mean - mean_ref);
        var_off += w * (var - var_ref);
    }
    PooledMoments {
        mean: mean_ref + mean_off,
        var_y: (var_ref + var_off).max(0.0),
        total,
    }
}

/// The equivalent two-agent scenario, with `var_y / n_y = Var[Ȳ]`.
pub fn reduce_to_two_agent(f: &FederationScenario) -> Result<Scenario, FederationError> {
    let p = pooled_moments(&f.helpers);
    let fx = f.focal.spec.moments();
    Ok(Scenario::new(
        fx.mean,
        fx.variance,
        f.focal.n,
        p.mean,
        p.var_y,
        SampleCount::Finite(p.total),
    )?)
}

/// Optimal weight of the pooled helper for the focal agent.
pub fn personalized_weight(f: &FederationScenario) -> Result<(f64, ErrorProfile), FederationError> {
    let profile = theory::error_profile(&reduce_to_two_agent(f)?);
    Ok((profile.alpha_star(), profile))
}
