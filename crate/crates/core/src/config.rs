//! Scenario files and run configuration.
//!
//! A scenario file is TOML:
//!
//! ```toml
//! name = "biased-helper"
//! n_x = 10
//! n_y = 10              # or "inf"
//! alphas = [0.2, 0.5]
//! trials = 100000
//! seed = 42
//!
//! [x]
//! family = "normal"
//! params = [0.0, 1.0]
//!
//! [y]                   # exactly one of: family/params, constant, union
//! family = "normal"
//! params = [0.5, 1.0]
//! # constant = 0.5
//! # union = [{ family = "normal", params = [0.0, 1.0], n = 10 }]
//!
//! [contour]
//! log10_min = -3.0
//! log10_max = 3.0
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::distributions::{DistributionSpec, SeedSpec};
use crate::federation::{self, Agent, FederationScenario};
use crate::montecarlo::{HelperModel, MonteCarloError, DEFAULT_K, DEFAULT_TRIALS};
use crate::theory::{SampleCount, Scenario};

pub const SEED_ENV: &str = "COLLAB_AVG_SEED";
pub const DEFAULT_SEED: u64 = 20_210_101;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read scenario file {0}: {1}")]
    Read(PathBuf, std::io::Error),
    #[error("malformed scenario file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError::Invalid(msg.into()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    x: Option<RawDistribution>,
    n_x: Option<u64>,
    y: Option<RawHelper>,
    n_y: Option<RawCount>,
    alphas: Option<Vec<f64>>,
    trials: Option<u64>,
    seed: Option<u64>,
    k: Option<f64>,
    grid: Option<usize>,
    contour: Option<RawContour>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDistribution {
    family: String,
    #[serde(default)]
    params: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHelper {
    family: Option<String>,
    params: Option<Vec<f64>>,
    constant: Option<f64>,
    union: Option<Vec<RawAgent>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAgent {
    family: String,
    #[serde(default)]
    params: Vec<f64>,
    n: u64,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawCount {
    Int(u64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawContour {
    log10_min: f64,
    log10_max: f64,
}

/// The helper side of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum HelperSpec {
    Distribution {
        spec: DistributionSpec,
        n_y: SampleCount,
    },
    Union(Vec<Agent>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioFile {
    pub name: String,
    pub local: Option<Agent>,
    pub helper: Option<HelperSpec>,
    pub alphas: Vec<f64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub k: Option<f64>,
    pub grid: Option<usize>,
    pub contour: Option<(f64, f64)>,
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError::Read(path.to_path_buf(), e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw: RawScenario = toml::from_str(text)?;
        let local = match (raw.x, raw.n_x) {
            (Some(x), Some(n)) => {
                if n == 0 {
                    return invalid("n_x must be >= 1");
                }
                Some(Agent::new(build(&x.family, &x.params)?, n))
            }
            (None, None) => None,
            (Some(_), None) => return invalid("`x` given without `n_x`"),
            (None, Some(_)) => return invalid("`n_x` given without `x`"),
        };
        let n_y = raw.n_y.map(parse_count).transpose()?;
        let helper = raw.y.map(|y| helper_spec(y, n_y)).transpose()?;
        let alphas = raw.alphas.unwrap_or_else(|| vec![0.2, 0.5]);
        if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return invalid(format!("alphas must lie in [0, 1], got {a}"));
        }
        if let Some(k) = raw.k {
            if !(k > 0.0 && k.is_finite()) {
                return invalid(format!("k must be > 0, got {k}"));
            }
        }
        let contour = raw.contour.map(|c| (c.log10_min, c.log10_max));
        Ok(Self {
            name: raw.name.unwrap_or_else(|| "scenario".to_string()),
            local,
            helper,
            alphas,
            trials: raw.trials,
            seed: raw.seed,
            k: raw.k,
            grid: raw.grid,
            contour,
        })
    }

    fn local(&self) -> Result<&Agent, ConfigError> {
        self.local
            .as_ref()
            .ok_or_else(|| ConfigError::Invalid("scenario needs `x` and `n_x`".into()))
    }

    fn helper(&self) -> Result<&HelperSpec, ConfigError> {
        self.helper
            .as_ref()
            .ok_or_else(|| ConfigError::Invalid("scenario needs a `y` section".into()))
    }

    /// Closed-form two-agent scenario; a union helper is reduced first.
    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let x = self.local()?;
        let result = match self.helper()? {
            HelperSpec::Distribution { spec, n_y } => {
                Scenario::from_specs(&x.spec, x.n, spec, *n_y)
                    .map_err(|e| ConfigError::Invalid(e.to_string()))
            }
            HelperSpec::Union(_) => federation::reduce_to_two_agent(&self.federation()?)
                .map_err(|e| ConfigError::Invalid(e.to_string())),
        };
        result
    }

    pub fn federation(&self) -> Result<FederationScenario, ConfigError> {
        let x = self.local()?;
        match self.helper()? {
            HelperSpec::Union(agents) => FederationScenario::new(*x, agents.clone())
                .map_err(|e| ConfigError::Invalid(e.to_string())),
            HelperSpec::Distribution { .. } => invalid("federation needs `y.union`"),
        }
    }

    /// Local variable and simulated helper for Monte Carlo runs.
    pub fn simulation_parts(&self) -> Result<(Agent, HelperModel), ConfigError> {
        let x = *self.local()?;
        let helper = match self.helper()? {
            HelperSpec::Distribution { spec, n_y } => {
                HelperModel::single(*spec, *n_y).map_err(|e| match e {
                    MonteCarloError::InfiniteSampleCount => ConfigError::Invalid(
                        "n_y = inf cannot be simulated; give a finite n_y".into(),
                    ),
                    other => ConfigError::Invalid(other.to_string()),
                })?
            }
            HelperSpec::Union(agents) => HelperModel::Pooled(agents.clone()),
        };
        Ok((x, helper))
    }
}

fn build(family: &str, params: &[f64]) -> Result<DistributionSpec, ConfigError> {
    DistributionSpec::from_name(family, params).map_err(|e| ConfigError::Invalid(e.to_string()))
}

fn parse_count(raw: RawCount) -> Result<SampleCount, ConfigError> {
    match raw {
        RawCount::Int(0) => invalid("n_y must be >= 1"),
        RawCount::Int(n) => Ok(SampleCount::Finite(n)),
        RawCount::Text(s) => s
            .parse()
            .map_err(|e| ConfigError::Invalid(format!("n_y: {e}"))),
    }
}

fn helper_spec(y: RawHelper, n_y: Option<SampleCount>) -> Result<HelperSpec, ConfigError> {
    match (y.family, y.params, y.constant, y.union) {
        (Some(family), params, None, None) => {
            let spec = build(&family, &params.unwrap_or_default())?;
            let n_y = n_y.ok_or_else(|| ConfigError::Invalid("`y.family` needs `n_y`".into()))?;
            Ok(HelperSpec::Distribution { spec, n_y })
        }
        (None, None, Some(c), None) => Ok(HelperSpec::Distribution {
            spec: build("point_mass", &[c])?,
            // A constant has no sampling noise, so any count gives the same helper.
            n_y: n_y.unwrap_or(SampleCount::Finite(1)),
        }),
        (None, None, None, Some(members)) => {
            if members.is_empty() {
                return invalid("`y.union` needs at least one helper");
            }
            let agents = members
                .into_iter()
                .map(|m| {
                    if m.n == 0 {
                        return invalid("union members need n >= 1");
                    }
                    Ok(Agent::new(build(&m.family, &m.params)?, m.n))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(HelperSpec::Union(agents))
        }
        _ => invalid("`y` must set exactly one of `family` (with `params`), `constant` or `union`"),
    }
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub scenario: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub grid: Option<usize>,
    pub k: Option<f64>,
    pub oracle_e0_scale: Option<f64>,
}

/// Everything a command needs; a run is a function of this value alone.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Option<ScenarioFile>,
    pub out: Option<PathBuf>,
    pub seed: SeedSpec,
    pub trials: u64,
    pub grid: Option<usize>,
    pub k: f64,
    /// Multiplier applied to `e0` of the closed form in validation runs.
    pub oracle_e0_scale: f64,
}

impl RunConfig {
    /// Merges flags, the scenario file and the seed environment variable,
    /// in that order of precedence.
    pub fn resolve(o: Overrides, env_seed: Option<&str>) -> Result<Self, ConfigError> {
        let scenario = o.scenario.as_deref().map(ScenarioFile::load).transpose()?;
        let file = scenario.as_ref();
        let env_seed = env_seed
            .map(|s| {
                s.trim().parse::<u64>().map_err(|_| {
                    ConfigError::Invalid(format!("{SEED_ENV} must be a u64, got `{s}`"))
                })
            })
            .transpose()?;
        let master = o
            .seed
            .or_else(|| file.and_then(|f| f.seed))
            .or(env_seed)
            .unwrap_or(DEFAULT_SEED);
        let trials = o
            .trials
            .or_else(|| file.and_then(|f| f.trials))
            .unwrap_or(DEFAULT_TRIALS);
        let k = o.k.or_else(|| file.and_then(|f| f.k)).unwrap_or(DEFAULT_K);
        if !(k > 0.0 && k.is_finite()) {
            return invalid(format!("k must be > 0, got {k}"));
        }
        let scale = o.oracle_e0_scale.unwrap_or(1.0);
        if !(scale >= 0.0 && scale.is_finite()) {
            return invalid(format!("oracle e0 scale must be >= 0, got {scale}"));
        }
        Ok(Self {
            grid: o.grid.or_else(|| file.and_then(|f| f.grid)),
            scenario,
            out: o.out,
            seed: SeedSpec::new(master, 0),
            trials,
            k,
            oracle_e0_scale: scale,
        })
    }

    pub fn scenario_file(&self) -> Result<&ScenarioFile, ConfigError> {
        self.scenario
            .as_ref()
            .ok_or_else(|| ConfigError::Invalid("this command needs --scenario <path>".into()))
    }
}
