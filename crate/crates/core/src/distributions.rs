//! Scalar random variables with exact moments and reproducible sampling.
//!
//! Every family implements [`Family`] and is registered by name in the
//! [`FamilyRegistry`], which is how scenario files select a distribution at
//! runtime. The set of families is closed: each one must supply analytic
//! moments so that simulation results can be checked against closed form.
//!
//! Randomness comes from ChaCha12, a counter-based stream cipher. A
//! [`SeedSpec`] fixes the 256-bit key; independent substreams (one per Monte
//! Carlo trial) are selected through the cipher's 64-bit stream id, so a
//! trial's draws never depend on which thread ran it.

use std::fmt;
use std::sync::LazyLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use thiserror::Error;

/// Generator used for every draw in the crate.
pub type StreamRng = ChaCha12Rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("unknown distribution family `{0}` (expected one of: {1})")]
    UnknownFamily(String, String),
    #[error("family `{family}` takes {expected} parameter(s) ({names}), got {got}")]
    ParamCount {
        family: &'static str,
        expected: usize,
        names: String,
        got: usize,
    },
    #[error("invalid parameter for `{family}`: {reason}")]
    InvalidParam {
        family: &'static str,
        reason: String,
    },
}

/// Exact mean and variance of a distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

/// Seed provenance for a stream of draws.
///
/// `(master_seed, stream_id)` determines the generator key. Draw `i` of
/// substream `s` is a pure function of `(master_seed, stream_id, s, i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub const fn new(master_seed: u64, stream_id: u64) -> Self {
        Self {
            master_seed,
            stream_id,
        }
    }

    fn key(&self) -> [u8; 32] {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.stream_id.to_le_bytes());
        // Domain tag so an all-zero seed does not produce an all-zero key.
        key[16..24].copy_from_slice(b"collavg1");
        key
    }

    /// Generator for the main stream (substream 0).
    pub fn rng(&self) -> StreamRng {
        self.substream_rng(0)
    }

    /// Generator for substream `index`, e.g. one Monte Carlo trial.
    pub fn substream_rng(&self, index: u64) -> StreamRng {
        let mut rng = ChaCha12Rng::from_seed(self.key());
        rng.set_stream(index);
        rng
    }
}

impl fmt::Display for SeedSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.master_seed, self.stream_id)
    }
}

/// Common behaviour of every distribution family.
pub trait Family: fmt::Debug + Send + Sync {
    /// Registry name, e.g. `"normal"`.
    fn name(&self) -> &'static str;
    fn moments(&self) -> Moments;
    /// One draw. Families without randomness consume nothing from `rng`.
    fn draw(&self, rng: &mut StreamRng) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normal {
    mean: f64,
    sd: f64,
}

impl Normal {
    pub fn new(mean: f64, sd: f64) -> Result<Self, DistributionError> {
        check_finite("normal", "mean", mean)?;
        check_finite("normal", "sd", sd)?;
        if sd < 0.0 {
            return Err(invalid("normal", format!("sd must be >= 0, got {sd}")));
        }
        if !(sd * sd).is_finite() {
            return Err(invalid("normal", format!("variance of sd {sd} overflows")));
        }
        Ok(Self { mean, sd })
    }
}

impl Family for Normal {
    fn name(&self) -> &'static str {
        "normal"
    }

    fn moments(&self) -> Moments {
        Moments {
            mean: self.mean,
            variance: self.sd * self.sd,
        }
    }

    fn draw(&self, rng: &mut StreamRng) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.mean + self.sd * z
    }
}

/// Continuous uniform on `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Uniform {
    lo: f64,
    hi: f64,
}

impl Uniform {
    pub fn new(lo: f64, hi: f64) -> Result<Self, DistributionError> {
        check_finite("uniform", "lo", lo)?;
        check_finite("uniform", "hi", hi)?;
        if !(lo < hi) {
            return Err(invalid(
                "uniform",
                format!("need lo < hi, got [{lo}, {hi}]"),
            ));
        }
        let width = hi - lo;
        if !(width * width).is_finite() {
            return Err(invalid(
                "uniform",
                format!("variance of [{lo}, {hi}] overflows"),
            ));
        }
        Ok(Self { lo, hi })
    }
}

impl Family for Uniform {
    fn name(&self) -> &'static str {
        "uniform"
    }

    fn moments(&self) -> Moments {
        let width = self.hi - self.lo;
        Moments {
            mean: self.lo + 0.5 * width,
            variance: width * width / 12.0,
        }
    }

    fn draw(&self, rng: &mut StreamRng) -> f64 {
        let u: f64 = rng.random();
        self.lo + (self.hi - self.lo) * u
    }
}

/// Takes the value 1 with probability `p`, else 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bernoulli {
    p: f64,
}

impl Bernoulli {
    pub fn new(p: f64) -> Result<Self, DistributionError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(
                "bernoulli",
                format!("p must lie in [0, 1], got {p}"),
            ));
        }
        Ok(Self { p })
    }
}

impl Family for Bernoulli {
    fn name(&self) -> &'static str {
        "bernoulli"
    }

    fn moments(&self) -> Moments {
        Moments {
            mean: self.p,
            variance: self.p * (1.0 - self.p),
        }
    }

    fn draw(&self, rng: &mut StreamRng) -> f64 {
        let u: f64 = rng.random();
        if u < self.p {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential {
    rate: f64,
}

impl Exponential {
    pub fn new(rate: f64) -> Result<Self, DistributionError> {
        check_finite("exponential", "rate", rate)?;
        if rate <= 0.0 {
            return Err(invalid(
                "exponential",
                format!("rate must be > 0, got {rate}"),
            ));
        }
        let m = 1.0 / rate;
        if !(m * m).is_finite() {
            return Err(invalid("exponential", format!("rate {rate} too small")));
        }
        Ok(Self { rate })
    }
}

impl Family for Exponential {
    fn name(&self) -> &'static str {
        "exponential"
    }

    fn moments(&self) -> Moments {
        let m = 1.0 / self.rate;
        Moments {
            mean: m,
            variance: m * m,
        }
    }

    fn draw(&self, rng: &mut StreamRng) -> f64 {
        let e: f64 = Exp1.sample(rng);
        e / self.rate
    }
}

/// Degenerate distribution at a single value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMass {
    value: f64,
}

impl PointMass {
    pub fn new(value: f64) -> Result<Self, DistributionError> {
        check_finite("point_mass", "value", value)?;
        Ok(Self { value })
    }
}

impl Family for PointMass {
    fn name(&self) -> &'static str {
        "point_mass"
    }

    fn moments(&self) -> Moments {
        Moments {
            mean: self.value,
            variance: 0.0,
        }
    }

    fn draw(&self, _rng: &mut StreamRng) -> f64 {
        self.value
    }
}

/// A validated scalar distribution from the closed family list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionSpec {
    Normal(Normal),
    Uniform(Uniform),
    Bernoulli(Bernoulli),
    Exponential(Exponential),
    PointMass(PointMass),
}

impl DistributionSpec {
    pub fn normal(mean: f64, sd: f64) -> Result<Self, DistributionError> {
        Normal::new(mean, sd).map(Self::Normal)
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self, DistributionError> {
        Uniform::new(lo, hi).map(Self::Uniform)
    }

    pub fn bernoulli(p: f64) -> Result<Self, DistributionError> {
        Bernoulli::new(p).map(Self::Bernoulli)
    }

    pub fn exponential(rate: f64) -> Result<Self, DistributionError> {
        Exponential::new(rate).map(Self::Exponential)
    }

    pub fn point_mass(value: f64) -> Result<Self, DistributionError> {
        PointMass::new(value).map(Self::PointMass)
    }

    /// Looks `name` up in the builtin registry and builds it from `params`.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self, DistributionError> {
        FamilyRegistry::builtin().build(name, params)
    }

    pub fn family(&self) -> &dyn Family {
        match self {
            Self::Normal(d) => d,
            Self::Uniform(d) => d,
            Self::Bernoulli(d) => d,
            Self::Exponential(d) => d,
            Self::PointMass(d) => d,
        }
    }

    pub fn name(&self) -> &'static str {
        self.family().name()
    }

    pub fn moments(&self) -> Moments {
        self.family().moments()
    }

    pub fn mean(&self) -> f64 {
        self.moments().mean
    }

    pub fn variance(&self) -> f64 {
        self.moments().variance
    }

    /// Appends `n` draws from `rng` to `out`, in draw order.
    pub fn sample_into(&self, n: usize, rng: &mut StreamRng, out: &mut Vec<f64>) {
        let family = self.family();
        out.extend((0..n).map(|_| family.draw(rng)));
    }

    /// `n` i.i.d. draws from the main stream of `seed`.
    pub fn sample(&self, n: usize, seed: SeedSpec) -> Vec<f64> {
        let mut rng = seed.rng();
        let mut out = Vec::with_capacity(n);
        self.sample_into(n, &mut rng, &mut out);
        out
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Normal(d) => write!(f, "normal({}, {})", d.mean, d.sd),
            Self::Uniform(d) => write!(f, "uniform({}, {})", d.lo, d.hi),
            Self::Bernoulli(d) => write!(f, "bernoulli({})", d.p),
            Self::Exponential(d) => write!(f, "exponential({})", d.rate),
            Self::PointMass(d) => write!(f, "point_mass({})", d.value),
        }
    }
}

type Builder = fn(&[f64]) -> Result<DistributionSpec, DistributionError>;

/// A registered family: its name, parameter names and constructor.
#[derive(Debug, Clone, Copy)]
pub struct FamilyEntry {
    pub name: &'static str,
    pub params: &'static [&'static str],
    build: Builder,
}

/// Name-indexed constructors for the builtin families.
#[derive(Debug)]
pub struct FamilyRegistry {
    entries: Vec<FamilyEntry>,
}

static BUILTIN: LazyLock<FamilyRegistry> = LazyLock::new(|| FamilyRegistry {
    entries: vec![
        FamilyEntry {
            name: "normal",
            params: &["mean", "sd"],
            build: |p| DistributionSpec::normal(p[0], p[1]),
        },
        FamilyEntry {
            name: "uniform",
            params: &["lo", "hi"],
            build: |p| DistributionSpec::uniform(p[0], p[1]),
        },
        FamilyEntry {
            name: "bernoulli",
            params: &["p"],
            build: |p| DistributionSpec::bernoulli(p[0]),
        },
        FamilyEntry {
            name: "exponential",
            params: &["rate"],
            build: |p| DistributionSpec::exponential(p[0]),
        },
        FamilyEntry {
            name: "point_mass",
            params: &["value"],
            build: |p| DistributionSpec::point_mass(p[0]),
        },
    ],
});

impl FamilyRegistry {
    pub fn builtin() -> &'static FamilyRegistry {
        &BUILTIN
    }

    pub fn entries(&self) -> &[FamilyEntry] {
        &self.entries
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.iter().map(|e| e.name)
    }

    /// Accepts the registry name case-insensitively, with `-` or `_`
    /// separators (`PointMass`, `point-mass` and `point_mass` all resolve).
    pub fn get(&self, name: &str) -> Option<&FamilyEntry> {
        let wanted: String = name
            .chars()
            .filter(|c| *c != '_' && *c != '-')
            .flat_map(char::to_lowercase)
            .collect();
        self.entries
            .iter()
            .find(|e| e.name.replace('_', "") == wanted)
    }

    pub fn build(&self, name: &str, params: &[f64]) -> Result<DistributionSpec, DistributionError> {
        let entry = self.get(name).ok_or_else(|| {
            DistributionError::UnknownFamily(
                name.to_string(),
                self.names().collect::<Vec<_>>().join(", "),
            )
        })?;
        if params.len() != entry.params.len() {
            return Err(DistributionError::ParamCount {
                family: entry.name,
                expected: entry.params.len(),
                names: entry.params.join(", "),
                got: params.len(),
            });
        }
        (entry.build)(params)
    }
}

fn invalid(family: &'static str, reason: String) -> DistributionError {
    DistributionError::InvalidParam { family, reason }
}

fn check_finite(family: &'static str, param: &str, v: f64) -> Result<(), DistributionError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(family, format!("{param} must be finite, got {v}")))
    }
}
