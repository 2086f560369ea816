//! Fixed scenario suite used by `validate` when no scenario file is given.

use crate::distributions::DistributionSpec;
use crate::montecarlo::HelperModel;

#[derive(Debug, Clone, PartialEq)]
pub struct NamedScenario {
    pub name: &'static str,
    pub x: DistributionSpec,
    pub n_x: u64,
    pub helper: HelperModel,
}

/// Twelve local/helper pairs across all five families, with sample counts
/// drawn from {5, 20, 100}.
pub fn reference_suite() -> Vec<NamedScenario> {
    let normal = |m, s| DistributionSpec::normal(m, s).unwrap();
    let uniform = |a, b| DistributionSpec::uniform(a, b).unwrap();
    let bernoulli = |p| DistributionSpec::bernoulli(p).unwrap();
    let exponential = |r| DistributionSpec::exponential(r).unwrap();
    let point = |c| DistributionSpec::point_mass(c).unwrap();
    let pair = |name, x, n_x, y, n| NamedScenario {
        name,
        x,
        n_x,
        helper: HelperModel::Single { spec: y, n },
    };
    vec![
        pair("normal-normal", normal(0.0, 1.0), 5, normal(0.5, 1.0), 5),
        pair("normal-constant", normal(1.0, 2.0), 20, point(1.2), 5),
        pair(
            "uniform-uniform",
            uniform(0.0, 1.0),
            5,
            uniform(0.2, 1.4),
            100,
        ),
        pair(
            "uniform-normal",
            uniform(-1.0, 1.0),
            100,
            normal(0.1, 0.5),
            20,
        ),
        pair(
            "bernoulli-bernoulli",
            bernoulli(0.5),
            20,
            bernoulli(0.6),
            20,
        ),
        pair(
            "bernoulli-unbiased-constant",
            bernoulli(0.1),
            5,
            point(0.1),
            5,
        ),
        pair(
            "exponential-exponential",
            exponential(1.0),
            5,
            exponential(1.25),
            100,
        ),
        pair(
            "exponential-normal",
            exponential(2.0),
            20,
            normal(0.5, 1.0),
            5,
        ),
        pair("constant-normal", point(3.0), 5, normal(3.5, 1.0), 20),
        pair(
            "normal-bernoulli",
            normal(-1.0, 3.0),
            100,
            bernoulli(0.5),
            100,
        ),
        pair(
            "uniform-exponential",
            uniform(2.0, 5.0),
            20,
            exponential(0.5),
            5,
        ),
        pair(
            "bernoulli-uniform",
            bernoulli(0.8),
            100,
            uniform(0.5, 1.0),
            20,
        ),
    ]
}
