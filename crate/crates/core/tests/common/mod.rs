#![allow(dead_code)]

use collab_avg::distributions::DistributionSpec;
use collab_avg::federation::Agent;
use collab_avg::theory::{SampleCount, Scenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    10f64.powf(rng.random_range(lo.log10()..hi.log10()))
}

/// Random finite-moment scenarios with `var_x > 0`. About a tenth have a
/// constant helper and a tenth have infinitely many helper samples.
pub fn random_scenarios(count: usize, seed: u64) -> Vec<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mu_x = rng.random_range(-5.0..5.0);
            let var_x = log_uniform(&mut rng, 1e-2, 1e2);
            let n_x = rng.random_range(1..=500);
            let mu_y = mu_x + rng.random_range(-3.0..3.0);
            let var_y = if rng.random_bool(0.1) {
                0.0
            } else {
                log_uniform(&mut rng, 1e-2, 1e2)
            };
            let n_y = if rng.random_bool(0.1) {
                SampleCount::Infinite
            } else {
                SampleCount::Finite(rng.random_range(1..=500))
            };
            Scenario::new(mu_x, var_x, n_x, mu_y, var_y, n_y).unwrap()
        })
        .collect()
}

pub fn random_spec(rng: &mut ChaCha8Rng) -> DistributionSpec {
    match rng.random_range(0..5) {
        0 => DistributionSpec::normal(rng.random_range(-2.0..2.0), rng.random_range(0.1..3.0)),
        1 => {
            let lo = rng.random_range(-2.0..2.0);
            DistributionSpec::uniform(lo, lo + rng.random_range(0.1..4.0))
        }
        2 => DistributionSpec::bernoulli(rng.random_range(0.05..0.95)),
        3 => DistributionSpec::exponential(rng.random_range(0.3..3.0)),
        _ => DistributionSpec::point_mass(rng.random_range(-2.0..2.0)),
    }
    .unwrap()
}

/// Random federations of 1 to `max_helpers` helpers.
pub fn random_federations(
    count: usize,
    max_helpers: usize,
    max_n: u64,
    seed: u64,
) -> Vec<(Agent, Vec<Agent>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let focal = Agent::new(random_spec(&mut rng), rng.random_range(1..=max_n));
            let k = rng.random_range(1..=max_helpers);
            let helpers = (0..k)
                .map(|_| Agent::new(random_spec(&mut rng), rng.random_range(1..=max_n)))
                .collect();
            (focal, helpers)
        })
        .collect()
}

/// `|a - b| <= tol * max(|a|, |b|)`.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}
