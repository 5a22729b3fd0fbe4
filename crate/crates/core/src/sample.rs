//! Seeded randomness shared by the verification suites and the extremal
//! search: ChaCha streams keyed by (seed, trial) and log-normal draws for
//! weights, masses, and test functions.
//!
//! Log-normal draws are strictly positive, so weight positivity and
//! nonzero norms hold by construction; test functions get an independent
//! random sign per leaf unless a nonnegative draw is requested.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use crate::func::{SimpleFunction, Weight};

/// Deterministic generator for a given seed; distinct `stream` values give
/// independent sequences, so per-trial generators never overlap.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn lognormal(sigma: f64) -> LogNormal<f64> {
    LogNormal::new(0.0, sigma).expect("finite positive sigma")
}

/// Strictly positive i.i.d. log-normal weight values.
pub fn lognormal_weight(rng: &mut ChaCha8Rng, leaf_count: usize, sigma: f64) -> Weight<f64> {
    let dist = lognormal(sigma);
    let values: Vec<f64> = (0..leaf_count).map(|_| dist.sample(rng)).collect();
    Weight::new(values).expect("log-normal draws are positive")
}

/// Signed test function: log-normal magnitude, fair random sign per leaf.
pub fn signed_function(rng: &mut ChaCha8Rng, leaf_count: usize, sigma: f64) -> SimpleFunction<f64> {
    let dist = lognormal(sigma);
    let values = (0..leaf_count)
        .map(|_| {
            let mag = dist.sample(rng);
            if rng.gen::<bool>() {
                mag
            } else {
                -mag
            }
        })
        .collect();
    SimpleFunction::new(values)
}

/// Nonnegative test function with log-normal values.
pub fn nonneg_function(rng: &mut ChaCha8Rng, leaf_count: usize, sigma: f64) -> SimpleFunction<f64> {
    let dist = lognormal(sigma);
    SimpleFunction::new((0..leaf_count).map(|_| dist.sample(rng)).collect())
}

/// Random leaf masses: normalized log-normal draws. The normalizing
/// division leaves the sum within a few ulp of one, well inside the
/// validation tolerance.
pub fn random_masses(rng: &mut ChaCha8Rng, leaf_count: usize, sigma: f64) -> Vec<f64> {
    let dist = lognormal(sigma);
    let mut masses: Vec<f64> = (0..leaf_count).map(|_| dist.sample(rng)).collect();
    let total: f64 = masses.iter().sum();
    for m in &mut masses {
        *m /= total;
    }
    masses
}

/// Random nonempty leaf subset (ascending), drawn by fair coin per leaf
/// with rejection of the empty outcome.
pub fn random_subset(rng: &mut ChaCha8Rng, leaf_count: usize) -> Vec<usize> {
    loop {
        let set: Vec<usize> = (0..leaf_count).filter(|_| rng.gen::<bool>()).collect();
        if !set.is_empty() {
            return set;
        }
    }
}
