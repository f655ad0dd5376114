//! Seeded random streams.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] built by
//! [`stream`]. ChaCha is counter based and its output does not depend on the
//! platform, so a `(seed, draw order)` pair pins every sample bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tag for the white features of a run.
pub const FEATURE_STREAM: u64 = 0x6665_6174_7300_0000;

/// The generator used everywhere.
pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for trial `trial` at size `n` of an experiment seeded with `base`.
pub fn trial_seed(base: u64, n: usize, trial: usize) -> u64 {
    base ^ mix64(mix64(n as u64) ^ (trial as u64).rotate_left(32))
}

/// Splits one user seed into the graph seed and the feature seed.
///
/// The graph seed is the user seed itself so a graph sampled directly with
/// [`crate::graphon::sample_graph`] matches the graph of a full generation.
pub fn split_seed(seed: u64) -> (u64, u64) {
    (seed, mix64(seed ^ FEATURE_STREAM))
}
