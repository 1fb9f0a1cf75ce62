//! Deterministic random streams.
//!
//! Every stochastic operation takes a [`ChaCha8Rng`]. Independent streams are
//! derived from a base seed and a path of stream indices with SplitMix64
//! mixing, so each grid cell / repetition / training run of an experiment
//! gets its own generator regardless of execution order:
//!
//! ```text
//! seed(base, [a, b, c]) = mix(mix(mix(base ^ GOLDEN) ^ a) ^ b) ^ c ...
//! ```

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finaliser.
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `base` along `path`.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(mix(base ^ GOLDEN), |acc, &idx| mix(acc ^ mix(idx)))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(base: u64, path: &[u64]) -> ChaCha8Rng {
    rng_from_seed(derive_seed(base, path))
}
