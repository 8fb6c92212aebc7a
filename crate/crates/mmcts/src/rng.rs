//! Deterministic randomness plumbing.
//!
//! Every run consumes exactly one 64-bit master seed. Independent RNG
//! streams are derived as `derive_rng(seed, stream, index)`, where `stream`
//! is one of the constants below (one per subsystem) and `index` is the
//! episode or simulation ordinal inside that stream. The derivation mixes
//! all three words through a splitmix64 finalizer, so neighbouring indices
//! produce unrelated ChaCha8 states and any (seed, stream, index) triple is
//! reproducible forever.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const STREAM_TRAIN: u64 = 1;
pub const STREAM_EVAL: u64 = 2;
pub const STREAM_ROBUSTNESS: u64 = 3;
pub const STREAM_BANDIT: u64 = 4;
pub const STREAM_PLAY: u64 = 5;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Collapses `(seed, stream, index)` into one well-mixed 64-bit seed.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    splitmix(seed ^ splitmix(stream) ^ splitmix(splitmix(index)))
}

/// A ChaCha8 generator for the given `(seed, stream, index)` triple.
pub fn derive_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream, index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn derivation_is_stable_and_sensitive_to_every_word() {
        let base = derive_seed(1, 2, 3);
        assert_eq!(base, derive_seed(1, 2, 3));
        assert_ne!(base, derive_seed(2, 2, 3));
        assert_ne!(base, derive_seed(1, 3, 3));
        assert_ne!(base, derive_seed(1, 2, 4));
    }

    #[test]
    fn neighbouring_indices_produce_distinct_streams() {
        let a = derive_rng(42, STREAM_EVAL, 0).next_u64();
        let b = derive_rng(42, STREAM_EVAL, 1).next_u64();
        assert_ne!(a, b);
    }
}
