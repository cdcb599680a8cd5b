//! Deterministic RNG construction and seed derivation.
//!
//! Every random stream in the simulator is a [`SimRng`] built from a `u64`
//! seed. Sub-seeds (per drop, per experiment cell, per purpose) are derived
//! by hashing the master seed with a list of counters, so a cell's result
//! never depends on the order in which cells are visited.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `master` with each of `parts` in turn.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

/// Purpose tags used as the last component of derived seeds.
pub mod purpose {
    pub const LAYOUT: u64 = 1;
    pub const DESTROY: u64 = 2;
    pub const FADING: u64 = 3;
    pub const OPTIMIZER: u64 = 4;
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn derived_seeds_are_distinct_and_stable() {
        let seeds: HashSet<u64> = (0..1000u64).map(|d| derive_seed(7, &[d, purpose::LAYOUT])).collect();
        assert_eq!(seeds.len(), 1000);
        assert_eq!(derive_seed(7, &[3, 1]), derive_seed(7, &[3, 1]));
        assert_ne!(derive_seed(7, &[3, 1]), derive_seed(7, &[1, 3]));
    }
}
