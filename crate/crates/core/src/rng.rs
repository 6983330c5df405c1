//! Seeded randomness.
//!
//! Every random draw in the crate comes from [`ChaCha8Rng`] seeded through
//! [`seeded`]. Sub-streams (one per trial or run) use [`derive_seed`], so
//! results do not depend on execution order or platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier of the generator, recorded in reports.
pub const PRNG_ALGORITHM: &str = "chacha8/splitmix64-seed";

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th independent sub-stream of `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn seeded(seed: u64) -> Rng {
    let mut key = [0u8; 32];
    let mut state = seed;
    for chunk in key.chunks_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..4).map(|_| seeded(7).random()).collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
        assert_ne!(derive_seed(7, 0), derive_seed(7, 1));
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
        let x: u64 = seeded(derive_seed(1, 2)).random();
        let y: u64 = seeded(derive_seed(1, 2)).random();
        assert_eq!(x, y);
    }
}
