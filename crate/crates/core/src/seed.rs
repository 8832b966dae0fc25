//! Counter-based seeding: every random stream is a pure function of its coordinates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One SplitMix64 output step.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash an ordered tuple of words.
pub fn mix(words: &[u64]) -> u64 {
    words.iter().fold(0x6A09_E667_F3BC_C909, |h, &w| splitmix64(h ^ splitmix64(w)))
}

/// Generator for trial `trial` of grid point `point`.
pub fn trial_rng(master: u64, point: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(&[master, point, trial]))
}
