//! Seeded substreams.
//!
//! Stream `(seed, key, index)` is ChaCha8 keyed by the 32 bytes
//! `seed_le ‖ key_le ‖ "sncpa-v1"` with the ChaCha stream id set to
//! `index`. Replications use their index, experiment cells use a stable
//! hash of their coordinates as `key`. Standard normals are produced by the
//! ziggurat sampler of `rand_distr` 0.5 (`StandardNormal`); a different
//! transform or generator must bump [`GENERATOR_VERSION`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const GENERATOR_VERSION: &str = "sncpa-1/chacha8-stream/rand_distr-0.5-ziggurat";

/// Key reserved for limiting-distribution draws.
pub const LIMIT_KEY: u64 = 0x4c49_4d49_545f_4457;
/// Key reserved for single DGP samples requested outside an experiment.
pub const DGP_KEY: u64 = 0x4447_505f_5341_4d50;

pub fn substream(seed: u64, key: u64, index: u64) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&key.to_le_bytes());
    bytes[16..24].copy_from_slice(b"sncpa-v1");
    let mut rng = ChaCha8Rng::from_seed(bytes);
    rng.set_stream(index);
    rng
}

/// SplitMix64 finalizer, used to fold values into stream keys.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn hash_words(words: &[u64]) -> u64 {
    words.iter().fold(0x5eed_c0de_u64, |h, &w| mix64(h ^ mix64(w)))
}
