//! Seed derivation and the stable 64-bit mixing function.
//!
//! Every component that needs randomness derives its own stream from the
//! run seed with [`derive_seed`], so work units (folds, grid cells, forest
//! trees) can run in any order and still produce the sequential result.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
///
/// ```text
/// z = z + 0x9e3779b97f4a7c15
/// z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9
/// z = (z ^ (z >> 27)) * 0x94d049bb133111eb
/// z = z ^ (z >> 31)
/// ```
/// All arithmetic wraps modulo 2^64.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64-bit FNV-1a over raw bytes.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Child seed for the `index`-th work unit in `stream` under `seed`.
pub fn derive_seed(seed: u64, stream: &str, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(fnv1a64(stream.as_bytes()) ^ splitmix64(index)))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
