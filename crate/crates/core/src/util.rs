//! Small deterministic helpers: hashing for checksums and stream ids, and
//! keyed RNG construction shared by every randomized component.

use rand::{Rng, RngExt};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// FNV-1a 64-bit hash. Used for file checksums, config hashes and stream
/// derivation; stable across platforms and runs.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Hash a list of 64-bit values into one, little-endian byte order.
pub fn mix64(parts: &[u64]) -> u64 {
    let mut bytes = Vec::with_capacity(parts.len() * 8);
    for p in parts {
        bytes.extend_from_slice(&p.to_le_bytes());
    }
    fnv1a64(&bytes)
}

/// Counter-based RNG keyed by `(seed, stream, domain)`. Distinct keys give
/// independent streams regardless of the order they are consumed in, which
/// is what makes parallel benchmarks reproducible. The `domain` tag keeps
/// subsystems (noise, data generation, weight init, shuffling) from ever
/// sharing a stream.
pub fn keyed_rng(seed: u64, stream: u64, domain: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    key[16..24].copy_from_slice(&domain.to_le_bytes());
    key[24..32].copy_from_slice(&0x6e72_6c64_7063_0001u64.to_le_bytes());
    ChaCha12Rng::from_seed(key)
}

/// Deterministic in-place Fisher-Yates shuffle.
pub fn shuffle<T>(items: &mut [T], rng: &mut impl Rng) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

/// RNG stream domains used across the crate.
pub mod domain {
    pub const NOISE: u64 = 1;
    pub const SEGMENT: u64 = 2;
    pub const INIT: u64 = 3;
    pub const SHUFFLE: u64 = 4;
    pub const CHANNEL_PROBS: u64 = 5;
    pub const PAIRS: u64 = 6;
    pub const CORPUS: u64 = 7;
}
