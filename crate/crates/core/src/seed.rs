//! Deterministic seed derivation.
//!
//! Every random choice in the pipeline flows from one run seed through
//! `derive(seed, stage_name)` so that reruns and reorderings cannot change
//! results. FNV-1a is used because `std`'s hashers are randomized per process.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(init: u64, bytes: &[u8]) -> u64 {
    let mut h = init;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Derive a child seed from `(seed, name)`.
pub fn derive(seed: u64, name: &str) -> u64 {
    let h = fnv1a(FNV_OFFSET, &seed.to_le_bytes());
    fnv1a(h, name.as_bytes())
}

/// Seeded RNG for a named stage.
pub fn rng(seed: u64, name: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, name))
}

/// Stable 64-bit fingerprint of a byte string, rendered as hex elsewhere.
pub fn fingerprint(bytes: &[u8]) -> u64 {
    fnv1a(FNV_OFFSET, bytes)
}
