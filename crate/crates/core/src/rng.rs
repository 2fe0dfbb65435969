//! Reproducible random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 stream keyed by a 64-bit
//! seed derived with the SplitMix64 finalizer: `derive(seed, path)` folds each
//! path element `p` into the state as `s = mix64(s ^ mix64(p + GOLDEN))`.
//! Streams therefore depend only on `(seed, path)`, never on scheduling, and
//! the derivation is identical on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// Domain tags keeping substreams of different consumers apart.
pub mod tag {
    pub const GENERATE: u64 = 1;
    pub const NULLSPACE_SEARCH: u64 = 2;
    pub const COLLISION: u64 = 3;
    pub const JACOBIAN: u64 = 4;
    pub const BILINEAR: u64 = 5;
    pub const RECOVER: u64 = 6;
    pub const SWEEP: u64 = 7;
}

/// SplitMix64 output function.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(seed), |s, &p| {
        mix64(s ^ mix64(p.wrapping_add(GOLDEN)))
    })
}

pub fn stream(seed: u64, path: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive(seed, path))
}
