//! Seed derivation and uniform sampling on top of a counter-based generator.
//!
//! Every stochastic component (design sampling, acquisition candidate sweeps)
//! derives an independent stream from `(base_seed, stream, index)` so that
//! runs are reproducible and sub-streams never alias across iterations.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Stream tag for initial-design sampling.
pub(crate) const STREAM_DESIGN: u64 = 0;
/// Stream tag for per-iteration acquisition candidate sweeps.
pub(crate) const STREAM_ACQUISITION: u64 = 1;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `(base, stream, index)` into a single sub-seed.
pub(crate) fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let a = splitmix64(base ^ stream.wrapping_mul(0xA076_1D64_78BD_642F));
    splitmix64(a ^ index.wrapping_mul(0xE703_7ED1_A0B4_28DB))
}

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
pub(crate) fn next_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// Uniform integer in `[0, bound)` via 128-bit multiply (no modulo bias worth
/// speaking of at these bounds; deterministic across platforms).
pub(crate) fn next_index(rng: &mut ChaCha8Rng, bound: usize) -> usize {
    debug_assert!(bound > 0);
    ((rng.next_u64() as u128 * bound as u128) >> 64) as usize
}
