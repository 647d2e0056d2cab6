//! Deterministic seed derivation.
//!
//! Every stochastic routine in the crate takes an explicit `u64` seed and
//! builds its own [`ChaCha8Rng`]. Replica sweeps derive per-replica seeds
//! with [`split_seed`], a counter-based SplitMix64 mix of the master seed
//! and the replica index. Results are therefore independent of thread
//! scheduling and identical across `parallel` / sequential builds.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for replica `index` under `master`. O(1) in the index.
#[inline]
pub fn split_seed(master: u64, index: u64) -> u64 {
    mix(master ^ mix(index.wrapping_add(0xA5A5_A5A5_5A5A_5A5A)))
}

/// The crate's standard generator for a given seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
