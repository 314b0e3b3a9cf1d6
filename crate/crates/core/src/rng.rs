//! Seeding for reproducible, parallel Monte Carlo.
//!
//! Every trial owns a generator seeded from `(master_seed, trial_index)`, so a
//! run produces the same numbers no matter how trials are scheduled.

use rand::SeedableRng;
use rand_pcg::Pcg64Mcg;

/// Generator used for every sampler in the crate.
pub type TrialRng = Pcg64Mcg;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function; a bijection on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for trial `trial_index` of a run keyed by `master_seed`.
///
/// For a fixed master seed the map `trial_index -> seed` is injective: the
/// index enters through an odd-multiplier Weyl step and `mix64` is a bijection.
pub fn derive_trial_seed(master_seed: u64, trial_index: u64) -> u64 {
    let base = mix64(master_seed);
    mix64(base.wrapping_add(GOLDEN_GAMMA.wrapping_mul(trial_index.wrapping_add(1))))
}

pub fn rng_from_seed(seed: u64) -> TrialRng {
    Pcg64Mcg::seed_from_u64(seed)
}
