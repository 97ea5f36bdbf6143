//! Deterministic seed derivation.
//!
//! Every random stream in an experiment is derived from the master seed plus
//! a stream tag and an index, so results never depend on which worker runs
//! which task.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags. The values are part of the reproducibility contract.
pub mod stream {
    pub const SPLIT: u64 = 0x5350_4c49;
    pub const BALANCE: u64 = 0x4241_4c41;
    pub const BO: u64 = 0x424f_5054;
    pub const GRID_CV: u64 = 0x4752_4944;
    pub const SCORE_CV: u64 = 0x5343_4f52;
    pub const MODEL: u64 = 0x4d4f_4445;
    pub const STUDY: u64 = 0x5354_5544;
    pub const SYNTH: u64 = 0x5359_4e54;
    pub const BASELINE: u64 = 0x4241_5345;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a master seed with a stream tag and an index.
pub fn derive(master: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(tag)).wrapping_add(index))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derived_rng(master: u64, tag: u64, index: u64) -> ChaCha8Rng {
    rng(derive(master, tag, index))
}
