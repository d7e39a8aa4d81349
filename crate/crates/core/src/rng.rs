//! Deterministic seed fan-out.
//!
//! A single 64-bit master seed drives every random stage. Each stage draws
//! its own sub-seed through a splitmix-style mix of (master, stage, index),
//! so any bootstrap replicate or split can be re-run in isolation without
//! replaying the stages before it.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random stages of the pipeline. The discriminants are part of the
/// reproducibility contract: changing them changes every derived stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Split = 1,
    Bootstrap = 2,
    BootstrapRetry = 3,
    Simulate = 4,
    Svd = 5,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Sub-seed for (master, stage, index).
pub fn sub_seed(master: u64, stage: Stage, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ (stage as u64)) ^ index)
}

/// RNG for a given stage and index. ChaCha8 keeps streams independent and
/// identical across platforms.
pub fn stage_rng(master: u64, stage: Stage, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(sub_seed(master, stage, index))
}
