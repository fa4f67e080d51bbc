//! Deterministic seed handling.
//!
//! All randomness flows from 64-bit seeds into ChaCha8 streams. Independent
//! streams (per trial, per role) are derived by mixing a base seed with a
//! path of small integers, so no two workers ever share generator state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// The generator used everywhere in the crate.
pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes `base` with each component of `path` in order.
pub fn derive(base: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix64(base), |acc, &p| {
        mix64(acc ^ mix64(p.wrapping_add(0x9e37_79b9_7f4a_7c15)))
    })
}

/// Parses a seed written in decimal or `0x`-prefixed hexadecimal.
pub fn parse_seed(s: &str) -> Result<u64> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16),
        None => s.replace('_', "").parse::<u64>(),
    };
    parsed.map_err(|e| Error::Parameter(format!("bad seed {s:?}: {e}")))
}
