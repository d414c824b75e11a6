//! The seeded generator used by sampling and synthetic data.
//!
//! Draws go through [`unit`] and [`below`], which only consume raw `u64`s, so
//! a given seed yields the same chain on every platform regardless of how
//! `rand`'s distribution helpers evolve.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SeededRng = ChaCha8Rng;

/// Recorded in model files next to the seed.
pub const RNG_ALGORITHM: &str = "chacha8";

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in `[0, 1)` with 53 bits of precision.
#[inline]
pub fn unit<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform integer in `[0, n)`; `n` must be positive.
#[inline]
pub fn below<R: RngCore + ?Sized>(rng: &mut R, n: usize) -> usize {
    debug_assert!(n > 0);
    ((rng.next_u64() as u128 * n as u128) >> 64) as usize
}

/// Index drawn proportionally to `weights`, whose sum is `total`.
#[inline]
pub fn categorical<R: RngCore + ?Sized>(rng: &mut R, weights: &[f64], total: f64) -> usize {
    let mut target = unit(rng) * total;
    for (i, &w) in weights.iter().enumerate() {
        if target < w {
            return i;
        }
        target -= w;
    }
    // rounding left a sliver past the last bucket
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}
