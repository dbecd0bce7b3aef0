//! Deterministic randomness.
//!
//! Every stochastic operation in the crate takes an explicit `u64` seed. A seed
//! keys a ChaCha8 generator; independent sub-streams are selected by index with
//! [`StreamFamily::stream`], so per-feature, per-trial and per-cell randomness
//! can be regenerated in any order without storing anything.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A keyed family of independent ChaCha8 streams.
#[derive(Clone, Debug)]
pub struct StreamFamily {
    base: ChaCha8Rng,
}

impl StreamFamily {
    pub fn new(seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// The generator for sub-stream `index`, positioned at its start.
    #[inline]
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(index);
        rng
    }

    /// First 64-bit word of sub-stream `index`.
    #[inline]
    pub fn word(&self, index: u64) -> u64 {
        self.stream(index).next_u64()
    }
}

/// Derive a child seed for sub-task `index` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    StreamFamily::new(seed).word(index)
}

/// Uniform draw in `[0, 1)` from the top 53 bits of a word.
#[inline]
pub fn unit_f64(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Sample from the three-point "sparse projection" law with parameter `s >= 1`:
/// `sqrt(s)` and `-sqrt(s)` each with probability `1/(2s)`, zero otherwise.
///
/// The law has mean 0, variance 1, third moment 0 and fourth moment `s`.
#[inline]
pub fn sparse_sign(word: u64, s: f64) -> f64 {
    if s == 1.0 {
        return if word >> 63 == 0 { 1.0 } else { -1.0 };
    }
    let u = unit_f64(word);
    let half = 0.5 / s;
    if u < half {
        s.sqrt()
    } else if u < 2.0 * half {
        -s.sqrt()
    } else {
        0.0
    }
}
