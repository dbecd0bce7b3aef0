//! Closed-form collision probabilities and estimator variances.

use crate::error::{Error, Result};
use crate::sketch::minwise::check_bits;

/// `R(1 - R) / k`, the variance of the full-precision minwise estimator.
pub fn variance_full(resemblance: f64, k: usize) -> f64 {
    resemblance * (1.0 - resemblance) / k as f64
}

/// Constants of the large-`D` b-bit collision law `P_b = C1 + (1 - C2) R`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BBitParams {
    pub r1: f64,
    pub r2: f64,
    pub a1: f64,
    pub a2: f64,
    pub c1: f64,
    pub c2: f64,
    pub bits: u8,
}

impl BBitParams {
    /// Constants for sets of sizes `f1`, `f2` in a universe of `D` features.
    pub fn new(f1: u64, f2: u64, universe_size: u64, bits: u8) -> Result<Self> {
        if f1 == 0 || f2 == 0 {
            return Err(Error::invalid("set cardinalities must be positive"));
        }
        if f1 > universe_size || f2 > universe_size {
            return Err(Error::invalid("cardinality exceeds the universe size"));
        }
        Self::from_sparsity(f1 as f64 / universe_size as f64, f2 as f64 / universe_size as f64, bits)
    }

    /// Constants for sparsity ratios `r1, r2` in `(0, 1]`.
    pub fn from_sparsity(r1: f64, r2: f64, bits: u8) -> Result<Self> {
        check_bits(bits)?;
        if !(r1 > 0.0 && r1 <= 1.0 && r2 > 0.0 && r2 <= 1.0) {
            return Err(Error::invalid(format!(
                "sparsity ratios must be in (0, 1], got {r1}, {r2}"
            )));
        }
        let a1 = a_constant(r1, bits);
        let a2 = a_constant(r2, bits);
        let w1 = r1 / (r1 + r2);
        let w2 = r2 / (r1 + r2);
        Ok(Self {
            r1,
            r2,
            a1,
            a2,
            c1: a1 * w2 + a2 * w1,
            c2: a1 * w1 + a2 * w2,
            bits,
        })
    }

    /// The `r -> 0` limit, where every constant equals `2^-b`.
    pub fn sparse_limit(bits: u8) -> Result<Self> {
        check_bits(bits)?;
        let v = 0.5f64.powi(bits as i32);
        Ok(Self {
            r1: 0.0,
            r2: 0.0,
            a1: v,
            a2: v,
            c1: v,
            c2: v,
            bits,
        })
    }

    /// Collision probability of the lowest `b` bits at resemblance `R`.
    pub fn collision_probability(&self, resemblance: f64) -> f64 {
        self.c1 + (1.0 - self.c2) * resemblance
    }
}

// A_b(r) = r (1 - r)^(2^b - 1) / (1 - (1 - r)^(2^b)), evaluated through
// log1p/expm1 so that tiny r does not cancel.
fn a_constant(r: f64, bits: u8) -> f64 {
    let m = (1u32 << bits) as f64;
    let log1m = (-r).ln_1p();
    let num = r * ((m - 1.0) * log1m).exp();
    let den = -(m * log1m).exp_m1();
    num / den
}

/// Resemblance recovered from an empirical b-bit collision rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BBitEstimate {
    pub value: f64,
    /// False when noise pushed the estimate outside `[0, 1]`; the value is left unclamped.
    pub in_range: bool,
}

/// `(p_hat - C1) / (1 - C2)`.
pub fn estimate_resemblance_bbit(p_hat: f64, params: &BBitParams) -> Result<BBitEstimate> {
    let denom = 1.0 - params.c2;
    if denom <= 0.0 {
        return Err(Error::invalid("C2 = 1: resemblance is not identifiable"));
    }
    let value = (p_hat - params.c1) / denom;
    Ok(BBitEstimate {
        value,
        in_range: (0.0..=1.0).contains(&value),
    })
}

/// Variance of the b-bit resemblance estimator from `k` hash functions.
pub fn variance_bbit(resemblance: f64, params: &BBitParams, k: usize) -> f64 {
    let p = params.collision_probability(resemblance);
    let denom = 1.0 - params.c2;
    p * (1.0 - p) / (k as f64 * denom * denom)
}
