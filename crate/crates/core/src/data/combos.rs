//! Pairwise and subsampled three-way feature combinations.
//!
//! For a universe of size `D` the combined universe is laid out as
//!
//! ```text
//! [0, D)                 original feature i
//! [D, D + D^2)           pair i < j      at D + (i*D + j)
//! [D + D^2, D + D^2 + D^3) triple i<j<l  at D + D^2 + ((i*D + j)*D + l)
//! ```
//!
//! A triple is kept when its offset `(i*D + j)*D + l` is divisible by the
//! subsample modulus, so the selection is a fixed function of the feature ids.

use crate::error::{Error, Result};
use crate::sketch::SparseBinarySet;

/// Triple subsampling modulus matching a 1-in-30 rate.
pub const DEFAULT_TRIPLE_MODULUS: u64 = 30;

fn overflow() -> Error {
    Error::invalid("combined feature space does not fit in 64 bits")
}

/// Size of the combined universe for an input universe of `d` features.
pub fn combined_universe(d: u64, with_triples: bool) -> Result<u64> {
    let d2 = d.checked_mul(d).ok_or_else(overflow)?;
    let mut total = d.checked_add(d2).ok_or_else(overflow)?;
    if with_triples {
        let d3 = d2.checked_mul(d).ok_or_else(overflow)?;
        total = total.checked_add(d3).ok_or_else(overflow)?;
    }
    Ok(total)
}

/// Originals, all pairs, and the triples selected by `triple_modulus`
/// (`None` for no triples, `Some(1)` for all of them).
pub fn expand_combinations(s: &SparseBinarySet, triple_modulus: Option<u64>) -> Result<SparseBinarySet> {
    if triple_modulus == Some(0) {
        return Err(Error::invalid("triple modulus must be at least 1"));
    }
    let d = s.universe_size();
    let universe = combined_universe(d, triple_modulus.is_some())?;
    let idx = s.indices();
    let f = idx.len();
    let mut out = Vec::with_capacity(f + f * f.saturating_sub(1) / 2);
    out.extend_from_slice(idx);
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            out.push(d + i * d + j);
        }
    }
    if let Some(m) = triple_modulus {
        let base = d + d * d;
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate().skip(a + 1) {
                let ij = i * d + j;
                for &l in &idx[b + 1..] {
                    let off = ij * d + l;
                    if off.is_multiple_of(m) {
                        out.push(base + off);
                    }
                }
            }
        }
    }
    // lexicographic generation keeps each block ascending, and blocks are disjoint ranges
    SparseBinarySet::new(out, universe)
}
