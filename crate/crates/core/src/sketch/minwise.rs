use crate::error::{Error, Result};
use crate::sketch::hashing::MinwiseHasher;
use crate::sketch::set::SparseBinarySet;

/// Largest number of low bits a [`BBitSketch`] may keep.
pub const MAX_BITS: u8 = 16;

/// The `k` minima `z_j = min_{t in S} h_j(t)` of one data point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinwiseSketch {
    values: Vec<u64>,
    universe_size: u64,
}

impl MinwiseSketch {
    /// Wrap precomputed minima; each must lie in `[0, D)`.
    pub fn from_values(values: Vec<u64>, universe_size: u64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("sketch needs at least one value"));
        }
        if let Some(&v) = values.iter().find(|&&v| v >= universe_size) {
            return Err(Error::OutOfRange {
                index: v,
                bound: universe_size,
            });
        }
        Ok(Self { values, universe_size })
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    pub fn universe_size(&self) -> u64 {
        self.universe_size
    }
}

/// The lowest `b` bits of each minwise value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BBitSketch {
    values: Vec<u16>,
    bits: u8,
}

impl BBitSketch {
    pub fn from_values(values: Vec<u16>, bits: u8) -> Result<Self> {
        check_bits(bits)?;
        if values.is_empty() {
            return Err(Error::invalid("sketch needs at least one value"));
        }
        let bound = 1u32 << bits;
        if let Some(&v) = values.iter().find(|&&v| v as u32 >= bound) {
            return Err(Error::OutOfRange {
                index: v as u64,
                bound: bound as u64,
            });
        }
        Ok(Self { values, bits })
    }

    pub fn values(&self) -> &[u16] {
        &self.values
    }

    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn k(&self) -> usize {
        self.values.len()
    }

    /// First `k` values, which form the sketch under the first `k` hash functions.
    pub fn prefix(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.values.len() {
            return Err(Error::invalid(format!(
                "prefix length {k} outside [1, {}]",
                self.values.len()
            )));
        }
        Ok(Self {
            values: self.values[..k].to_vec(),
            bits: self.bits,
        })
    }
}

pub(crate) fn check_bits(bits: u8) -> Result<()> {
    if bits == 0 || bits > MAX_BITS {
        return Err(Error::invalid(format!("b must be in [1, {MAX_BITS}], got {bits}")));
    }
    Ok(())
}

/// `values[j] = min_{t in s} hash_j(t)`.
///
/// Distinct features may share a hashed value under a 2-universal family; the
/// minimum is taken over hashed values as they are, without tie correction.
pub fn minwise_sketch<H: MinwiseHasher + ?Sized>(s: &SparseBinarySet, hasher: &H) -> Result<MinwiseSketch> {
    if s.universe_size() != hasher.universe_size() {
        return Err(Error::UniverseMismatch {
            left: s.universe_size(),
            right: hasher.universe_size(),
        });
    }
    if s.is_empty() {
        return Err(Error::EmptySet);
    }
    let idx = s.indices();
    let values = (0..hasher.num_hashes())
        .map(|j| idx.iter().map(|&t| hasher.hash(j, t)).min().unwrap_or(u64::MAX))
        .collect();
    Ok(MinwiseSketch {
        values,
        universe_size: hasher.universe_size(),
    })
}

/// Fraction of positions where the full minwise values agree.
pub fn estimate_resemblance_full(a: &MinwiseSketch, b: &MinwiseSketch) -> Result<f64> {
    if a.k() != b.k() {
        return Err(Error::shape(format!("k differs: {} vs {}", a.k(), b.k())));
    }
    if a.universe_size != b.universe_size {
        return Err(Error::UniverseMismatch {
            left: a.universe_size,
            right: b.universe_size,
        });
    }
    let hits = a.values.iter().zip(&b.values).filter(|(x, y)| x == y).count();
    Ok(hits as f64 / a.k() as f64)
}

/// Keep the lowest `bits` bits of every value.
pub fn truncate_to_b_bits(m: &MinwiseSketch, bits: u8) -> Result<BBitSketch> {
    check_bits(bits)?;
    let mask = ((1u32 << bits) - 1) as u64;
    Ok(BBitSketch {
        values: m.values.iter().map(|&v| (v & mask) as u16).collect(),
        bits,
    })
}

/// Fraction of positions where all `b` low bits agree.
pub fn estimate_pb(a: &BBitSketch, b: &BBitSketch) -> Result<f64> {
    if a.k() != b.k() || a.bits != b.bits {
        return Err(Error::shape(format!(
            "(k, b) differs: ({}, {}) vs ({}, {})",
            a.k(),
            a.bits,
            b.k(),
            b.bits
        )));
    }
    let hits = a.values.iter().zip(&b.values).filter(|(x, y)| x == y).count();
    Ok(hits as f64 / a.k() as f64)
}
