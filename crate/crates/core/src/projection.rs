//! Random projections, Count-Min bucketing and sign-hashed (VW) bucketing of
//! real-valued sparse vectors, with their inner-product estimators.
//!
//! Projection entries `r_ij`, bucket assignments `h(i)` and signs `r_i` are
//! regenerated from `(seed, i)` on demand; no matrix is ever stored.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::rng::{sparse_sign, StreamFamily};

/// A sparse real vector over `[0, D)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseRealVector {
    entries: Vec<(u64, f64)>,
    universe_size: u64,
}

impl SparseRealVector {
    /// Indices must be strictly increasing and below `universe_size`; zero values are dropped.
    pub fn new(entries: Vec<(u64, f64)>, universe_size: u64) -> Result<Self> {
        if universe_size == 0 {
            return Err(Error::invalid("universe size must be at least 1"));
        }
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::invalid("indices must be strictly increasing"));
        }
        if let Some(&(i, _)) = entries.last() {
            if i >= universe_size {
                return Err(Error::OutOfRange {
                    index: i,
                    bound: universe_size,
                });
            }
        }
        if entries.iter().any(|&(_, v)| !v.is_finite()) {
            return Err(Error::invalid("values must be finite"));
        }
        let entries = entries.into_iter().filter(|&(_, v)| v != 0.0).collect();
        Ok(Self { entries, universe_size })
    }

    /// A 0/1 vector with ones at `indices`.
    pub fn binary(indices: &[u64], universe_size: u64) -> Result<Self> {
        Self::new(indices.iter().map(|&i| (i, 1.0)).collect(), universe_size)
    }

    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    pub fn universe_size(&self) -> u64 {
        self.universe_size
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        moments(self, other).cross
    }
}

// Sums over i of u1^2, u2^2, u1 u2 and u1^2 u2^2.
struct Moments {
    sq1: f64,
    sq2: f64,
    cross: f64,
    sq_cross: f64,
}

fn moments(u1: &SparseRealVector, u2: &SparseRealVector) -> Moments {
    let sq1 = u1.entries.iter().map(|e| e.1 * e.1).sum();
    let sq2 = u2.entries.iter().map(|e| e.1 * e.1).sum();
    let (mut cross, mut sq_cross) = (0.0, 0.0);
    let (a, b) = (&u1.entries, &u2.entries);
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let p = a[i].1 * b[j].1;
                cross += p;
                sq_cross += p * p;
                i += 1;
                j += 1;
            }
        }
    }
    Moments {
        sq1,
        sq2,
        cross,
        sq_cross,
    }
}

fn same_universe(u1: &SparseRealVector, u2: &SparseRealVector) -> Result<()> {
    if u1.universe_size != u2.universe_size {
        return Err(Error::UniverseMismatch {
            left: u1.universe_size,
            right: u2.universe_size,
        });
    }
    Ok(())
}

fn check_s(s: f64) -> Result<()> {
    if !(s >= 1.0 && s.is_finite()) {
        return Err(Error::invalid(format!("s must be a finite value >= 1, got {s}")));
    }
    Ok(())
}

/// A `D x k` random matrix with i.i.d. entries from the sparse sign law with parameter `s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionSpec {
    k: usize,
    s: f64,
    seed: u64,
}

impl ProjectionSpec {
    pub fn new(k: usize, s: f64, seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        check_s(s)?;
        Ok(Self { k, s, seed })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Row `i` of the matrix, `r_i1 .. r_ik`.
    pub fn row(&self, i: u64) -> impl Iterator<Item = f64> {
        let mut rng = StreamFamily::new(self.seed).stream(i);
        let s = self.s;
        (0..self.k).map(move |_| sparse_sign(rng.next_u64(), s))
    }
}

/// Output of [`rp_project`].
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedVector {
    pub spec: ProjectionSpec,
    pub values: Vec<f64>,
}

/// `v_j = sum_i u_i r_ij`.
pub fn rp_project(u: &SparseRealVector, spec: &ProjectionSpec) -> ProjectedVector {
    let streams = StreamFamily::new(spec.seed);
    let mut values = vec![0.0; spec.k];
    for &(i, ui) in &u.entries {
        let mut rng = streams.stream(i);
        for v in values.iter_mut() {
            *v += ui * sparse_sign(rng.next_u64(), spec.s);
        }
    }
    ProjectedVector { spec: *spec, values }
}

/// `(1/k) sum_j v1_j v2_j`, unbiased for the inner product.
pub fn rp_estimate_inner(v1: &ProjectedVector, v2: &ProjectedVector) -> Result<f64> {
    if v1.spec != v2.spec || v1.values.len() != v2.values.len() {
        return Err(Error::shape("projections come from different specs"));
    }
    let dot: f64 = v1.values.iter().zip(&v2.values).map(|(a, b)| a * b).sum();
    Ok(dot / v1.values.len() as f64)
}

/// `(1/k) [ sum u1^2 sum u2^2 + (sum u1 u2)^2 + (s - 3) sum u1^2 u2^2 ]`.
pub fn rp_variance(u1: &SparseRealVector, u2: &SparseRealVector, s: f64, k: usize) -> Result<f64> {
    same_universe(u1, u2)?;
    let m = moments(u1, u2);
    Ok((m.sq1 * m.sq2 + m.cross * m.cross + (s - 3.0) * m.sq_cross) / k as f64)
}

/// Uniform bucket assignment `h(i)` over `[0, k)` plus per-feature multipliers `r_i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BucketHashSpec {
    k: usize,
    bucket_seed: u64,
    sign_seed: u64,
    s: f64,
}

impl BucketHashSpec {
    /// Spec with the default sign law `s = 1` (equiprobable ±1).
    pub fn new(k: usize, bucket_seed: u64, sign_seed: u64) -> Result<Self> {
        Self::with_s(k, bucket_seed, sign_seed, 1.0)
    }

    pub fn with_s(k: usize, bucket_seed: u64, sign_seed: u64, s: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        check_s(s)?;
        Ok(Self {
            k,
            bucket_seed,
            sign_seed,
            s,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// `h(i)`, by plain modular reduction of a 64-bit draw (bias below `k / 2^64`).
    #[inline]
    pub fn bucket(&self, i: u64) -> usize {
        (StreamFamily::new(self.bucket_seed).word(i) % self.k as u64) as usize
    }

    /// The multiplier `r_i`.
    #[inline]
    pub fn sign(&self, i: u64) -> f64 {
        sparse_sign(StreamFamily::new(self.sign_seed).word(i), self.s)
    }

    fn fill(&self, u: &SparseRealVector, signed: bool) -> Vec<f64> {
        let buckets = StreamFamily::new(self.bucket_seed);
        let signs = StreamFamily::new(self.sign_seed);
        let mut out = vec![0.0; self.k];
        for &(i, ui) in &u.entries {
            let j = (buckets.word(i) % self.k as u64) as usize;
            let r = if signed {
                sparse_sign(signs.word(i), self.s)
            } else {
                1.0
            };
            out[j] += ui * r;
        }
        out
    }
}

/// Count-Min buckets `w_j = sum_{h(i) = j} u_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct CountMinVector {
    pub spec: BucketHashSpec,
    pub buckets: Vec<f64>,
}

/// Sign-hashed buckets `g_j = sum_{h(i) = j} u_i r_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct VwVector {
    pub spec: BucketHashSpec,
    pub buckets: Vec<f64>,
}

impl VwVector {
    /// Nonzero buckets as `(bucket, value)` pairs.
    pub fn sparse_entries(&self) -> Vec<(u64, f64)> {
        self.buckets
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(j, &v)| (j as u64, v))
            .collect()
    }
}

pub fn cm_bucket(u: &SparseRealVector, spec: &BucketHashSpec) -> CountMinVector {
    CountMinVector {
        spec: *spec,
        buckets: spec.fill(u, false),
    }
}

/// `sum_j w1_j w2_j`. Biased upward on non-negative data: colliding features add cross terms.
pub fn cm_estimate_biased(w1: &CountMinVector, w2: &CountMinVector) -> Result<f64> {
    if w1.spec != w2.spec {
        return Err(Error::shape("bucket vectors come from different specs"));
    }
    Ok(w1.buckets.iter().zip(&w2.buckets).map(|(a, b)| a * b).sum())
}

pub fn vw_hash(u: &SparseRealVector, spec: &BucketHashSpec) -> VwVector {
    VwVector {
        spec: *spec,
        buckets: spec.fill(u, true),
    }
}

/// `sum_j g1_j g2_j`. Unlike [`rp_estimate_inner`] there is no `1/k` factor.
pub fn vw_estimate_inner(g1: &VwVector, g2: &VwVector) -> Result<f64> {
    if g1.spec != g2.spec {
        return Err(Error::shape("hashed vectors come from different specs"));
    }
    Ok(g1.buckets.iter().zip(&g2.buckets).map(|(a, b)| a * b).sum())
}

/// `(s - 1) sum u1^2 u2^2 + (1/k) [ sum u1^2 sum u2^2 + (sum u1 u2)^2 - 2 sum u1^2 u2^2 ]`.
pub fn vw_variance(u1: &SparseRealVector, u2: &SparseRealVector, s: f64, k: usize) -> Result<f64> {
    same_universe(u1, u2)?;
    let m = moments(u1, u2);
    Ok((s - 1.0) * m.sq_cross + (m.sq1 * m.sq2 + m.cross * m.cross - 2.0 * m.sq_cross) / k as f64)
}
