//! One-hot expansion of b-bit sketches into `2^b * k`-dimensional binary
//! vectors, so that a linear learner's inner product counts b-bit matches.

use crate::error::{Error, Result};
use crate::learner::{Label, LabeledExample};
use crate::projection::{vw_hash, BucketHashSpec, SparseRealVector, VwVector};
use crate::sketch::{minwise_sketch, truncate_to_b_bits, BBitSketch, MinwiseHasher, SparseBinarySet};

/// `k` blocks of width `2^b`, exactly one active position per block.
///
/// Block `j` has its one at offset `2^b - 1 - v_j`, so value 0 lands on the
/// last slot of the block and value `2^b - 1` on the first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExpandedVector {
    bits: u8,
    active: Vec<u64>,
}

impl ExpandedVector {
    pub fn bits(&self) -> u8 {
        self.bits
    }

    pub fn k(&self) -> usize {
        self.active.len()
    }

    pub fn dim(&self) -> u64 {
        (self.active.len() as u64) << self.bits
    }

    /// Active positions, ascending (one per block).
    pub fn active(&self) -> &[u64] {
        &self.active
    }

    /// Number of shared active positions.
    pub fn dot(&self, other: &Self) -> usize {
        self.active.iter().zip(&other.active).filter(|(a, b)| a == b).count()
    }

    /// Dense 0/1 rendering; only for small dimensions.
    pub fn to_dense(&self) -> Vec<u8> {
        let mut d = vec![0u8; self.dim() as usize];
        for &a in &self.active {
            d[a as usize] = 1;
        }
        d
    }

    pub fn to_features(&self) -> Vec<(u64, f64)> {
        self.active.iter().map(|&a| (a, 1.0)).collect()
    }

    pub fn to_sparse_real(&self) -> SparseRealVector {
        SparseRealVector::new(self.to_features(), self.dim()).expect("active positions are ascending and in range")
    }
}

pub fn expand_bbit(s: &BBitSketch) -> ExpandedVector {
    let width = 1u64 << s.bits();
    let active = s
        .values()
        .iter()
        .enumerate()
        .map(|(j, &v)| j as u64 * width + (width - 1 - v as u64))
        .collect();
    ExpandedVector { bits: s.bits(), active }
}

/// Sketch, truncate and expand one set.
pub fn encode_set<H: MinwiseHasher + ?Sized>(s: &SparseBinarySet, hasher: &H, bits: u8) -> Result<ExpandedVector> {
    let m = minwise_sketch(s, hasher)?;
    Ok(expand_bbit(&truncate_to_b_bits(&m, bits)?))
}

/// Lazily encode a stream of labelled sets, preserving order. An empty set
/// yields an error carrying its position in the stream.
pub fn encode_dataset<'h, I, H>(
    records: I,
    hasher: &'h H,
    bits: u8,
) -> impl Iterator<Item = Result<(ExpandedVector, Label)>> + 'h
where
    I: IntoIterator<Item = (SparseBinarySet, Label)>,
    I::IntoIter: 'h,
    H: MinwiseHasher + ?Sized,
{
    records.into_iter().enumerate().map(move |(index, (set, label))| {
        encode_set(&set, hasher, bits)
            .map(|e| (e, label))
            .map_err(|source| Error::Record {
                index,
                source: Box::new(source),
            })
    })
}

/// b-bit sketches of a stream of labelled sets, for writing to a sketch file.
pub fn sketch_dataset<'h, I, H>(
    records: I,
    hasher: &'h H,
    bits: u8,
) -> impl Iterator<Item = Result<(BBitSketch, Label)>> + 'h
where
    I: IntoIterator<Item = (SparseBinarySet, Label)>,
    I::IntoIter: 'h,
    H: MinwiseHasher + ?Sized,
{
    records.into_iter().enumerate().map(move |(index, (set, label))| {
        minwise_sketch(&set, hasher)
            .and_then(|m| truncate_to_b_bits(&m, bits))
            .map(|s| (s, label))
            .map_err(|source| Error::Record {
                index,
                source: Box::new(source),
            })
    })
}

/// Expanded vector as a training example.
pub fn to_example(e: &ExpandedVector, label: Label) -> LabeledExample {
    LabeledExample {
        features: e.to_features(),
        label,
    }
}

/// Sign-hash an expanded vector into `spec.k() < e.dim()` buckets.
pub fn compress_expanded_with_vw(e: &ExpandedVector, spec: &BucketHashSpec) -> Result<VwVector> {
    if spec.k() as u64 >= e.dim() {
        return Err(Error::invalid(format!(
            "compression to {} buckets does not shrink a {}-dimensional vector",
            spec.k(),
            e.dim()
        )));
    }
    Ok(vw_hash(&e.to_sparse_real(), spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::{estimate_pb, TwoUniversalHashFamily};

    #[test]
    fn worked_example() {
        let s = BBitSketch::from_values(vec![1, 0, 3], 2).unwrap();
        let e = expand_bbit(&s);
        assert_eq!(e.dim(), 12);
        assert_eq!(e.to_dense(), vec![0, 0, 1, 0, 0, 0, 0, 1, 1, 0, 0, 0]);
    }

    #[test]
    fn one_bit_zeros() {
        let e = expand_bbit(&BBitSketch::from_values(vec![0, 0], 1).unwrap());
        assert_eq!(e.to_dense(), vec![0, 1, 0, 1]);
    }

    #[test]
    fn dot_counts_matches() {
        let a = BBitSketch::from_values(vec![1, 2, 3, 0], 2).unwrap();
        let b = BBitSketch::from_values(vec![1, 0, 3, 1], 2).unwrap();
        assert_eq!(
            expand_bbit(&a).dot(&expand_bbit(&b)) as f64 / 4.0,
            estimate_pb(&a, &b).unwrap()
        );
    }

    #[test]
    fn dataset_encoding() {
        let fam = TwoUniversalHashFamily::new(10, 1000, 1).unwrap();
        let sets = vec![
            (SparseBinarySet::new(vec![1, 5, 9], 1000).unwrap(), Label::Positive),
            (SparseBinarySet::new(vec![1, 5, 9], 1000).unwrap(), Label::Negative),
            (SparseBinarySet::new(vec![700], 1000).unwrap(), Label::Positive),
        ];
        let out: Vec<_> = encode_dataset(sets, &fam, 4).collect::<Result<_>>().unwrap();
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|(e, _)| e.active().len() == 10 && e.dim() == 160));
        assert_eq!(out[0].0, out[1].0);
        assert_eq!(out[1].1, Label::Negative);
    }

    #[test]
    fn empty_record_reports_index() {
        let fam = TwoUniversalHashFamily::new(3, 100, 1).unwrap();
        let sets = vec![
            (SparseBinarySet::new(vec![1], 100).unwrap(), Label::Positive),
            (SparseBinarySet::new(vec![], 100).unwrap(), Label::Positive),
        ];
        let res: Result<Vec<_>> = encode_dataset(sets, &fam, 2).collect();
        assert!(matches!(res, Err(Error::Record { index: 1, .. })));
    }

    #[test]
    fn vw_compression() {
        let e = expand_bbit(&BBitSketch::from_values(vec![3, 1, 4, 1, 5], 4).unwrap());
        let spec = BucketHashSpec::new(16, 2, 3).unwrap();
        let g = compress_expanded_with_vw(&e, &spec).unwrap();
        assert!(g.buckets.iter().filter(|&&v| v != 0.0).count() <= 5);
        let too_big = BucketHashSpec::new(80, 2, 3).unwrap();
        assert!(compress_expanded_with_vw(&e, &too_big).is_err());
    }
}
