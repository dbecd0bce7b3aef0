use crate::error::{Error, Result};

/// A binary data point: the set of its nonzero feature ids over `[0, D)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SparseBinarySet {
    indices: Vec<u64>,
    universe_size: u64,
}

impl SparseBinarySet {
    /// Build from strictly increasing indices, all below `universe_size`.
    pub fn new(indices: Vec<u64>, universe_size: u64) -> Result<Self> {
        if universe_size == 0 {
            return Err(Error::invalid("universe size must be at least 1"));
        }
        if let Some(w) = indices.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!(
                "indices must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(&last) = indices.last() {
            if last >= universe_size {
                return Err(Error::OutOfRange {
                    index: last,
                    bound: universe_size,
                });
            }
        }
        Ok(Self { indices, universe_size })
    }

    /// Build from indices in any order; duplicates collapse.
    pub fn from_unsorted(indices: impl IntoIterator<Item = u64>, universe_size: u64) -> Result<Self> {
        let mut v: Vec<u64> = indices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self::new(v, universe_size)
    }

    pub fn indices(&self) -> &[u64] {
        &self.indices
    }

    pub fn universe_size(&self) -> u64 {
        self.universe_size
    }

    /// Cardinality `f`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Sparsity ratio `f / D`.
    pub fn sparsity(&self) -> f64 {
        self.indices.len() as f64 / self.universe_size as f64
    }

    pub fn contains(&self, t: u64) -> bool {
        self.indices.binary_search(&t).is_ok()
    }

    pub fn into_indices(self) -> Vec<u64> {
        self.indices
    }

    /// `|self ∩ other|` by a linear merge.
    pub fn intersection_size(&self, other: &Self) -> usize {
        let (a, b) = (&self.indices, &other.indices);
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

/// Resemblance `|S1 ∩ S2| / |S1 ∪ S2|`. Two empty sets have resemblance 1.
pub fn resemblance(s1: &SparseBinarySet, s2: &SparseBinarySet) -> Result<f64> {
    if s1.universe_size != s2.universe_size {
        return Err(Error::UniverseMismatch {
            left: s1.universe_size,
            right: s2.universe_size,
        });
    }
    let a = s1.intersection_size(s2);
    let union = s1.len() + s2.len() - a;
    if union == 0 {
        return Ok(1.0);
    }
    Ok(a as f64 / union as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ix: &[u64], d: u64) -> SparseBinarySet {
        SparseBinarySet::new(ix.to_vec(), d).unwrap()
    }

    #[test]
    fn resemblance_examples() {
        assert_eq!(resemblance(&set(&[1, 4], 8), &set(&[1, 4], 8)).unwrap(), 1.0);
        assert_eq!(resemblance(&set(&[1, 4], 8), &set(&[2, 5], 8)).unwrap(), 0.0);
        assert_eq!(resemblance(&set(&[0, 1, 2], 8), &set(&[1, 2, 3], 8)).unwrap(), 0.5);
        assert_eq!(resemblance(&set(&[], 8), &set(&[], 8)).unwrap(), 1.0);
        assert_eq!(resemblance(&set(&[], 8), &set(&[3], 8)).unwrap(), 0.0);
    }

    #[test]
    fn universe_mismatch_is_an_error() {
        let err = resemblance(&set(&[1], 8), &set(&[1], 16)).unwrap_err();
        assert!(matches!(err, Error::UniverseMismatch { left: 8, right: 16 }));
    }

    #[test]
    fn rejects_bad_indices() {
        assert!(SparseBinarySet::new(vec![3, 3], 8).is_err());
        assert!(SparseBinarySet::new(vec![4, 2], 8).is_err());
        assert!(matches!(
            SparseBinarySet::new(vec![8], 8),
            Err(Error::OutOfRange { index: 8, bound: 8 })
        ));
        assert!(SparseBinarySet::new(vec![], 0).is_err());
        let s = SparseBinarySet::from_unsorted([5, 1, 5, 3], 8).unwrap();
        assert_eq!(s.indices(), &[1, 3, 5]);
    }
}
