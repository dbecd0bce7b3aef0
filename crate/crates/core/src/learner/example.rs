use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projection::SparseRealVector;
use crate::sketch::SparseBinarySet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn as_f64(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }

    pub fn from_i8(v: i8) -> Option<Self> {
        match v {
            1 => Some(Label::Positive),
            -1 => Some(Label::Negative),
            _ => None,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

/// One training example: sparse features with ascending indices and a ±1 label.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledExample {
    pub features: Vec<(u64, f64)>,
    pub label: Label,
}

impl LabeledExample {
    pub fn new(features: Vec<(u64, f64)>, label: Label) -> Result<Self> {
        if features.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::invalid("feature indices must be strictly increasing"));
        }
        Ok(Self { features, label })
    }

    /// A binary example with unit values at `indices`.
    pub fn binary(indices: &[u64], label: Label) -> Self {
        Self {
            features: indices.iter().map(|&i| (i, 1.0)).collect(),
            label,
        }
    }

    pub fn nnz(&self) -> usize {
        self.features.len()
    }

    pub fn max_index(&self) -> Option<u64> {
        self.features.last().map(|f| f.0)
    }

    /// The set of features with nonzero value.
    pub fn to_binary_set(&self, universe_size: u64) -> Result<SparseBinarySet> {
        let idx = self.features.iter().filter(|f| f.1 != 0.0).map(|f| f.0).collect();
        SparseBinarySet::new(idx, universe_size)
    }

    pub fn to_sparse_real(&self, universe_size: u64) -> Result<SparseRealVector> {
        SparseRealVector::new(self.features.clone(), universe_size)
    }
}
