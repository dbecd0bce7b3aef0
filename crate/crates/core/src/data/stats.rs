use crate::error::{Error, Result};
use crate::learner::LabeledExample;

/// Summary of a dataset: size, dimensionality and nonzeros per example.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DatasetStats {
    pub n: usize,
    /// Largest feature index plus one.
    pub universe_size: u64,
    pub nnz_median: f64,
    pub nnz_mean: f64,
}

/// Incremental form of [`compute_stats`] for streamed input.
#[derive(Clone, Debug, Default)]
pub struct StatsAccumulator {
    nnz: Vec<u32>,
    universe: u64,
}

impl StatsAccumulator {
    pub fn push(&mut self, e: &LabeledExample) {
        self.nnz.push(e.nnz() as u32);
        if let Some(m) = e.max_index() {
            self.universe = self.universe.max(m + 1);
        }
    }

    pub fn finish(mut self) -> Result<DatasetStats> {
        let n = self.nnz.len();
        if n == 0 {
            return Err(Error::Degenerate("no examples".into()));
        }
        self.nnz.sort_unstable();
        let median = if n % 2 == 1 {
            self.nnz[n / 2] as f64
        } else {
            (self.nnz[n / 2 - 1] as f64 + self.nnz[n / 2] as f64) / 2.0
        };
        let mean = self.nnz.iter().map(|&x| x as f64).sum::<f64>() / n as f64;
        Ok(DatasetStats {
            n,
            universe_size: self.universe,
            nnz_median: median,
            nnz_mean: mean,
        })
    }
}

pub fn compute_stats<'a>(data: impl IntoIterator<Item = &'a LabeledExample>) -> Result<DatasetStats> {
    let mut acc = StatsAccumulator::default();
    data.into_iter().for_each(|e| acc.push(e));
    acc.finish()
}
