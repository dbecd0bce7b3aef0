//! Dataset ingestion, emission, feature combinations and synthetic data.

mod combos;
mod stats;
mod synth;
mod text;

pub use combos::{combined_universe, expand_combinations, DEFAULT_TRIPLE_MODULUS};
pub use stats::{compute_stats, DatasetStats, StatsAccumulator};
pub use synth::{generate_synthetic, SynthSpec};
pub use text::{parse_line, read_sparse_text, write_example, write_sparse_text, ReadOptions, SparseTextReader};
