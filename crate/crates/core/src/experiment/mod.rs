//! Experiment drivers: sweeps, storage comparison and Monte Carlo checks.

mod config;
mod csv;
mod grid;
mod montecarlo;

pub use config::{ExperimentConfig, Method};
pub use csv::{write_grid_csv, write_storage_csv, CSV_SCHEMA, GRID_COLUMNS, STORAGE_COLUMNS};
pub use grid::{
    compare_storage, load_dataset, split_indices, train_eval, vw_bucket_grid, Dataset, GridRow, StorageRow,
    VW_BITS_NARROW, VW_BITS_WIDE,
};
pub use montecarlo::{
    mc_verify, mean_var, min_of_distinct, random_vector_pair, McCheck, McFormula, McParams, McReport,
    PartialPermutations, SetPair, COLLISION_ABS_TOL, VARIANCE_REL_TOL,
};
