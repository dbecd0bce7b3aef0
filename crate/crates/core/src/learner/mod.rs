//! Linear SVM and logistic regression on sparse features.

mod example;
mod model;
mod solver;

pub use example::{Label, LabeledExample};
pub use model::{LinearModel, LossKind};
pub use solver::{
    default_c_grid, evaluate_accuracy, objective, predict, train, train_sweep, TrainConfig, TrainReport, MAX_DIM,
};
