//! Optimization and experiments: Adam, datasets, training loops, metrics,
//! robustness sweeps and the representation ablation.

mod adam;
mod config;
mod dataset;
mod fit;
mod metrics;
mod robustness;

pub use adam::{adam_step, AdamState};
pub use config::TrainConfig;
pub use dataset::{Label, LabelKind, LabeledDataset, LabeledItem, split_indices};
pub use fit::{fit, grad_check, train_classification, train_regression, LossKind};
pub use metrics::{evaluate, evaluate_classification, evaluate_regression, r_squared, Metrics, RegressionKind, Task};
pub use robustness::{
    ablate_representation, ablation_csv, robustness_sweep, sweep_csv, AblationRow, Perturbation, SweepRow,
};
