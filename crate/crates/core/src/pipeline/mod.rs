//! Dataset generation, training, evaluation and closed-loop design checks.

mod dataset;
mod design;
mod evaluate;
mod train;

use thiserror::Error;

pub use dataset::{
    generate_dataset, read_dataset, record_rng, split, to_arrays, write_dataset, DatasetHeader, DatasetRecord,
    DATASET_FORMAT, DATASET_VERSION,
};
pub use design::{design, verify_design, Design, NotchMatch, PolarizationReport, Tolerances, VerificationReport};
pub use evaluate::{constant_baseline, evaluate, per_bit_accuracy, Metrics, Predictor};
pub use train::{train, train_with_progress, EpochRecord, TrainConfig, TrainOutcome, TrainReport, EARLY_STOP_MIN_DELTA};

use crate::features::FeatureError;
use crate::geometry::GeometryError;
use crate::neural::NeuralError;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Diverged { epoch: usize, loss: f64 },
    #[error("dataset line {line}: input has {got} values, model expects {expected}")]
    InputWidth { line: usize, expected: usize, got: usize },
    #[error("dataset line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
