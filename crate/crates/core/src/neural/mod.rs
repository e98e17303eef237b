//! Dense feed-forward network trained with MSE and Adam, written out by hand.
//!
//! Batches are `ndarray` matrices with one sample per row. All arithmetic is
//! `f64`, single-threaded, and deterministic for a fixed seed.

mod activation;
mod adam;
mod checkpoint;
mod layer;
mod network;

use thiserror::Error;

pub use activation::{relu, sigmoid, Activation};
pub use adam::{AdamConfig, AdamState};
pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointError, MAGIC, VERSION};
pub use layer::{DenseLayer, DropoutLayer, Layer};
pub use network::{
    default_topology, mse, mse_batch, Gradients, LayerSpec, Network, Trace, DEFAULT_DROPOUT, DEFAULT_HIDDEN,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NeuralError {
    #[error("width mismatch: expected {expected}, got {got}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("dropout rate {0} outside [0, 1)")]
    InvalidDropout(f64),
    #[error("network has no dense layer")]
    EmptyNetwork,
    #[error("empty batch")]
    EmptyBatch,
    #[error("parameter and gradient shapes differ")]
    ShapeMismatch,
    #[error("forward trace unusable: {0}")]
    TraceMismatch(&'static str),
}
