//! From-scratch classifiers and local training.

mod dataset;
mod network;
mod params;
mod synthetic;
mod train;

pub use dataset::Dataset;
pub use network::{Activation, Model, ModelKind};
pub use params::{Layout, ParameterVector};
pub use synthetic::generate_synthetic;
pub use train::{local_train, BatchSize, TrainOutcome, TrainingConfig};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parameter layouts differ")]
    LayoutMismatch,
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("label {label} out of range for {num_classes} classes")]
    LabelOutOfRange { label: usize, num_classes: usize },
    #[error("non-finite value encountered: {0}")]
    NonFinite(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;
