//! Experiment orchestration: configuration, data provisioning, metrics and
//! CSV output.

mod config;
mod csv;
mod experiment;
mod idx;
mod metrics;

pub use config::{parse_config, DataConfig, DataSourceKind, DhGroup, ExperimentConfig, KEYS};
pub use csv::{emit_csv, to_csv, CSV_HEADER, NOT_APPLICABLE};
pub use experiment::{client_id, provision_data, run_experiment, Experiment, Provisioned};
pub use idx::{encode_idx, load_idx, parse_idx, IdxError, IMAGES_MAGIC, LABELS_MAGIC};
pub use metrics::{
    compute_metrics, MetricsTable, Ratio, RoundMetrics, RoundReport, SubmissionRecord, Summary,
};

use std::path::PathBuf;

use thiserror::Error;

use crate::adversary::AdversaryError;
use crate::model::ModelError;
use crate::protocol::ProtocolError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: {key}: {message}")]
    Value {
        line: usize,
        key: String,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Idx(#[from] IdxError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("metrics table is empty")]
    EmptyTable,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error("run aborted in round {round}: {message}")]
    Aborted {
        round: u32,
        message: String,
        partial: Box<MetricsTable>,
    },
}
