//! Attack injectors: model and data poisoning, in-transit tampering, Sybil
//! identities and replay.
//!
//! The free functions are pure transformations. [`Adversary`] wires them into
//! a round through the [`Interceptor`](crate::protocol::Interceptor) points.

mod attacks;
mod config;
mod driver;

pub use attacks::{flip_labels, poison_update, replay, spawn_sybil, tamper_bytes, Captured};
pub use config::{AttackConfig, AttackKind};
pub use driver::{Adversary, PoisonHook};

use thiserror::Error;

use crate::model::ModelError;
use crate::protocol::ProtocolError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdversaryError {
    #[error("nothing to tamper with")]
    EmptyPayload,
    #[error("bit {index} is outside a {bits}-bit message")]
    BitOutOfRange { index: usize, bits: usize },
    #[error("a replay must target a later round than {captured}, got {round}")]
    NotLater { captured: u32, round: u32 },
    #[error("invalid attack configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

pub type Result<T> = std::result::Result<T, AdversaryError>;
