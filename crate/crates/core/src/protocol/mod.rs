//! The secure federated round: registration, signed and attested client
//! updates, server verification, weighted aggregation and the audit log.

mod aggregate;
mod audit;
mod client;
mod message;
mod registry;
mod round;
mod server;
mod verify;

pub use aggregate::{aggregate, AcceptedUpdate, GlobalModelState};
pub use audit::{AuditLog, AuditRecord};
pub use client::{Client, ClientHook, ClientRoundError, Honest};
pub use message::{Payload, SignedUpdate, WIRE_VERSION};
pub use registry::{KeyRegistry, RegistryEntry};
pub use round::{
    Federation, InjectContext, Interceptor, NoAttack, Provenance, RoundOutcome, Submission,
    SubmissionOutcome,
};
pub use server::{ReceivedUpdate, Server, ServerConfig, ServerRound, SERVER_ID};
pub use verify::{server_verify, VerdictReason, Verification, VerificationVerdict, VerifyContext};

use thiserror::Error;

use crate::cfa::Verdict;
use crate::crypto::CryptoError;
use crate::model::ModelError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("client {0:?} is already registered")]
    DuplicateClient(String),
    #[error("client {0:?} is not registered")]
    UnknownClient(String),
    #[error("client id must be 1..=65535 bytes, got {0}")]
    InvalidClientId(usize),
    #[error("client {0:?} has no session key")]
    NoSession(String),
    #[error("global model became non-finite")]
    NonFiniteGlobal,
    #[error("server trace failed verification in round {round}: {verdict:?}")]
    ServerTraceHalt { round: u32, verdict: Verdict },
    #[error("federation has no clients")]
    NoClients,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
}

pub type Result<T> = std::result::Result<T, ProtocolError>;
