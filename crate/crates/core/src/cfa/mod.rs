//! Control-flow attestation at protocol level.
//!
//! Each actor appends [`Checkpoint`]s to a hash-chained [`CheckpointLog`] as
//! its pipeline runs, seals the log into a signed [`AttestationReport`], and a
//! verifier replays the chain, the signature and every transition against an
//! expected [`ControlFlowGraph`].

mod graph;
mod log;
mod verify;

pub use graph::{cfa_check, ControlFlowGraph, GraphError};
pub use log::{AttestationReport, Checkpoint, CheckpointLog, Label, LogEntry};
pub use verify::{verify_trace, HaltReason, Verdict};
