//! Secure federated learning simulator.
//!
//! Clients train locally, then hash and sign their parameter updates and ship
//! them (optionally encrypted under a Diffie-Hellman session key) together with
//! a signed, hash-chained trace of the checkpoints their pipeline passed
//! through. The server verifies identity, integrity, freshness and control
//! flow before folding an update into the size-weighted global average.
//!
//! Module map:
//!
//! * [`model`]: parameter vectors, datasets, logistic regression / MLP, local training.
//! * [`crypto`]: SHA-256, canonical update encoding, RSA signatures, DH, keystream cipher.
//! * [`cfa`]: control-flow graphs, checkpoint logs and trace verification.
//! * [`protocol`]: signed update messages, key registry, client/server round logic.
//! * [`adversary`]: poisoning, tampering, Sybil and replay injectors.
//! * [`harness`]: experiment config, IDX loading, metrics and CSV output.

pub mod adversary;
pub mod cfa;
pub mod crypto;
pub mod harness;
pub mod model;
pub mod protocol;
pub mod seed;
