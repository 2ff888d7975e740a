use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{KeyRegistry, Payload, SignedUpdate};
use crate::cfa::{verify_trace, ControlFlowGraph, HaltReason, Verdict};
use crate::crypto::{canonical_decode, canonical_encode, decrypt, hash, Digest, SymmetricKey};
use crate::model::{Layout, ParameterVector};

/// Outcome of server-side verification; only [`VerdictReason::Ok`] is accepted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerdictReason {
    Ok,
    UnknownIdentity,
    BadSignature,
    DigestMismatch,
    ReplayedRound,
    CfaHalt(Option<HaltReason>),
    DecryptFailure,
    /// Bytes that do not decode, or an authentic update of the wrong shape.
    Malformed,
}

impl VerdictReason {
    pub fn name(&self) -> &'static str {
        match self {
            VerdictReason::Ok => "ok",
            VerdictReason::UnknownIdentity => "unknown-identity",
            VerdictReason::BadSignature => "bad-signature",
            VerdictReason::DigestMismatch => "digest-mismatch",
            VerdictReason::ReplayedRound => "replayed-round",
            VerdictReason::CfaHalt(_) => "cfa-halt",
            VerdictReason::DecryptFailure => "decrypt-failure",
            VerdictReason::Malformed => "malformed",
        }
    }

    /// Whether the update passed both the digest and the signature check.
    pub fn integrity_verified(&self) -> bool {
        matches!(
            self,
            VerdictReason::Ok | VerdictReason::ReplayedRound | VerdictReason::CfaHalt(_)
        )
    }
}

impl fmt::Display for VerdictReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerdictReason::CfaHalt(Some(reason)) => write!(f, "cfa-halt({reason})"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VerificationVerdict {
    pub reason: VerdictReason,
}

impl VerificationVerdict {
    pub fn accepted(&self) -> bool {
        self.reason == VerdictReason::Ok
    }
}

impl From<VerdictReason> for VerificationVerdict {
    fn from(reason: VerdictReason) -> Self {
        Self { reason }
    }
}

/// Everything the server consults while checking one message.
pub struct VerifyContext<'a> {
    pub registry: &'a KeyRegistry,
    pub sessions: &'a BTreeMap<String, SymmetricKey>,
    pub client_graph: &'a ControlFlowGraph,
    pub current_round: u32,
    /// `(client, round)` pairs already accepted.
    pub accepted: &'a BTreeSet<(String, u32)>,
    pub layout: &'a Layout,
    pub check_attestation: bool,
    /// Reject clear payloads from clients that hold a session key.
    pub require_encryption: bool,
}

/// Result of [`server_verify`]: the verdict, plus whatever could be recovered.
#[derive(Clone, Debug)]
pub struct Verification {
    pub verdict: VerificationVerdict,
    /// Recovered update, when the payload decoded to the expected shape.
    pub update: Option<ParameterVector>,
    /// Digest recomputed from the recovered payload.
    pub recomputed: Option<Digest>,
}

impl Verification {
    fn reject(reason: VerdictReason) -> Self {
        Self {
            verdict: reason.into(),
            update: None,
            recomputed: None,
        }
    }
}

/// Recovers the update values carried by `msg`.
fn recover(ctx: &VerifyContext<'_>, msg: &SignedUpdate) -> Result<Vec<f64>, VerdictReason> {
    match &msg.payload {
        Payload::Clear(values) => {
            if ctx.require_encryption && ctx.sessions.contains_key(&msg.client_id) {
                return Err(VerdictReason::DecryptFailure);
            }
            Ok(values.clone())
        }
        Payload::Sealed(envelope) => {
            let key = ctx
                .sessions
                .get(&msg.client_id)
                .ok_or(VerdictReason::UnknownIdentity)?;
            let plain = decrypt(key, envelope).map_err(|_| VerdictReason::DecryptFailure)?;
            let inner = canonical_decode(&plain).map_err(|_| VerdictReason::Malformed)?;
            if inner.client_id != msg.client_id
                || inner.round != msg.round
                || inner.data_size != msg.data_size
            {
                return Err(VerdictReason::DigestMismatch);
            }
            Ok(inner.values)
        }
    }
}

/// Checks, in order: payload recovery (decryption), identity, digest,
/// signature, round freshness and attestation. The first failure decides
/// the verdict.
pub fn server_verify(ctx: &VerifyContext<'_>, msg: &SignedUpdate) -> Verification {
    let values = match recover(ctx, msg) {
        Ok(v) => v,
        Err(reason) => return Verification::reject(reason),
    };
    let Ok(encoded) = canonical_encode(&values, msg.round, &msg.client_id, msg.data_size) else {
        return Verification::reject(VerdictReason::Malformed);
    };
    let recomputed = hash(&encoded);
    let update = ParameterVector::new(ctx.layout.clone(), values).ok();
    let with = |reason: VerdictReason| Verification {
        verdict: reason.into(),
        update: update.clone(),
        recomputed: Some(recomputed),
    };

    let Some(entry) = ctx.registry.get(&msg.client_id) else {
        return with(VerdictReason::UnknownIdentity);
    };
    if recomputed != msg.digest {
        return with(VerdictReason::DigestMismatch);
    }
    if !entry.signature_key.verify(&recomputed, &msg.signature) {
        return with(VerdictReason::BadSignature);
    }
    if msg.round != ctx.current_round || ctx.accepted.contains(&(msg.client_id.clone(), msg.round))
    {
        return with(VerdictReason::ReplayedRound);
    }
    if ctx.check_attestation {
        let report = &msg.attestation;
        let bound =
            report.actor == msg.client_id
                && report.log.entries().iter().all(|e| {
                    e.checkpoint.actor == msg.client_id && e.checkpoint.round == msg.round
                });
        if !bound {
            return with(VerdictReason::CfaHalt(None));
        }
        if let Verdict::Halt { reason, .. } =
            verify_trace(ctx.client_graph, report, &entry.signature_key)
        {
            return with(VerdictReason::CfaHalt(Some(reason)));
        }
    }
    if update.is_none() {
        return with(VerdictReason::Malformed);
    }
    with(VerdictReason::Ok)
}
