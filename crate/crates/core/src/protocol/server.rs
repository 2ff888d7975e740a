use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;

use super::{
    aggregate, server_verify, AcceptedUpdate, AuditLog, AuditRecord, GlobalModelState, KeyRegistry,
    ProtocolError, Result, SignedUpdate, VerdictReason, Verification, VerificationVerdict,
    VerifyContext,
};
use crate::cfa::{
    verify_trace, AttestationReport, Checkpoint, CheckpointLog, ControlFlowGraph, Label, Verdict,
};
use crate::crypto::{
    dh_keygen, dh_shared, kdf, keygen_signature, DhKeyPair, DhParams, SignatureKeyPair,
    SymmetricKey, RSA_PKCS1_SHA256,
};
use crate::model::ParameterVector;
use crate::seed::derive_seed;

pub const SERVER_ID: &str = "server";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ServerConfig {
    /// When off, every update whose payload can be recovered is aggregated;
    /// verdicts are still computed for reporting.
    pub security: bool,
    pub require_encryption: bool,
    pub check_attestation: bool,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            security: true,
            require_encryption: true,
            check_attestation: true,
        }
    }
}

/// Server-side view of one received message.
#[derive(Clone, Debug)]
pub struct ReceivedUpdate {
    /// Claimed sender, if the bytes decoded.
    pub client_id: Option<String>,
    pub verdict: VerificationVerdict,
    /// Whether the update was folded into the aggregate.
    pub admitted: bool,
    /// Signature verifies under the key registered for the claimed id.
    pub attributable: bool,
}

#[derive(Clone, Debug)]
pub struct ServerRound {
    pub round: u32,
    /// In arrival order.
    pub received: Vec<ReceivedUpdate>,
    pub aggregated: usize,
    /// `None` when nothing was aggregated and the model is unchanged.
    pub delta: Option<ParameterVector>,
    pub trace: AttestationReport,
}

pub struct Server {
    signing: SignatureKeyPair,
    dh: DhKeyPair,
    dh_params: DhParams,
    registry: KeyRegistry,
    sessions: BTreeMap<String, SymmetricKey>,
    state: GlobalModelState,
    accepted: BTreeSet<(String, u32)>,
    audit: AuditLog,
    client_graph: ControlFlowGraph,
    server_graph: ControlFlowGraph,
    config: ServerConfig,
    log: CheckpointLog,
    inbox: Vec<Vec<u8>>,
}

impl Server {
    pub fn new(
        initial: ParameterVector,
        key_bits: usize,
        dh_params: DhParams,
        seed: u64,
        config: ServerConfig,
    ) -> Result<Self> {
        let signing = keygen_signature(
            RSA_PKCS1_SHA256,
            key_bits,
            derive_seed(seed, "server/sign", 0),
        )?;
        let dh = dh_keygen(&dh_params, derive_seed(seed, "server/dh", 0));
        Ok(Self {
            signing,
            dh,
            dh_params,
            registry: KeyRegistry::new(),
            sessions: BTreeMap::new(),
            state: GlobalModelState::new(initial, 1),
            accepted: BTreeSet::new(),
            audit: AuditLog::new(),
            client_graph: ControlFlowGraph::default_client(),
            server_graph: ControlFlowGraph::default_server(),
            config,
            log: CheckpointLog::new(),
            inbox: Vec::new(),
        })
    }

    pub fn with_graphs(mut self, client: ControlFlowGraph, server: ControlFlowGraph) -> Self {
        self.client_graph = client;
        self.server_graph = server;
        self
    }

    pub fn config(&self) -> ServerConfig {
        self.config
    }

    pub fn registry(&self) -> &KeyRegistry {
        &self.registry
    }

    pub fn state(&self) -> &GlobalModelState {
        &self.state
    }

    pub fn audit(&self) -> &AuditLog {
        &self.audit
    }

    pub fn signing_key(&self) -> &SignatureKeyPair {
        &self.signing
    }

    pub fn dh_public(&self) -> &BigUint {
        self.dh.public()
    }

    pub fn dh_params(&self) -> &DhParams {
        &self.dh_params
    }

    /// Registers a client and derives its session key. Returns the server's
    /// DH public value for the client's side of the exchange.
    pub fn register_client(
        &mut self,
        client_id: &str,
        signature_key: crate::crypto::PublicKey,
        dh_public: BigUint,
    ) -> Result<BigUint> {
        let secret = dh_shared(self.dh.private(), &dh_public, &self.dh_params)?;
        self.registry
            .register(client_id, signature_key, dh_public, self.state.round())?;
        self.sessions.insert(client_id.to_string(), kdf(&secret));
        Ok(self.dh.public().clone())
    }

    fn mark(&mut self, label: Label) {
        self.log
            .record(Checkpoint::new(label, SERVER_ID, self.state.round()));
    }

    pub fn begin_round(&mut self) {
        self.log = CheckpointLog::new();
        self.inbox.clear();
        self.mark(Label::RoundStart);
    }

    pub fn receive(&mut self, bytes: Vec<u8>) {
        self.mark(Label::ServerReceived);
        self.inbox.push(bytes);
    }

    /// Verifies one message against the current round without recording it.
    pub fn verify(&self, msg: &SignedUpdate) -> Verification {
        let ctx = VerifyContext {
            registry: &self.registry,
            sessions: &self.sessions,
            client_graph: &self.client_graph,
            current_round: self.state.round(),
            accepted: &self.accepted,
            layout: self.state.params().layout(),
            check_attestation: self.config.check_attestation,
            require_encryption: self.config.require_encryption,
        };
        server_verify(&ctx, msg)
    }

    /// Verifies everything received, aggregates what passes, applies it and
    /// self-verifies the server trace. A failing server trace aborts the
    /// round and leaves the global state untouched.
    pub fn close_round(&mut self) -> Result<ServerRound> {
        if self.inbox.is_empty() {
            // Empty collection window.
            self.mark(Label::ServerReceived);
        }
        let round = self.state.round();
        let inbox = std::mem::take(&mut self.inbox);
        let mut accepted_now = self.accepted.clone();
        let mut audit_now = Vec::new();
        let mut updates = Vec::new();
        let mut received = Vec::with_capacity(inbox.len());

        for bytes in &inbox {
            let Ok(msg) = SignedUpdate::from_bytes(bytes) else {
                received.push(ReceivedUpdate {
                    client_id: None,
                    verdict: VerdictReason::Malformed.into(),
                    admitted: false,
                    attributable: false,
                });
                continue;
            };
            let ctx = VerifyContext {
                registry: &self.registry,
                sessions: &self.sessions,
                client_graph: &self.client_graph,
                current_round: round,
                accepted: &accepted_now,
                layout: self.state.params().layout(),
                check_attestation: self.config.check_attestation,
                require_encryption: self.config.require_encryption,
            };
            let verification = server_verify(&ctx, &msg);
            let registered = self.registry.get(&msg.client_id);
            let attributable = match (registered, verification.recomputed) {
                (Some(entry), Some(digest)) => entry.signature_key.verify(&digest, &msg.signature),
                _ => false,
            };
            let admitted = if self.config.security {
                verification.verdict.accepted()
            } else {
                verification.update.is_some()
            };
            if admitted {
                let update = verification
                    .update
                    .clone()
                    .expect("admitted updates decode");
                let digest = verification
                    .recomputed
                    .expect("admitted updates have a digest");
                accepted_now.insert((msg.client_id.clone(), msg.round));
                audit_now.push(AuditRecord {
                    client_id: msg.client_id.clone(),
                    round: msg.round,
                    digest,
                    signature: msg.signature.clone(),
                    public_key: registered.map(|e| e.signature_key.to_bytes()),
                });
                updates.push(AcceptedUpdate {
                    client_id: msg.client_id.clone(),
                    data_size: msg.data_size,
                    update,
                });
            }
            received.push(ReceivedUpdate {
                client_id: Some(msg.client_id),
                verdict: verification.verdict,
                admitted,
                attributable,
            });
        }
        self.mark(Label::ServerVerified);

        let delta = aggregate(&updates)?;
        self.mark(Label::Aggregated);
        let mut next = self.state.clone();
        match &delta {
            Some(d) => {
                next.apply_global(d)?;
            }
            None => next.skip_round(),
        }
        self.mark(Label::GlobalApplied);
        self.mark(Label::RoundEnd);

        let trace =
            AttestationReport::seal(SERVER_ID, std::mem::take(&mut self.log), &self.signing);
        let verdict = verify_trace(&self.server_graph, &trace, self.signing.public());
        if verdict != Verdict::Ok {
            return Err(ProtocolError::ServerTraceHalt { round, verdict });
        }

        self.state = next;
        self.accepted = accepted_now;
        for record in audit_now {
            self.audit.append(record);
        }
        Ok(ServerRound {
            round,
            received,
            aggregated: updates.len(),
            delta,
            trace,
        })
    }
}
