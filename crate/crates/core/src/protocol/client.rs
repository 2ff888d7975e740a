use num_bigint::BigUint;
use thiserror::Error;

use super::{Payload, ProtocolError, Result, SignedUpdate};
use crate::cfa::{AttestationReport, Checkpoint, CheckpointLog, Label};
use crate::crypto::{
    canonical_encode, dh_keygen, dh_shared, encrypt, hash, kdf, keygen_signature, nonce_for,
    DhKeyPair, DhParams, SignatureKeyPair, SymmetricKey, RSA_PKCS1_SHA256,
};
use crate::model::{local_train, Dataset, Model, ParameterVector, TrainingConfig};
use crate::seed::derive_seed;

/// Interception points inside a client's round, used to model compromised
/// nodes. The default methods are the honest pipeline.
pub trait ClientHook {
    /// Runs between training and hashing.
    fn after_training(
        &self,
        _client_id: &str,
        _round: u32,
        update: ParameterVector,
    ) -> ParameterVector {
        update
    }

    /// Key that signs the update digest instead of the client's own.
    fn update_signer(&self, _client_id: &str) -> Option<&SignatureKeyPair> {
        None
    }
}

/// The unmodified pipeline.
pub struct Honest;

impl ClientHook for Honest {}

/// A round that produced no update. The partial trace is still sealed so a
/// verifier can see where it stopped.
#[derive(Debug, Error)]
#[error("client {client_id} round {round} failed: {source}")]
pub struct ClientRoundError {
    pub client_id: String,
    pub round: u32,
    pub trace: AttestationReport,
    #[source]
    pub source: ProtocolError,
}

pub struct Client {
    id: String,
    data: Dataset,
    signing: SignatureKeyPair,
    dh: DhKeyPair,
    session: Option<SymmetricKey>,
    seed: u64,
}

impl std::fmt::Debug for Client {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Client")
            .field("id", &self.id)
            .field("examples", &self.data.len())
            .field("has_session", &self.session.is_some())
            .finish()
    }
}

impl Client {
    /// Generates signing and DH keys from `seed`.
    pub fn new(
        id: impl Into<String>,
        data: Dataset,
        key_bits: usize,
        dh_params: &DhParams,
        seed: u64,
    ) -> Result<Self> {
        let signing = keygen_signature(
            RSA_PKCS1_SHA256,
            key_bits,
            derive_seed(seed, "client/sign", 0),
        )?;
        let dh = dh_keygen(dh_params, derive_seed(seed, "client/dh", 0));
        Ok(Self::from_parts(id, data, signing, dh, seed))
    }

    pub fn from_parts(
        id: impl Into<String>,
        data: Dataset,
        signing: SignatureKeyPair,
        dh: DhKeyPair,
        seed: u64,
    ) -> Self {
        Self {
            id: id.into(),
            data,
            signing,
            dh,
            session: None,
            seed,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn set_data(&mut self, data: Dataset) {
        self.data = data;
    }

    pub fn signing_key(&self) -> &SignatureKeyPair {
        &self.signing
    }

    pub fn dh_public(&self) -> &BigUint {
        self.dh.public()
    }

    pub fn session_key(&self) -> Option<&SymmetricKey> {
        self.session.as_ref()
    }

    /// Derives the session key from the server's DH public value.
    pub fn establish_session(&mut self, server_public: &BigUint, params: &DhParams) -> Result<()> {
        let secret = dh_shared(self.dh.private(), server_public, params)?;
        self.session = Some(kdf(&secret));
        Ok(())
    }

    /// One secure local round: train from the global model, derive the update,
    /// hash and sign it, optionally seal it, and attach the attested trace.
    pub fn client_round(
        &self,
        global: &Model,
        round: u32,
        train: &TrainingConfig,
        encrypt_payload: bool,
        hook: &dyn ClientHook,
    ) -> std::result::Result<SignedUpdate, Box<ClientRoundError>> {
        let mut log = CheckpointLog::new();
        let mark = |log: &mut CheckpointLog, label| {
            log.record(Checkpoint::new(label, self.id.as_str(), round));
        };
        let fail = |log: CheckpointLog, source: ProtocolError| {
            Box::new(ClientRoundError {
                client_id: self.id.clone(),
                round,
                trace: AttestationReport::seal(self.id.as_str(), log, &self.signing),
                source,
            })
        };

        mark(&mut log, Label::RoundStart);
        mark(&mut log, Label::TrainBegin);
        let cfg = TrainingConfig {
            seed: derive_seed(self.seed, "client/train", round as u64),
            ..*train
        };
        let outcome = match local_train(global, &self.data, &cfg) {
            Ok(o) => o,
            Err(e) => return Err(fail(log, e.into())),
        };
        mark(&mut log, Label::TrainEnd);

        let update = hook.after_training(&self.id, round, outcome.update);
        let data_size = self.data.len() as u64;
        let encoded = match canonical_encode(update.values(), round, &self.id, data_size) {
            Ok(bytes) => bytes,
            Err(e) => return Err(fail(log, e.into())),
        };
        let digest = hash(&encoded);
        mark(&mut log, Label::UpdateHashed);

        let signature = hook
            .update_signer(&self.id)
            .unwrap_or(&self.signing)
            .sign(&digest);
        mark(&mut log, Label::UpdateSigned);

        let payload = if encrypt_payload {
            let Some(key) = &self.session else {
                return Err(fail(log, ProtocolError::NoSession(self.id.clone())));
            };
            Payload::Sealed(encrypt(key, nonce_for(&self.id, round), &encoded))
        } else {
            Payload::Clear(update.into_values())
        };
        mark(&mut log, Label::UpdateSent);
        mark(&mut log, Label::RoundEnd);

        Ok(SignedUpdate {
            client_id: self.id.clone(),
            round,
            data_size,
            payload,
            digest,
            signature,
            attestation: AttestationReport::seal(self.id.as_str(), log, &self.signing),
        })
    }
}
