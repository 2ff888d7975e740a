use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng;

use super::{
    flip_labels, poison_update, replay, tamper_bytes, AttackConfig, AttackKind, Captured, Result,
};
use crate::crypto::{hash_parts, keygen_signature, SignatureKeyPair, RSA_PKCS1_SHA256};
use crate::model::{Dataset, ParameterVector};
use crate::protocol::{
    Client, ClientHook, Honest, InjectContext, Interceptor, Provenance, SignedUpdate, Submission,
};
use crate::seed::{derive_seed, rng_from_seed};

fn client_round_seed(seed: u64, domain: &str, client_id: &str, round: u32) -> u64 {
    let d = hash_parts(&[client_id.as_bytes(), &round.to_be_bytes()]);
    let mut first = [0u8; 8];
    first.copy_from_slice(&d.as_bytes()[..8]);
    derive_seed(seed, domain, u64::from_be_bytes(first))
}

/// Replaces the trained update of targeted clients with
/// [`poison_update`]`(update, λ, noise · |λ| · rms(update))`.
pub struct PoisonHook {
    /// `None` targets every client the hook runs in.
    targets: Option<BTreeSet<String>>,
    lambda: f64,
    noise: f64,
    seed: u64,
    /// Re-signs poisoned updates; `None` leaves the client's own key.
    signer: Option<SignatureKeyPair>,
}

impl PoisonHook {
    pub fn new(
        targets: Option<BTreeSet<String>>,
        lambda: f64,
        noise: f64,
        seed: u64,
        signer: Option<SignatureKeyPair>,
    ) -> Self {
        Self {
            targets,
            lambda,
            noise,
            seed,
            signer,
        }
    }

    fn targets(&self, client_id: &str) -> bool {
        self.targets.as_ref().is_none_or(|t| t.contains(client_id))
    }
}

impl ClientHook for PoisonHook {
    fn after_training(
        &self,
        client_id: &str,
        round: u32,
        update: ParameterVector,
    ) -> ParameterVector {
        if !self.targets(client_id) {
            return update;
        }
        let n = update.len().max(1) as f64;
        let rms = (update.values().iter().map(|v| v * v).sum::<f64>() / n).sqrt();
        let std = self.noise * self.lambda.abs() * rms;
        let seed = client_round_seed(self.seed, "poison", client_id, round);
        // Overflowing poison degrades to a null contribution.
        poison_update(&update, self.lambda, std, seed)
            .unwrap_or_else(|_| ParameterVector::zeros(update.layout().clone()))
    }

    fn update_signer(&self, client_id: &str) -> Option<&SignatureKeyPair> {
        if self.targets(client_id) {
            self.signer.as_ref()
        } else {
            None
        }
    }
}

/// One attack campaign. Compromised clients are drawn from the registered
/// ids by `round(fraction · N)`; Sybils are attached with
/// [`Adversary::with_sybils`].
pub struct Adversary {
    config: AttackConfig,
    compromised: BTreeSet<String>,
    poison: PoisonHook,
    sybil_hook: PoisonHook,
    sybils: Vec<Client>,
    captured: Vec<Captured>,
}

impl Adversary {
    pub fn new(config: AttackConfig, client_ids: &[String], key_bits: usize) -> Result<Self> {
        config.validate()?;
        let count = match config.kind {
            AttackKind::None | AttackKind::Sybil => 0,
            _ => config.compromised_count(client_ids.len()),
        };
        let mut rng = rng_from_seed(derive_seed(config.seed, "adversary/compromise", 0));
        let compromised: BTreeSet<String> = sample(&mut rng, client_ids.len(), count)
            .into_iter()
            .map(|i| client_ids[i].clone())
            .collect();
        let signer = if config.kind == AttackKind::ModelPoison && !config.insider {
            let s = derive_seed(config.seed, "adversary/sign", 0);
            Some(keygen_signature(RSA_PKCS1_SHA256, key_bits, s)?)
        } else {
            None
        };
        let lambda = config.strength();
        Ok(Self {
            poison: PoisonHook::new(
                Some(compromised.clone()),
                lambda,
                config.noise,
                config.seed,
                signer,
            ),
            sybil_hook: PoisonHook::new(None, lambda, config.noise, config.seed, None),
            config,
            compromised,
            sybils: Vec::new(),
            captured: Vec::new(),
        })
    }

    /// Sybils only act under [`AttackKind::Sybil`].
    pub fn with_sybils(mut self, sybils: Vec<Client>) -> Self {
        self.sybils = sybils;
        self
    }

    /// Number of Sybil identities this configuration fabricates for `num_clients`.
    pub fn sybil_count(config: &AttackConfig, num_clients: usize) -> usize {
        if config.kind == AttackKind::Sybil {
            config.compromised_count(num_clients)
        } else {
            0
        }
    }

    pub fn config(&self) -> &AttackConfig {
        &self.config
    }

    pub fn compromised(&self) -> &BTreeSet<String> {
        &self.compromised
    }

    pub fn is_compromised(&self, client_id: &str) -> bool {
        self.compromised.contains(client_id)
    }

    pub fn captured(&self) -> &[Captured] {
        &self.captured
    }

    /// Local data a client trains on: label-flipped for data-poisoned clients.
    pub fn poison_data(&self, client_id: &str, data: Dataset) -> Result<Dataset> {
        if self.config.kind != AttackKind::DataPoison || !self.is_compromised(client_id) {
            return Ok(data);
        }
        let seed = client_round_seed(self.config.seed, "flip", client_id, 0);
        flip_labels(&data, self.config.strength(), seed)
    }

    fn tamper(&self, round: u32, client_id: &str, bytes: Vec<u8>) -> Submission {
        // Decoding our own client's bytes cannot fail; fall back to the
        // whole message if it somehow does.
        let span = SignedUpdate::from_bytes(&bytes)
            .map(|m| m.payload_span())
            .unwrap_or(0..bytes.len());
        let seed = client_round_seed(self.config.seed, "tamper", client_id, round);
        let bit = span.start * 8 + rng_from_seed(seed).gen_range(0..span.len() * 8);
        Submission {
            bytes: tamper_bytes(&bytes, Some(bit), seed).expect("bit lies inside the message"),
            provenance: Provenance::Tampered,
        }
    }
}

impl Interceptor for Adversary {
    fn hook(&self, _client_id: &str) -> &dyn ClientHook {
        match self.config.kind {
            AttackKind::ModelPoison => &self.poison,
            _ => &Honest,
        }
    }

    fn intercept(&mut self, round: u32, client_id: &str, bytes: Vec<u8>) -> Submission {
        if !self.is_compromised(client_id) {
            return Submission::honest(bytes);
        }
        match self.config.kind {
            AttackKind::ModelPoison => Submission {
                bytes,
                provenance: Provenance::Poisoned,
            },
            AttackKind::DataPoison => Submission {
                bytes,
                provenance: Provenance::DataPoisoned,
            },
            AttackKind::Tamper => self.tamper(round, client_id, bytes),
            AttackKind::Replay => {
                self.captured.push(Captured {
                    round,
                    client_id: client_id.to_string(),
                    bytes: bytes.clone(),
                });
                Submission::honest(bytes)
            }
            AttackKind::None | AttackKind::Sybil => Submission::honest(bytes),
        }
    }

    fn inject(&mut self, ctx: &InjectContext<'_>) -> crate::protocol::Result<Vec<Submission>> {
        match self.config.kind {
            AttackKind::Sybil => self
                .sybils
                .iter()
                .map(|s| {
                    // No session key, so Sybils always send in clear.
                    let msg = s
                        .client_round(ctx.global, ctx.round, ctx.train, false, &self.sybil_hook)
                        .map_err(|e| e.source)?;
                    Ok(Submission {
                        bytes: msg.to_bytes(),
                        provenance: Provenance::Sybil,
                    })
                })
                .collect(),
            AttackKind::Replay => Ok(self
                .captured
                .iter()
                .filter(|c| c.round < ctx.round)
                .map(|c| replay(c, ctx.round).expect("captured in an earlier round"))
                .collect()),
            _ => Ok(Vec::new()),
        }
    }
}
