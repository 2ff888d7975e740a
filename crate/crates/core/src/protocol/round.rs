use super::{
    Client, ClientHook, ClientRoundError, Honest, ProtocolError, ReceivedUpdate, Result, Server,
    ServerRound,
};
use crate::cfa::AttestationReport;
use crate::model::{Model, ParameterVector, TrainingConfig};

/// Ground truth about where a submission came from. The server never sees
/// this; it exists so metrics can be scored against reality.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Honest,
    /// Sent by an honest client, altered in transit.
    Tampered,
    /// Crafted by a compromised registered client.
    Poisoned,
    /// Honest pipeline over corrupted local data.
    DataPoisoned,
    Sybil,
    Replayed,
}

impl Provenance {
    /// Produced by a registered client running the unmodified pipeline.
    pub fn honest_sent(self) -> bool {
        matches!(
            self,
            Provenance::Honest | Provenance::Tampered | Provenance::DataPoisoned
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Provenance::Honest => "honest",
            Provenance::Tampered => "tampered",
            Provenance::Poisoned => "poisoned",
            Provenance::DataPoisoned => "data-poisoned",
            Provenance::Sybil => "sybil",
            Provenance::Replayed => "replayed",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Submission {
    pub bytes: Vec<u8>,
    pub provenance: Provenance,
}

impl Submission {
    pub fn honest(bytes: Vec<u8>) -> Self {
        Self {
            bytes,
            provenance: Provenance::Honest,
        }
    }
}

pub struct InjectContext<'a> {
    pub round: u32,
    pub global: &'a Model,
    pub train: &'a TrainingConfig,
    pub encrypt: bool,
}

/// Attack surface of a round: what runs inside each client, what happens to
/// bytes in transit, and what extra traffic reaches the server.
pub trait Interceptor {
    fn hook(&self, _client_id: &str) -> &dyn ClientHook {
        &Honest
    }

    fn intercept(&mut self, _round: u32, _client_id: &str, bytes: Vec<u8>) -> Submission {
        Submission::honest(bytes)
    }

    /// Extra submissions, delivered after every registered client's.
    fn inject(&mut self, _ctx: &InjectContext<'_>) -> Result<Vec<Submission>> {
        Ok(Vec::new())
    }
}

pub struct NoAttack;

impl Interceptor for NoAttack {}

#[derive(Clone, Debug)]
pub struct SubmissionOutcome {
    pub provenance: Provenance,
    pub received: ReceivedUpdate,
}

#[derive(Debug)]
pub struct RoundOutcome {
    pub round: u32,
    /// In delivery order.
    pub submissions: Vec<SubmissionOutcome>,
    /// Clients whose round produced no update.
    pub dropouts: Vec<ClientRoundError>,
    pub aggregated: usize,
    pub delta: Option<ParameterVector>,
    pub server_trace: AttestationReport,
}

impl RoundOutcome {
    /// No update reached aggregation; the global model did not move.
    pub fn unchanged(&self) -> bool {
        self.delta.is_none()
    }
}

/// A server, its enrolled clients and the shared round settings.
pub struct Federation {
    server: Server,
    clients: Vec<Client>,
    template: Model,
    train: TrainingConfig,
    encrypt: bool,
}

impl Federation {
    /// `template` fixes the architecture; its parameters must match the
    /// server's initial global state.
    pub fn new(
        server: Server,
        template: Model,
        train: TrainingConfig,
        encrypt: bool,
    ) -> Result<Self> {
        if template.params().layout() != server.state().params().layout() {
            return Err(ProtocolError::Model(
                crate::model::ModelError::LayoutMismatch,
            ));
        }
        train.validate()?;
        Ok(Self {
            server,
            clients: Vec::new(),
            template,
            train,
            encrypt,
        })
    }

    /// Registers the client's keys and establishes its session key.
    pub fn enroll(&mut self, mut client: Client) -> Result<()> {
        let server_public = self.server.register_client(
            client.id(),
            client.signing_key().public().clone(),
            client.dh_public().clone(),
        )?;
        client.establish_session(&server_public, self.server.dh_params())?;
        self.clients.push(client);
        Ok(())
    }

    pub fn server(&self) -> &Server {
        &self.server
    }

    pub fn clients(&self) -> &[Client] {
        &self.clients
    }

    pub fn train_config(&self) -> &TrainingConfig {
        &self.train
    }

    pub fn global_model(&self) -> Model {
        self.template
            .with_params(self.server.state().params().clone())
            .expect("global state keeps the template layout")
    }

    /// Broadcasts the global model, collects every client's update through
    /// `interceptor`, then verifies, aggregates and applies on the server.
    pub fn run_round(&mut self, interceptor: &mut dyn Interceptor) -> Result<RoundOutcome> {
        if self.clients.is_empty() {
            return Err(ProtocolError::NoClients);
        }
        let global = self.global_model();
        let round = self.server.state().round();
        self.server.begin_round();

        let mut submissions = Vec::with_capacity(self.clients.len());
        let mut dropouts = Vec::new();
        for client in &self.clients {
            let hook = interceptor.hook(client.id());
            match client.client_round(&global, round, &self.train, self.encrypt, hook) {
                Ok(msg) => {
                    submissions.push(interceptor.intercept(round, client.id(), msg.to_bytes()))
                }
                Err(e) => dropouts.push(*e),
            }
        }
        let ctx = InjectContext {
            round,
            global: &global,
            train: &self.train,
            encrypt: self.encrypt,
        };
        submissions.extend(interceptor.inject(&ctx)?);

        let provenance: Vec<Provenance> = submissions.iter().map(|s| s.provenance).collect();
        for submission in submissions {
            self.server.receive(submission.bytes);
        }
        let ServerRound {
            round,
            received,
            aggregated,
            delta,
            trace,
        } = self.server.close_round()?;

        Ok(RoundOutcome {
            round,
            submissions: provenance
                .into_iter()
                .zip(received)
                .map(|(provenance, received)| SubmissionOutcome {
                    provenance,
                    received,
                })
                .collect(),
            dropouts,
            aggregated,
            delta,
            server_trace: trace,
        })
    }
}
