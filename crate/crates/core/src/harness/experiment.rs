use std::time::Instant;

use super::metrics::compute_metrics;
use super::{
    emit_csv, load_idx, ConfigError, DataSourceKind, ExperimentConfig, HarnessError, MetricsTable,
    RoundReport, SubmissionRecord,
};
use crate::adversary::{spawn_sybil, Adversary};
use crate::model::{generate_synthetic, Dataset, Model};
use crate::protocol::{Client, Federation, Server, ServerConfig};
use crate::seed::derive_seed;

/// Client training sets and the shared held-out evaluation set.
#[derive(Clone, Debug, PartialEq)]
pub struct Provisioned {
    pub clients: Vec<Dataset>,
    pub eval: Dataset,
}

fn split_tail(data: &Dataset, hold: usize) -> (Dataset, Dataset) {
    let n = data.len();
    let train: Vec<usize> = (0..n - hold).collect();
    let eval: Vec<usize> = (n - hold..n).collect();
    (data.select(&train), data.select(&eval))
}

/// Synthetic data holds out the last fifth (at least one example) of every
/// client's rows. IDX data holds out the last fifth of the drawn subset and
/// deals the rest round-robin to clients.
pub fn provision_data(cfg: &ExperimentConfig) -> Result<Provisioned, HarnessError> {
    let seed = derive_seed(cfg.seed, "data", 0);
    match cfg.data.source {
        DataSourceKind::Synthetic => {
            let d = &cfg.data;
            let all = generate_synthetic(
                cfg.clients,
                d.per_client,
                d.features,
                d.classes,
                d.separation,
                seed,
            )?;
            let mut clients = Vec::with_capacity(all.len());
            let mut evals = Vec::with_capacity(all.len());
            for data in &all {
                let (train, eval) = split_tail(data, (data.len() / 5).max(1));
                clients.push(train);
                evals.push(eval);
            }
            Ok(Provisioned {
                clients,
                eval: Dataset::concat(&evals)?,
            })
        }
        DataSourceKind::Idx => {
            let missing =
                || HarnessError::Config(ConfigError::Invalid("IDX paths are not set".into()));
            let images = cfg.data.idx_images.as_ref().ok_or_else(missing)?;
            let labels = cfg.data.idx_labels.as_ref().ok_or_else(missing)?;
            let all = load_idx(images, labels, Some(cfg.data.subset), seed)?;
            let (pool, eval) = split_tail(&all, all.len() / 5);
            let clients = (0..cfg.clients)
                .map(|c| {
                    let rows: Vec<usize> = (c..pool.len()).step_by(cfg.clients).collect();
                    pool.select(&rows)
                })
                .collect();
            Ok(Provisioned { clients, eval })
        }
    }
}

pub fn client_id(index: usize) -> String {
    format!("client-{index:03}")
}

/// A configured federation, adversary and evaluation set, ready to run.
pub struct Experiment {
    config: ExperimentConfig,
    federation: Federation,
    adversary: Adversary,
    eval: Dataset,
    table: MetricsTable,
}

impl Experiment {
    pub fn setup(config: &ExperimentConfig) -> Result<Self, HarnessError> {
        config
            .validate()
            .map_err(|m| HarnessError::Config(ConfigError::Invalid(m)))?;
        let data = provision_data(config)?;
        let (features, classes) = (data.eval.num_features(), data.eval.num_classes());
        let model = Model::init(
            config.model,
            features,
            classes,
            derive_seed(config.seed, "model", 0),
        )?;
        let dh = config.dh_group.params();
        let server = Server::new(
            model.params().clone(),
            config.key_bits,
            dh.clone(),
            derive_seed(config.seed, "server", 0),
            ServerConfig {
                security: config.security,
                require_encryption: config.encrypt,
                check_attestation: true,
            },
        )?;
        let mut federation = Federation::new(server, model, config.train, config.encrypt)?;

        let ids: Vec<String> = (0..config.clients).map(client_id).collect();
        let attack = crate::adversary::AttackConfig {
            seed: config.attack_seed(),
            ..config.attack
        };
        let mut adversary = Adversary::new(attack, &ids, config.key_bits)?;
        for (i, (id, d)) in ids.iter().zip(&data.clients).enumerate() {
            let d = adversary.poison_data(id, d.clone())?;
            let seed = derive_seed(config.seed, "client", i as u64);
            federation.enroll(Client::new(id.clone(), d, config.key_bits, &dh, seed)?)?;
        }
        let sybils = Adversary::sybil_count(&attack, config.clients);
        if sybils > 0 {
            let sybil_data = (0..sybils)
                .map(|i| data.clients[i % data.clients.len()].clone())
                .collect();
            adversary =
                adversary.with_sybils(spawn_sybil(sybil_data, config.key_bits, &dh, attack.seed)?);
        }
        Ok(Self {
            config: config.clone(),
            federation,
            adversary,
            eval: data.eval,
            table: MetricsTable::default(),
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn federation(&self) -> &Federation {
        &self.federation
    }

    pub fn adversary(&self) -> &Adversary {
        &self.adversary
    }

    pub fn eval_set(&self) -> &Dataset {
        &self.eval
    }

    pub fn table(&self) -> &MetricsTable {
        &self.table
    }

    pub fn into_table(self) -> MetricsTable {
        self.table
    }

    /// Runs one round and appends its report.
    pub fn run_round(&mut self) -> Result<&RoundReport, HarnessError> {
        let start = Instant::now();
        let outcome = self.federation.run_round(&mut self.adversary)?;
        let accuracy = self.federation.global_model().evaluate(&self.eval)?;
        let duration = start.elapsed();

        let records = SubmissionRecord::from_outcome(&outcome);
        let audit = self
            .federation
            .server()
            .audit()
            .records_for_round(outcome.round);
        let metrics = compute_metrics(&records, audit);
        self.table.reports.push(RoundReport {
            round: outcome.round,
            client_count: records.len(),
            records,
            metrics,
            aggregated: outcome.aggregated,
            no_update: outcome.unchanged(),
            dropouts: outcome.dropouts.len(),
            accuracy,
            duration,
        });
        Ok(self.table.reports.last().expect("just pushed"))
    }
}

/// Runs every configured round and writes the CSV if an output path is set.
/// A failing round stops the run; the partial table is returned inside the
/// error and written with a `partial` summary row.
pub fn run_experiment(config: &ExperimentConfig) -> Result<MetricsTable, HarnessError> {
    let mut experiment = Experiment::setup(config)?;
    for _ in 0..config.rounds {
        if let Err(e) = experiment.run_round() {
            let round = experiment.federation().server().state().round();
            let mut partial = experiment.into_table();
            partial.aborted = Some(e.to_string());
            if let Some(out) = &config.out {
                if !partial.is_empty() {
                    emit_csv(&partial, out, config.timing)?;
                }
            }
            return Err(HarnessError::Aborted {
                round,
                message: e.to_string(),
                partial: Box::new(partial),
            });
        }
    }
    let table = experiment.into_table();
    if let Some(out) = &config.out {
        emit_csv(&table, out, config.timing)?;
    }
    Ok(table)
}
