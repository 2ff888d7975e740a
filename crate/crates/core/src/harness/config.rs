use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use super::ConfigError;
use crate::adversary::{AttackConfig, AttackKind};
use crate::crypto::{DhParams, DEFAULT_KEY_BITS};
use crate::model::{Activation, BatchSize, ModelKind, TrainingConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DataSourceKind {
    Synthetic,
    Idx,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataConfig {
    pub source: DataSourceKind,
    /// Examples generated per client, before the 20% evaluation hold-out.
    pub per_client: usize,
    pub features: usize,
    pub classes: usize,
    pub separation: f64,
    pub idx_images: Option<PathBuf>,
    pub idx_labels: Option<PathBuf>,
    /// Examples drawn from the IDX files, before the hold-out.
    pub subset: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DhGroup {
    Modp2048,
    Toy,
}

impl DhGroup {
    pub fn params(self) -> DhParams {
        match self {
            DhGroup::Modp2048 => DhParams::modp2048(),
            DhGroup::Toy => DhParams::toy(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub rounds: u32,
    pub clients: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub security: bool,
    pub encrypt: bool,
    pub model: ModelKind,
    pub data: DataConfig,
    /// The seed field is ignored; clients derive their own.
    pub train: TrainingConfig,
    /// `attack.seed` unset means one derived from `seed`.
    pub attack: AttackConfig,
    pub attack_seed_set: bool,
    pub key_bits: usize,
    pub dh_group: DhGroup,
    /// Off writes `duration_ms` as 0 so output is byte-reproducible.
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            rounds: 5,
            clients: 4,
            seed: 0,
            out: None,
            security: true,
            encrypt: true,
            model: ModelKind::LogisticRegression,
            data: DataConfig {
                source: DataSourceKind::Synthetic,
                per_client: 100,
                features: 10,
                classes: 3,
                separation: 3.0,
                idx_images: None,
                idx_labels: None,
                subset: 1000,
            },
            train: TrainingConfig::default(),
            attack: AttackConfig::default(),
            attack_seed_set: false,
            key_bits: DEFAULT_KEY_BITS,
            dh_group: DhGroup::Modp2048,
            timing: true,
        }
    }
}

/// Every key [`ExperimentConfig::set`] accepts, with its default.
pub const KEYS: &[(&str, &str)] = &[
    ("rounds", "5"),
    ("clients", "4"),
    ("seed", "0"),
    ("out", "(none)"),
    ("security", "on"),
    ("encrypt", "on"),
    ("model.kind", "logistic"),
    ("model.hidden", "16"),
    ("model.activation", "tanh"),
    ("data.source", "synthetic"),
    ("data.per_client", "100"),
    ("data.features", "10"),
    ("data.classes", "3"),
    ("data.separation", "3.0"),
    ("data.idx_images", "(none)"),
    ("data.idx_labels", "(none)"),
    ("data.subset", "1000"),
    ("train.learning_rate", "0.1"),
    ("train.epochs", "5"),
    ("train.batch_size", "full"),
    ("attack.kind", "none"),
    ("attack.fraction", "0.25"),
    ("attack.strength", "(per kind)"),
    ("attack.seed", "(derived)"),
    ("attack.insider", "off"),
    ("attack.noise", "0.1"),
    ("crypto.key_bits", "2048"),
    ("crypto.dh_group", "modp2048"),
    ("report.timing", "on"),
];

fn num<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| format!("cannot parse {value:?}: {e}"))
}

fn switch(value: &str) -> Result<bool, String> {
    match value {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected on or off, got {value:?}")),
    }
}

fn finite(value: &str) -> Result<f64, String> {
    let v: f64 = num(value)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{value:?} is not finite"))
    }
}

impl ExperimentConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let hidden_activation = match self.model {
            ModelKind::Mlp { hidden, activation } => (hidden, activation),
            ModelKind::LogisticRegression => (16, Activation::Tanh),
        };
        match key {
            "rounds" => self.rounds = num(value)?,
            "clients" => self.clients = num(value)?,
            "seed" => self.seed = num(value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "security" => self.security = switch(value)?,
            "encrypt" => self.encrypt = switch(value)?,
            "model.kind" => {
                self.model = match value {
                    "logistic" => ModelKind::LogisticRegression,
                    "mlp" => ModelKind::Mlp {
                        hidden: hidden_activation.0,
                        activation: hidden_activation.1,
                    },
                    _ => return Err(format!("expected logistic or mlp, got {value:?}")),
                }
            }
            "model.hidden" | "model.activation" => {
                let ModelKind::Mlp { hidden, activation } = &mut self.model else {
                    return Err("set model.kind = mlp before MLP options".into());
                };
                if key == "model.hidden" {
                    *hidden = num(value)?;
                } else {
                    *activation = match value {
                        "tanh" => Activation::Tanh,
                        "relu" => Activation::Relu,
                        _ => return Err(format!("expected tanh or relu, got {value:?}")),
                    };
                }
            }
            "data.source" => {
                self.data.source = match value {
                    "synthetic" => DataSourceKind::Synthetic,
                    "idx" => DataSourceKind::Idx,
                    _ => return Err(format!("expected synthetic or idx, got {value:?}")),
                }
            }
            "data.per_client" => self.data.per_client = num(value)?,
            "data.features" => self.data.features = num(value)?,
            "data.classes" => self.data.classes = num(value)?,
            "data.separation" => self.data.separation = finite(value)?,
            "data.idx_images" => self.data.idx_images = Some(PathBuf::from(value)),
            "data.idx_labels" => self.data.idx_labels = Some(PathBuf::from(value)),
            "data.subset" => self.data.subset = num(value)?,
            "train.learning_rate" => self.train.learning_rate = finite(value)?,
            "train.epochs" => self.train.epochs = num(value)?,
            "train.batch_size" => {
                self.train.batch_size = match value {
                    "full" => BatchSize::Full,
                    n => BatchSize::Mini(num(n)?),
                }
            }
            "attack.kind" => self.attack.kind = value.parse::<AttackKind>()?,
            "attack.fraction" => self.attack.fraction = finite(value)?,
            "attack.strength" => self.attack.strength = Some(finite(value)?),
            "attack.seed" => {
                self.attack.seed = num(value)?;
                self.attack_seed_set = true;
            }
            "attack.insider" => self.attack.insider = switch(value)?,
            "attack.noise" => self.attack.noise = finite(value)?,
            "crypto.key_bits" => self.key_bits = num(value)?,
            "crypto.dh_group" => {
                self.dh_group = match value {
                    "modp2048" => DhGroup::Modp2048,
                    "toy" => DhGroup::Toy,
                    _ => return Err(format!("expected modp2048 or toy, got {value:?}")),
                }
            }
            "report.timing" => self.timing = switch(value)?,
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.rounds == 0 {
            return Err("rounds must be >= 1".into());
        }
        if self.clients == 0 {
            return Err("clients must be >= 1".into());
        }
        if let ModelKind::Mlp { hidden: 0, .. } = self.model {
            return Err("model.hidden must be >= 1".into());
        }
        match self.data.source {
            DataSourceKind::Synthetic => {
                if self.data.per_client < 2 {
                    return Err("data.per_client must be >= 2 to leave a training split".into());
                }
                if self.data.features == 0 || self.data.classes < 2 {
                    return Err("data.features must be >= 1 and data.classes >= 2".into());
                }
                if self.data.separation < 0.0 {
                    return Err("data.separation must be >= 0".into());
                }
            }
            DataSourceKind::Idx => {
                if self.data.idx_images.is_none() || self.data.idx_labels.is_none() {
                    return Err(
                        "data.source = idx needs data.idx_images and data.idx_labels".into(),
                    );
                }
                let train = self.data.subset - self.data.subset / 5;
                if train < self.clients {
                    return Err(format!(
                        "data.subset = {} leaves fewer training examples than clients",
                        self.data.subset
                    ));
                }
            }
        }
        self.train.validate().map_err(|e| e.to_string())?;
        self.attack.validate().map_err(|e| e.to_string())?;
        if self.key_bits != 1024 && self.key_bits != 2048 {
            return Err(format!(
                "crypto.key_bits must be 1024 or 2048, got {}",
                self.key_bits
            ));
        }
        Ok(())
    }

    /// Seed the adversary actually uses.
    pub fn attack_seed(&self) -> u64 {
        if self.attack_seed_set {
            self.attack.seed
        } else {
            crate::seed::derive_seed(self.seed, "attack", 0)
        }
    }
}

/// Parses flat `key = value` text. `#` starts a comment; blank lines are
/// ignored; a key may appear once.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let mut seen = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                message: format!("expected key = value, got {content:?}"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) {
            return Err(ConfigError::Syntax {
                line,
                message: format!("duplicate key {key:?}"),
            });
        }
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        cfg.set(key, value).map_err(|message| ConfigError::Value {
            line,
            key: key.to_string(),
            message,
        })?;
    }
    cfg.validate().map_err(ConfigError::Invalid)?;
    Ok(cfg)
}
