use std::fmt;
use std::str::FromStr;

use super::{AdversaryError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum AttackKind {
    #[default]
    None,
    ModelPoison,
    DataPoison,
    Tamper,
    Sybil,
    Replay,
}

impl AttackKind {
    pub const ALL: [AttackKind; 6] = [
        AttackKind::None,
        AttackKind::ModelPoison,
        AttackKind::DataPoison,
        AttackKind::Tamper,
        AttackKind::Sybil,
        AttackKind::Replay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttackKind::None => "none",
            AttackKind::ModelPoison => "model-poison",
            AttackKind::DataPoison => "data-poison",
            AttackKind::Tamper => "tamper",
            AttackKind::Sybil => "sybil",
            AttackKind::Replay => "replay",
        }
    }

    /// `λ` for the poisoning kinds, the flip fraction for data poisoning.
    pub fn default_strength(self) -> f64 {
        match self {
            AttackKind::ModelPoison | AttackKind::Sybil => -10.0,
            AttackKind::DataPoison => 0.5,
            _ => 0.0,
        }
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttackKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|k| k.name()).collect();
                format!(
                    "unknown attack {s:?} (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttackConfig {
    pub kind: AttackKind,
    /// Share of clients compromised; for Sybil attacks, the number of
    /// fabricated identities relative to the registered clients.
    pub fraction: f64,
    /// `None` selects [`AttackKind::default_strength`].
    pub strength: Option<f64>,
    pub seed: u64,
    /// Model poison is signed with the compromised client's own key rather
    /// than the attacker's.
    pub insider: bool,
    /// Poison noise standard deviation, relative to `|λ|` times the RMS of
    /// the honest update.
    pub noise: f64,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            kind: AttackKind::None,
            fraction: 0.25,
            strength: None,
            seed: 0,
            insider: false,
            noise: 0.1,
        }
    }
}

impl AttackConfig {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn strength(&self) -> f64 {
        self.strength
            .unwrap_or_else(|| self.kind.default_strength())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(AdversaryError::InvalidConfig(m));
        if !(0.0..=1.0).contains(&self.fraction) {
            return bad(format!("fraction must be in [0, 1], got {}", self.fraction));
        }
        let strength = self.strength();
        if !strength.is_finite() {
            return bad(format!("strength must be finite, got {strength}"));
        }
        if self.kind == AttackKind::DataPoison && !(0.0..=1.0).contains(&strength) {
            return bad(format!(
                "label-flip fraction must be in [0, 1], got {strength}"
            ));
        }
        if !self.noise.is_finite() || self.noise < 0.0 {
            return bad(format!("noise must be finite and >= 0, got {}", self.noise));
        }
        Ok(())
    }

    /// `round(fraction · num_clients)`, halves away from zero.
    pub fn compromised_count(&self, num_clients: usize) -> usize {
        (self.fraction * num_clients as f64).round() as usize
    }
}
