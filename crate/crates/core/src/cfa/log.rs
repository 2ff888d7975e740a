use std::fmt;
use std::str::FromStr;

use crate::crypto::wire::{DecodeError, Reader, Writer};
use crate::crypto::{hash, hash_parts, Digest, PublicKey, Signature, SignatureKeyPair};

/// Execution points instrumented in the client and server pipelines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Label {
    RoundStart = 0,
    TrainBegin = 1,
    TrainEnd = 2,
    UpdateHashed = 3,
    UpdateSigned = 4,
    UpdateSent = 5,
    ServerReceived = 6,
    ServerVerified = 7,
    Aggregated = 8,
    GlobalApplied = 9,
    RoundEnd = 10,
}

impl Label {
    pub const ALL: [Label; 11] = [
        Label::RoundStart,
        Label::TrainBegin,
        Label::TrainEnd,
        Label::UpdateHashed,
        Label::UpdateSigned,
        Label::UpdateSent,
        Label::ServerReceived,
        Label::ServerVerified,
        Label::Aggregated,
        Label::GlobalApplied,
        Label::RoundEnd,
    ];

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.get(code as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::RoundStart => "ROUND_START",
            Label::TrainBegin => "TRAIN_BEGIN",
            Label::TrainEnd => "TRAIN_END",
            Label::UpdateHashed => "UPDATE_HASHED",
            Label::UpdateSigned => "UPDATE_SIGNED",
            Label::UpdateSent => "UPDATE_SENT",
            Label::ServerReceived => "SERVER_RECEIVED",
            Label::ServerVerified => "SERVER_VERIFIED",
            Label::Aggregated => "AGGREGATED",
            Label::GlobalApplied => "GLOBAL_APPLIED",
            Label::RoundEnd => "ROUND_END",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .copied()
            .find(|l| l.name() == s)
            .ok_or_else(|| format!("unknown checkpoint label {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Checkpoint {
    pub label: Label,
    pub actor: String,
    pub round: u32,
}

impl Checkpoint {
    pub fn new(label: Label, actor: impl Into<String>, round: u32) -> Self {
        Self {
            label,
            actor: actor.into(),
            round,
        }
    }

    /// `label u8 | round u32 | actor (u16 len + utf-8)`.
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.write(&mut w);
        w.finish()
    }

    fn write(&self, w: &mut Writer) {
        w.u8(self.label.code())
            .u32(self.round)
            .short_bytes(self.actor.as_bytes());
    }

    fn read(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let code = r.u8()?;
        let label =
            Label::from_code(code).ok_or_else(|| r.error(format!("unknown label code {code}")))?;
        let round = r.u32()?;
        let actor = r.utf8()?;
        Ok(Self {
            label,
            actor,
            round,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogEntry {
    pub checkpoint: Checkpoint,
    /// `hash(previous_chain ‖ encode(checkpoint))`.
    pub chain: Digest,
}

/// Append-only, hash-chained checkpoint trace.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CheckpointLog {
    entries: Vec<LogEntry>,
}

impl CheckpointLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Chain value before any entry: `hash("")`.
    pub fn genesis() -> Digest {
        hash(b"")
    }

    pub fn link(previous: &Digest, checkpoint: &Checkpoint) -> Digest {
        hash_parts(&[previous.as_bytes(), &checkpoint.encode()])
    }

    /// Builds a log from raw entries without checking them; verification
    /// happens in [`CheckpointLog::verify_chain`].
    pub fn from_entries(entries: Vec<LogEntry>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = Label> + '_ {
        self.entries.iter().map(|e| e.checkpoint.label)
    }

    /// Latest chain digest.
    pub fn head(&self) -> Digest {
        self.entries
            .last()
            .map(|e| e.chain)
            .unwrap_or_else(Self::genesis)
    }

    pub fn record(&mut self, checkpoint: Checkpoint) -> &LogEntry {
        let chain = Self::link(&self.head(), &checkpoint);
        self.entries.push(LogEntry { checkpoint, chain });
        self.entries.last().expect("just pushed")
    }

    /// Index of the first entry whose stored digest does not recompute.
    pub fn verify_chain(&self) -> Result<(), usize> {
        let mut previous = Self::genesis();
        for (i, entry) in self.entries.iter().enumerate() {
            let expected = Self::link(&previous, &entry.checkpoint);
            if expected != entry.chain {
                return Err(i);
            }
            previous = expected;
        }
        Ok(())
    }

    /// Rebuilds every chain digest from the checkpoints.
    pub fn rechain(checkpoints: impl IntoIterator<Item = Checkpoint>) -> Self {
        let mut log = Self::new();
        for cp in checkpoints {
            log.record(cp);
        }
        log
    }
}

/// A sealed log: the final chain digest signed by the actor's key.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttestationReport {
    pub actor: String,
    pub log: CheckpointLog,
    pub final_digest: Digest,
    pub signature: Signature,
}

impl AttestationReport {
    pub fn seal(actor: impl Into<String>, log: CheckpointLog, key: &SignatureKeyPair) -> Self {
        let final_digest = log.head();
        let signature = key.sign(&final_digest);
        Self {
            actor: actor.into(),
            log,
            final_digest,
            signature,
        }
    }

    pub fn signature_valid(&self, key: &PublicKey) -> bool {
        key.verify(&self.final_digest, &self.signature)
    }

    pub fn write(&self, w: &mut Writer) {
        w.short_bytes(self.actor.as_bytes())
            .u32(self.log.len() as u32);
        for entry in self.log.entries() {
            entry.checkpoint.write(w);
            w.raw(entry.chain.as_bytes());
        }
        w.raw(self.final_digest.as_bytes())
            .long_bytes(&self.signature.0);
    }

    pub fn read(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let actor = r.utf8()?;
        let count = r.u32()? as usize;
        // Smallest possible entry is 1 + 4 + 2 + 32 bytes.
        if count > r.remaining() / 39 {
            return Err(r.error(format!("entry count {count} exceeds payload")));
        }
        let mut entries = Vec::with_capacity(count);
        for _ in 0..count {
            let checkpoint = Checkpoint::read(r)?;
            let chain = Digest(r.array()?);
            entries.push(LogEntry { checkpoint, chain });
        }
        let final_digest = Digest(r.array()?);
        let signature = Signature(r.long_bytes()?.to_vec());
        Ok(Self {
            actor,
            log: CheckpointLog::from_entries(entries),
            final_digest,
            signature,
        })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.write(&mut w);
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(bytes);
        let report = Self::read(&mut r)?;
        r.finish()?;
        Ok(report)
    }
}
