use crate::crypto::wire::Writer;
use crate::crypto::{hash, hash_parts, Digest, PublicKey, Signature};

/// Evidence kept for every update that reached aggregation.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditRecord {
    pub client_id: String,
    pub round: u32,
    /// Digest recomputed from the content that was actually aggregated.
    pub digest: Digest,
    pub signature: Signature,
    /// Serialized registered key; `None` if the sender was not registered.
    pub public_key: Option<Vec<u8>>,
}

impl AuditRecord {
    fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.short_bytes(self.client_id.as_bytes())
            .u32(self.round)
            .raw(self.digest.as_bytes())
            .long_bytes(&self.signature.0);
        match &self.public_key {
            Some(key) => w.u8(1).long_bytes(key),
            None => w.u8(0),
        };
        w.finish()
    }

    /// Re-runs signature verification from the stored triple alone.
    pub fn replay(&self) -> bool {
        self.public_key
            .as_deref()
            .and_then(|bytes| PublicKey::from_bytes(bytes).ok())
            .is_some_and(|key| key.verify(&self.digest, &self.signature))
    }
}

/// Append-only, hash-chained store of [`AuditRecord`]s.
#[derive(Clone, Debug, Default)]
pub struct AuditLog {
    records: Vec<(AuditRecord, Digest)>,
}

impl AuditLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn append(&mut self, record: AuditRecord) {
        let previous = self.head();
        let chain = hash_parts(&[previous.as_bytes(), &record.encode()]);
        self.records.push((record, chain));
    }

    pub fn head(&self) -> Digest {
        self.records
            .last()
            .map(|(_, d)| *d)
            .unwrap_or_else(|| hash(b""))
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = &AuditRecord> {
        self.records.iter().map(|(r, _)| r)
    }

    pub fn records_for_round(&self, round: u32) -> impl Iterator<Item = &AuditRecord> {
        self.records().filter(move |r| r.round == round)
    }

    /// Index of the first record whose chain digest does not recompute.
    pub fn verify_chain(&self) -> Result<(), usize> {
        let mut previous = hash(b"");
        for (i, (record, chain)) in self.records.iter().enumerate() {
            let expected = hash_parts(&[previous.as_bytes(), &record.encode()]);
            if expected != *chain {
                return Err(i);
            }
            previous = expected;
        }
        Ok(())
    }

    #[cfg(test)]
    pub(crate) fn record_mut(&mut self, index: usize) -> &mut AuditRecord {
        &mut self.records[index].0
    }
}
