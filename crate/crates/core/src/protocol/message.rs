use crate::cfa::AttestationReport;
use crate::crypto::wire::{DecodeError, Reader, Writer};
use crate::crypto::{CipherEnvelope, Digest, Signature, NONCE_LEN, TAG_LEN};

pub const WIRE_VERSION: u8 = 0x01;

/// Update values, either in clear or sealed under the client's session key.
#[derive(Clone, Debug, PartialEq)]
pub enum Payload {
    Clear(Vec<f64>),
    /// Plaintext is `canonical_encode(update, round, client_id, data_size)`.
    Sealed(CipherEnvelope),
}

/// What a client ships per round: the update, its digest and signature, and
/// the attestation of the pipeline that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedUpdate {
    pub client_id: String,
    pub round: u32,
    /// `|D_i|`, the aggregation weight.
    pub data_size: u64,
    pub payload: Payload,
    /// `hash(canonical_encode(update, round, client_id, data_size))`.
    pub digest: Digest,
    pub signature: Signature,
    pub attestation: AttestationReport,
}

impl SignedUpdate {
    /// Wire form, all integers big-endian:
    ///
    /// ```text
    /// 0x01 | id (u16 len) | round u32 | data_size u64
    /// | 0x00 count u64 f64*count            (clear)
    /// | 0x01 nonce[16] ct (u32 len) tag[32] (sealed)
    /// | digest[32] | signature (u32 len) | attestation report
    /// ```
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u8(WIRE_VERSION)
            .short_bytes(self.client_id.as_bytes())
            .u32(self.round)
            .u64(self.data_size);
        match &self.payload {
            Payload::Clear(values) => {
                w.u8(0).u64(values.len() as u64);
                for &v in values {
                    w.f64(v);
                }
            }
            Payload::Sealed(env) => {
                w.u8(1)
                    .raw(&env.nonce)
                    .long_bytes(&env.ciphertext)
                    .raw(&env.tag);
            }
        }
        w.raw(self.digest.as_bytes()).long_bytes(&self.signature.0);
        self.attestation.write(&mut w);
        w.finish()
    }

    /// Byte range of the payload (tag included) within [`Self::to_bytes`].
    pub fn payload_span(&self) -> std::ops::Range<usize> {
        let start = 1 + 2 + self.client_id.len() + 4 + 8;
        let body = match &self.payload {
            Payload::Clear(values) => 8 + 8 * values.len(),
            Payload::Sealed(env) => NONCE_LEN + 4 + env.ciphertext.len() + TAG_LEN,
        };
        start..start + 1 + body
    }

    /// Strict decoding: unknown tags, non-finite values, truncation and
    /// trailing bytes are all errors.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(bytes);
        let version = r.u8()?;
        if version != WIRE_VERSION {
            return Err(r.error(format!("unknown wire version {version:#04x}")));
        }
        let client_id = r.utf8()?;
        let round = r.u32()?;
        let data_size = r.u64()?;
        let payload = match r.u8()? {
            0 => {
                let count = r.u64()?;
                if count > (r.remaining() / 8) as u64 {
                    return Err(r.error(format!("parameter count {count} exceeds payload")));
                }
                let mut values = Vec::with_capacity(count as usize);
                for _ in 0..count {
                    let v = r.f64()?;
                    if !v.is_finite() {
                        return Err(r.error("non-finite parameter"));
                    }
                    values.push(v);
                }
                Payload::Clear(values)
            }
            1 => {
                let nonce: [u8; NONCE_LEN] = r.array()?;
                let ciphertext = r.long_bytes()?.to_vec();
                let tag: [u8; TAG_LEN] = r.array()?;
                Payload::Sealed(CipherEnvelope {
                    nonce,
                    ciphertext,
                    tag,
                })
            }
            other => return Err(r.error(format!("unknown payload tag {other}"))),
        };
        let digest = Digest(r.array()?);
        let signature = Signature(r.long_bytes()?.to_vec());
        let attestation = AttestationReport::read(&mut r)?;
        r.finish()?;
        Ok(Self {
            client_id,
            round,
            data_size,
            payload,
            digest,
            signature,
            attestation,
        })
    }
}
