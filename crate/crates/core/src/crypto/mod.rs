//! Hashing, canonical encoding, signatures, Diffie-Hellman and the keystream cipher.
//!
//! Everything here is simulation-grade: the constructions are bit-exact and
//! reproducible, not hardened against side channels.

mod cipher;
mod dh;
mod encoding;
mod hash;
mod signature;
pub mod wire;

pub use cipher::{decrypt, encrypt, nonce_for, CipherEnvelope, SymmetricKey, NONCE_LEN, TAG_LEN};
pub use dh::{dh_keygen, dh_shared, kdf, DhKeyPair, DhParams, SharedSecret};
pub use encoding::{canonical_decode, canonical_encode, CanonicalUpdate, ENCODING_VERSION};
pub use hash::{hash, hash_parts, Digest, DIGEST_LEN};
pub use signature::{
    keygen_signature, PublicKey, Signature, SignatureKeyPair, DEFAULT_KEY_BITS, RSA_PKCS1_SHA256,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    #[error("client id is {0} bytes, limit is 65535")]
    ClientIdTooLong(usize),
    #[error("unsupported signature scheme {0:?}")]
    UnsupportedScheme(String),
    #[error("unsupported key size {0} (expected 1024 or 2048)")]
    UnsupportedKeySize(usize),
    #[error("key generation failed: {0}")]
    KeyGeneration(String),
    #[error("invalid Diffie-Hellman parameters: {0}")]
    InvalidDhParams(&'static str),
    #[error("Diffie-Hellman value out of range")]
    DhOutOfRange,
    #[error("authentication tag mismatch")]
    Integrity,
    #[error(transparent)]
    Decode(#[from] wire::DecodeError),
}

pub type Result<T> = std::result::Result<T, CryptoError>;
