use std::fmt;

use rsa::traits::PublicKeyParts;
use rsa::{BigUint, Pkcs1v15Sign, RsaPrivateKey, RsaPublicKey};
use sha2::Sha256;

use super::wire::{Reader, Writer};
use super::{CryptoError, Digest, Result};
use crate::seed::rng_from_seed;

/// RSASSA-PKCS1-v1_5 over a SHA-256 digest. Deterministic.
pub const RSA_PKCS1_SHA256: &str = "rsa-pkcs1v15-sha256";

pub const DEFAULT_KEY_BITS: usize = 2048;

/// Detached signature bytes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Signature(pub Vec<u8>);

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature({} bytes)", self.0.len())
    }
}

#[derive(Clone, PartialEq, Eq)]
enum VerifyingMaterial {
    Rsa(RsaPublicKey),
}

#[derive(Clone)]
enum SigningMaterial {
    Rsa(RsaPrivateKey),
}

/// Verification key tagged with its scheme.
#[derive(Clone, PartialEq, Eq)]
pub struct PublicKey {
    material: VerifyingMaterial,
}

impl fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.material {
            VerifyingMaterial::Rsa(k) => {
                write!(f, "PublicKey({RSA_PKCS1_SHA256}, {} bits)", k.n().bits())
            }
        }
    }
}

impl PublicKey {
    pub fn scheme(&self) -> &'static str {
        match self.material {
            VerifyingMaterial::Rsa(_) => RSA_PKCS1_SHA256,
        }
    }

    /// Malformed or mismatched signatures yield `false`, never an error.
    pub fn verify(&self, digest: &Digest, signature: &Signature) -> bool {
        match &self.material {
            VerifyingMaterial::Rsa(key) => key
                .verify(
                    Pkcs1v15Sign::new::<Sha256>(),
                    digest.as_bytes(),
                    &signature.0,
                )
                .is_ok(),
        }
    }

    /// `scheme id (u16 len) | modulus (u32 len, big-endian) | exponent (u32 len, big-endian)`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.short_bytes(self.scheme().as_bytes());
        match &self.material {
            VerifyingMaterial::Rsa(key) => {
                w.long_bytes(&key.n().to_bytes_be())
                    .long_bytes(&key.e().to_bytes_be());
            }
        }
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let scheme = r.utf8()?;
        if scheme != RSA_PKCS1_SHA256 {
            return Err(CryptoError::UnsupportedScheme(scheme));
        }
        let n = BigUint::from_bytes_be(r.long_bytes()?);
        let e = BigUint::from_bytes_be(r.long_bytes()?);
        r.finish()?;
        let key = RsaPublicKey::new(n, e).map_err(|e| CryptoError::KeyGeneration(e.to_string()))?;
        Ok(Self {
            material: VerifyingMaterial::Rsa(key),
        })
    }
}

/// Signing key plus its public half.
#[derive(Clone)]
pub struct SignatureKeyPair {
    private: SigningMaterial,
    public: PublicKey,
}

impl fmt::Debug for SignatureKeyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SignatureKeyPair")
            .field("public", &self.public)
            .finish_non_exhaustive()
    }
}

impl SignatureKeyPair {
    pub fn public(&self) -> &PublicKey {
        &self.public
    }

    pub fn scheme(&self) -> &'static str {
        self.public.scheme()
    }

    pub fn sign(&self, digest: &Digest) -> Signature {
        match &self.private {
            SigningMaterial::Rsa(key) => Signature(
                key.sign(Pkcs1v15Sign::new::<Sha256>(), digest.as_bytes())
                    .expect(
                        "PKCS#1 v1.5 signing of a 32-byte digest cannot fail for >= 1024-bit keys",
                    ),
            ),
        }
    }
}

/// Generates a keypair deterministically from `seed`.
pub fn keygen_signature(scheme: &str, key_bits: usize, seed: u64) -> Result<SignatureKeyPair> {
    if scheme != RSA_PKCS1_SHA256 {
        return Err(CryptoError::UnsupportedScheme(scheme.to_string()));
    }
    if key_bits != 1024 && key_bits != 2048 {
        return Err(CryptoError::UnsupportedKeySize(key_bits));
    }
    let mut rng = rng_from_seed(seed);
    let private = RsaPrivateKey::new(&mut rng, key_bits)
        .map_err(|e| CryptoError::KeyGeneration(e.to_string()))?;
    let public = PublicKey {
        material: VerifyingMaterial::Rsa(private.to_public_key()),
    };
    Ok(SignatureKeyPair {
        private: SigningMaterial::Rsa(private),
        public,
    })
}
