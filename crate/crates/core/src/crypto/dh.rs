use num_bigint::{BigUint, RandBigInt};
use num_traits::One;

use super::cipher::SymmetricKey;
use super::{hash, CryptoError, Result};
use crate::seed::rng_from_seed;

/// RFC 3526 group 14 (2048-bit safe prime), generator 2.
const MODP_2048_HEX: &str = concat!(
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD1",
    "29024E088A67CC74020BBEA63B139B22514A08798E3404DD",
    "EF9519B3CD3A431B302B0A6DF25F14374FE1356D6D51C245",
    "E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED",
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3D",
    "C2007CB8A163BF0598DA48361C55D39A69163FA8FD24CF5F",
    "83655D23DCA3AD961C62F356208552BB9ED529077096966D",
    "670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B",
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9",
    "DE2BCBF6955817183995497CEA956AE515D2261898FA0510",
    "15728E5A8AACAA68FFFFFFFFFFFFFFFF",
);

/// Group modulus and generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DhParams {
    modulus: BigUint,
    generator: BigUint,
}

impl DhParams {
    pub fn new(modulus: BigUint, generator: BigUint) -> Result<Self> {
        if modulus < BigUint::from(5u32) {
            return Err(CryptoError::InvalidDhParams("modulus must be >= 5"));
        }
        if generator <= BigUint::one() || generator >= modulus {
            return Err(CryptoError::InvalidDhParams(
                "generator must satisfy 1 < g < p",
            ));
        }
        Ok(Self { modulus, generator })
    }

    /// 2048-bit MODP group; the default.
    pub fn modp2048() -> Self {
        Self {
            modulus: BigUint::parse_bytes(MODP_2048_HEX.as_bytes(), 16).expect("valid hex"),
            generator: BigUint::from(2u32),
        }
    }

    /// Textbook group p = 23, g = 5. Tests only.
    pub fn toy() -> Self {
        Self {
            modulus: BigUint::from(23u32),
            generator: BigUint::from(5u32),
        }
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn generator(&self) -> &BigUint {
        &self.generator
    }
}

/// Shared group element `g^(ab) mod p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharedSecret(pub BigUint);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DhKeyPair {
    private: BigUint,
    public: BigUint,
}

impl DhKeyPair {
    /// Keypair for an explicit exponent in `[1, p-2]`.
    pub fn from_private(params: &DhParams, private: BigUint) -> Result<Self> {
        let upper = params.modulus() - 2u32;
        if private < BigUint::one() || private > upper {
            return Err(CryptoError::DhOutOfRange);
        }
        let public = params.generator().modpow(&private, params.modulus());
        Ok(Self { private, public })
    }

    pub fn private(&self) -> &BigUint {
        &self.private
    }

    pub fn public(&self) -> &BigUint {
        &self.public
    }
}

/// Draws a private exponent uniformly from `[2, p-2]`, redrawing until the
/// public value is itself a valid peer value (not `1` or `p-1`).
pub fn dh_keygen(params: &DhParams, seed: u64) -> DhKeyPair {
    let mut rng = rng_from_seed(seed);
    let low = BigUint::from(2u32);
    let high = params.modulus() - 1u32; // exclusive
    let p_minus_1 = &high;
    loop {
        let private = rng.gen_biguint_range(&low, &high);
        let pair = DhKeyPair::from_private(params, private).expect("exponent drawn in range");
        if pair.public > BigUint::one() && pair.public != *p_minus_1 {
            return pair;
        }
    }
}

/// `peer_public^private mod p`, rejecting peer values outside `[2, p-2]`.
pub fn dh_shared(
    private: &BigUint,
    peer_public: &BigUint,
    params: &DhParams,
) -> Result<SharedSecret> {
    let p = params.modulus();
    if *peer_public < BigUint::from(2u32) || *peer_public > p - 2u32 {
        return Err(CryptoError::DhOutOfRange);
    }
    Ok(SharedSecret(peer_public.modpow(private, p)))
}

/// Session key: SHA-256 of the minimal big-endian encoding of the secret.
pub fn kdf(secret: &SharedSecret) -> SymmetricKey {
    SymmetricKey(hash(&secret.0.to_bytes_be()).0)
}
