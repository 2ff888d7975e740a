use std::fmt;

use super::{hash_parts, CryptoError, Digest, Result, DIGEST_LEN};

pub const NONCE_LEN: usize = 16;
pub const TAG_LEN: usize = DIGEST_LEN;

/// 32-byte session key.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct SymmetricKey(pub [u8; 32]);

impl fmt::Debug for SymmetricKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SymmetricKey(..)")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CipherEnvelope {
    pub nonce: [u8; NONCE_LEN],
    pub ciphertext: Vec<u8>,
    pub tag: [u8; TAG_LEN],
}

/// Per-(client, round) nonce: first 16 bytes of `SHA-256(client_id ‖ round_be32)`.
pub fn nonce_for(client_id: &str, round: u32) -> [u8; NONCE_LEN] {
    let digest = hash_parts(&[client_id.as_bytes(), &round.to_be_bytes()]);
    let mut nonce = [0u8; NONCE_LEN];
    nonce.copy_from_slice(&digest.0[..NONCE_LEN]);
    nonce
}

fn apply_keystream(key: &SymmetricKey, nonce: &[u8; NONCE_LEN], data: &mut [u8]) {
    for (i, chunk) in data.chunks_mut(DIGEST_LEN).enumerate() {
        let block = hash_parts(&[&key.0, nonce, &(i as u64).to_be_bytes()]);
        for (byte, k) in chunk.iter_mut().zip(block.0.iter()) {
            *byte ^= k;
        }
    }
}

fn tag_for(key: &SymmetricKey, nonce: &[u8; NONCE_LEN], ciphertext: &[u8]) -> Digest {
    hash_parts(&[&key.0, nonce, ciphertext])
}

/// XOR with the SHA-256 counter keystream, then tag `SHA-256(key ‖ nonce ‖ ciphertext)`.
pub fn encrypt(key: &SymmetricKey, nonce: [u8; NONCE_LEN], plaintext: &[u8]) -> CipherEnvelope {
    let mut ciphertext = plaintext.to_vec();
    apply_keystream(key, &nonce, &mut ciphertext);
    let tag = tag_for(key, &nonce, &ciphertext).0;
    CipherEnvelope {
        nonce,
        ciphertext,
        tag,
    }
}

/// Checks the tag before touching the ciphertext.
pub fn decrypt(key: &SymmetricKey, envelope: &CipherEnvelope) -> Result<Vec<u8>> {
    let expected = tag_for(key, &envelope.nonce, &envelope.ciphertext);
    let diff = expected
        .0
        .iter()
        .zip(envelope.tag.iter())
        .fold(0u8, |acc, (a, b)| acc | (a ^ b));
    if diff != 0 {
        return Err(CryptoError::Integrity);
    }
    let mut plaintext = envelope.ciphertext.clone();
    apply_keystream(key, &envelope.nonce, &mut plaintext);
    Ok(plaintext)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::hash;
    use proptest::prelude::*;
    use rand::RngCore;

    fn key() -> SymmetricKey {
        SymmetricKey([7u8; 32])
    }

    #[test]
    fn empty_plaintext() {
        let env = encrypt(&key(), [0; 16], b"");
        assert!(env.ciphertext.is_empty());
        assert_eq!(env.tag, hash_parts(&[&[7u8; 32], &[0u8; 16]]).0);
        assert_eq!(decrypt(&key(), &env).unwrap(), b"");
    }

    #[test]
    fn frozen_vector() {
        // Computed with an independent Python hashlib implementation of the construction.
        let env = encrypt(&key(), [1; 16], b"federated learning update payload!");
        assert_eq!(
            hex::encode(&env.ciphertext),
            include_str!("../../tests/data/cipher_vector_ct.hex").trim()
        );
        assert_eq!(
            hex::encode(env.tag),
            include_str!("../../tests/data/cipher_vector_tag.hex").trim()
        );
    }

    #[test]
    fn nonce_is_prefix_of_id_round_hash() {
        let n = nonce_for("client-1", 3);
        let full = hash(&[b"client-1".as_slice(), &[0, 0, 0, 3]].concat());
        assert_eq!(&n[..], &full.0[..16]);
        assert_ne!(n, nonce_for("client-1", 4));
        assert_ne!(n, nonce_for("client-2", 3));
    }

    #[test]
    fn random_kib_round_trip() {
        let mut rng = crate::seed::rng_from_seed(1);
        let mut payload = vec![0u8; 1024];
        rng.fill_bytes(&mut payload);
        let env = encrypt(&key(), [9; 16], &payload);
        assert_ne!(env.ciphertext, payload);
        assert_eq!(decrypt(&key(), &env).unwrap(), payload);
    }

    #[test]
    fn wrong_key_rejected() {
        let env = encrypt(&key(), [9; 16], b"abc");
        assert_eq!(
            decrypt(&SymmetricKey([8; 32]), &env).unwrap_err(),
            CryptoError::Integrity
        );
    }

    #[test]
    fn one_mebibyte_round_trip() {
        let mut rng = crate::seed::rng_from_seed(2);
        let mut payload = vec![0u8; 1 << 20];
        rng.fill_bytes(&mut payload);
        let env = encrypt(&key(), [3; 16], &payload);
        assert_eq!(decrypt(&key(), &env).unwrap(), payload);
    }

    proptest! {
        #[test]
        fn round_trip(payload in prop::collection::vec(any::<u8>(), 0..4096), nonce in any::<[u8; 16]>()) {
            let env = encrypt(&key(), nonce, &payload);
            prop_assert_eq!(decrypt(&key(), &env).unwrap(), payload);
        }

        #[test]
        fn any_single_bit_corruption_rejected(
            payload in prop::collection::vec(any::<u8>(), 1..512),
            which in 0usize..3,
            bit in any::<usize>(),
        ) {
            let mut env = encrypt(&key(), [5; 16], &payload);
            let target: &mut [u8] = match which {
                0 => &mut env.nonce,
                1 => &mut env.ciphertext,
                _ => &mut env.tag,
            };
            let bit = bit % (target.len() * 8);
            target[bit / 8] ^= 1 << (bit % 8);
            prop_assert_eq!(decrypt(&key(), &env).unwrap_err(), CryptoError::Integrity);
        }
    }
}
