use std::collections::BTreeMap;

use num_bigint::BigUint;

use super::{ProtocolError, Result};
use crate::crypto::PublicKey;

#[derive(Clone, Debug, PartialEq)]
pub struct RegistryEntry {
    pub signature_key: PublicKey,
    pub dh_public: BigUint,
    pub registered_round: u32,
}

/// Registered client identities and their public keys.
#[derive(Clone, Debug, Default)]
pub struct KeyRegistry {
    entries: BTreeMap<String, RegistryEntry>,
}

impl KeyRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a client; a second registration under the same id is rejected
    /// and leaves the first one in place.
    pub fn register(
        &mut self,
        client_id: &str,
        signature_key: PublicKey,
        dh_public: BigUint,
        round: u32,
    ) -> Result<()> {
        if client_id.is_empty() || client_id.len() > u16::MAX as usize {
            return Err(ProtocolError::InvalidClientId(client_id.len()));
        }
        if self.entries.contains_key(client_id) {
            return Err(ProtocolError::DuplicateClient(client_id.to_string()));
        }
        self.entries.insert(
            client_id.to_string(),
            RegistryEntry {
                signature_key,
                dh_public,
                registered_round: round,
            },
        );
        Ok(())
    }

    pub fn get(&self, client_id: &str) -> Option<&RegistryEntry> {
        self.entries.get(client_id)
    }

    pub fn lookup(&self, client_id: &str) -> Result<&RegistryEntry> {
        self.get(client_id)
            .ok_or_else(|| ProtocolError::UnknownClient(client_id.to_string()))
    }

    pub fn contains(&self, client_id: &str) -> bool {
        self.entries.contains_key(client_id)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crypto::{keygen_signature, RSA_PKCS1_SHA256};

    #[test]
    fn register_once_then_reject_duplicates() {
        let key = keygen_signature(RSA_PKCS1_SHA256, 1024, 1).unwrap();
        let other = keygen_signature(RSA_PKCS1_SHA256, 1024, 2).unwrap();
        let mut reg = KeyRegistry::new();
        reg.register("c1", key.public().clone(), 5u32.into(), 1)
            .unwrap();
        assert!(reg.contains("c1"));
        assert_eq!(
            reg.register("c1", other.public().clone(), 7u32.into(), 2)
                .unwrap_err(),
            ProtocolError::DuplicateClient("c1".into())
        );
        assert_eq!(reg.get("c1").unwrap().signature_key, *key.public());
        assert_eq!(reg.len(), 1);
        assert!(matches!(
            reg.lookup("ghost"),
            Err(ProtocolError::UnknownClient(_))
        ));
        assert!(reg
            .register("", key.public().clone(), 5u32.into(), 1)
            .is_err());
    }
}
