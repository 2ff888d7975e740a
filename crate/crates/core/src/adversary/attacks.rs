use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{AdversaryError, Result};
use crate::crypto::DhParams;
use crate::model::{Dataset, ParameterVector};
use crate::protocol::{Client, Provenance, Submission};
use crate::seed::{derive_seed, rng_from_seed};

/// `λ·update + noise`, with i.i.d. Gaussian noise of standard deviation
/// `noise_std`. A zero `noise_std` draws nothing, so `λ = 1` is the identity.
pub fn poison_update(
    update: &ParameterVector,
    lambda: f64,
    noise_std: f64,
    seed: u64,
) -> Result<ParameterVector> {
    let mut values: Vec<f64> = update.values().iter().map(|v| lambda * v).collect();
    if noise_std != 0.0 {
        let mut rng = rng_from_seed(seed);
        for v in &mut values {
            let z: f64 = rng.sample(StandardNormal);
            *v += noise_std * z;
        }
    }
    Ok(ParameterVector::new(update.layout().clone(), values)?)
}

/// Reassigns exactly `round(fraction · len)` labels, chosen without
/// replacement, each to a uniformly drawn different class.
pub fn flip_labels(data: &Dataset, fraction: f64, seed: u64) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(AdversaryError::InvalidConfig(format!(
            "flip fraction must be in [0, 1], got {fraction}"
        )));
    }
    let n = data.len();
    let count = (fraction * n as f64).round() as usize;
    let classes = data.num_classes();
    if count == 0 {
        return Ok(data.clone());
    }
    if classes < 2 {
        return Err(AdversaryError::InvalidConfig(
            "label flipping needs at least two classes".into(),
        ));
    }
    let mut rng = rng_from_seed(seed);
    let mut labels = data.labels().to_vec();
    for i in sample(&mut rng, n, count) {
        let shift = rng.gen_range(1..classes);
        labels[i] = (labels[i] + shift) % classes;
    }
    Ok(data.with_labels(labels)?)
}

/// Flips one bit. Bits are numbered from the most significant bit of byte 0;
/// with `bit = None` the position is drawn from `seed`.
pub fn tamper_bytes(bytes: &[u8], bit: Option<usize>, seed: u64) -> Result<Vec<u8>> {
    if bytes.is_empty() {
        return Err(AdversaryError::EmptyPayload);
    }
    let bits = bytes.len() * 8;
    let index = match bit {
        Some(i) if i >= bits => return Err(AdversaryError::BitOutOfRange { index: i, bits }),
        Some(i) => i,
        None => rng_from_seed(seed).gen_range(0..bits),
    };
    let mut out = bytes.to_vec();
    out[index / 8] ^= 0x80 >> (index % 8);
    Ok(out)
}

/// Clients with self-generated keys that never register, one per dataset,
/// named `sybil-0`, `sybil-1`, ...
pub fn spawn_sybil(
    data: Vec<Dataset>,
    key_bits: usize,
    dh_params: &DhParams,
    seed: u64,
) -> Result<Vec<Client>> {
    if data.is_empty() {
        return Err(AdversaryError::InvalidConfig(
            "sybil count must be >= 1".into(),
        ));
    }
    data.into_iter()
        .enumerate()
        .map(|(i, d)| {
            let s = derive_seed(seed, "sybil", i as u64);
            Ok(Client::new(
                format!("sybil-{i}"),
                d,
                key_bits,
                dh_params,
                s,
            )?)
        })
        .collect()
}

/// A serialized update seen in transit.
#[derive(Clone, Debug, PartialEq)]
pub struct Captured {
    pub round: u32,
    pub client_id: String,
    pub bytes: Vec<u8>,
}

/// Resubmits `captured` unmodified at a later `round`.
pub fn replay(captured: &Captured, round: u32) -> Result<Submission> {
    if round <= captured.round {
        return Err(AdversaryError::NotLater {
            captured: captured.round,
            round,
        });
    }
    Ok(Submission {
        bytes: captured.bytes.clone(),
        provenance: Provenance::Replayed,
    })
}

impl From<crate::crypto::CryptoError> for AdversaryError {
    fn from(e: crate::crypto::CryptoError) -> Self {
        AdversaryError::Protocol(e.into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{generate_synthetic, Layout};
    use proptest::prelude::*;

    fn vector(values: Vec<f64>) -> ParameterVector {
        ParameterVector::new(Layout::new(vec![(values.len(), 1)]), values).unwrap()
    }

    #[test]
    fn poison_identity_and_null() {
        let u = vector(vec![0.5, -1.25, 3.0]);
        assert_eq!(poison_update(&u, 1.0, 0.0, 4).unwrap(), u);
        assert!(poison_update(&u, 0.0, 0.0, 4).unwrap().is_zero());
        let scaled = poison_update(&u, -10.0, 0.0, 4).unwrap();
        assert_eq!(scaled.values(), &[-5.0, 12.5, -30.0]);
    }

    #[test]
    fn poison_noise_is_seeded() {
        let u = vector(vec![0.0; 2000]);
        let a = poison_update(&u, -10.0, 2.0, 9).unwrap();
        assert_eq!(a, poison_update(&u, -10.0, 2.0, 9).unwrap());
        assert_ne!(a, poison_update(&u, -10.0, 2.0, 10).unwrap());
        let n = a.len() as f64;
        let mean = a.values().iter().sum::<f64>() / n;
        let var = a.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 0.2, "mean {mean}");
        assert!((var.sqrt() - 2.0).abs() < 0.15, "std {}", var.sqrt());
    }

    fn data(classes: usize) -> Dataset {
        generate_synthetic(1, 101, 3, classes, 2.0, 5)
            .unwrap()
            .remove(0)
    }

    #[test]
    fn flip_extremes() {
        let d = data(2);
        assert_eq!(flip_labels(&d, 0.0, 1).unwrap(), d);
        let all = flip_labels(&d, 1.0, 1).unwrap();
        for (a, b) in d.labels().iter().zip(all.labels()) {
            assert_eq!(*b, 1 - a);
        }
        let same_features = d.rows().zip(all.rows()).all(|((x, _), (y, _))| x == y);
        assert!(same_features);
        assert!(flip_labels(&d, 1.5, 1).is_err());
    }

    #[test]
    fn flip_half_is_exact_and_deterministic() {
        let d = data(4);
        let a = flip_labels(&d, 0.5, 3).unwrap();
        assert_eq!(a, flip_labels(&d, 0.5, 3).unwrap());
        let changed = d
            .labels()
            .iter()
            .zip(a.labels())
            .filter(|(x, y)| x != y)
            .count();
        // round(0.5 * 101) = 51, halves away from zero.
        assert_eq!(changed, 51);
        assert!(a.labels().iter().all(|&l| l < 4));
    }

    #[test]
    fn tamper_flips_one_bit() {
        let bytes = [0u8, 0xff, 0x10];
        assert_eq!(
            tamper_bytes(&bytes, Some(0), 0).unwrap(),
            [0x80, 0xff, 0x10]
        );
        assert_eq!(tamper_bytes(&bytes, Some(15), 0).unwrap(), [0, 0xfe, 0x10]);
        let back = tamper_bytes(&tamper_bytes(&bytes, Some(19), 0).unwrap(), Some(19), 0).unwrap();
        assert_eq!(back, bytes);
        assert_eq!(
            tamper_bytes(&bytes, Some(24), 0),
            Err(AdversaryError::BitOutOfRange {
                index: 24,
                bits: 24
            })
        );
        assert_eq!(
            tamper_bytes(&[], None, 0),
            Err(AdversaryError::EmptyPayload)
        );
        let random = tamper_bytes(&bytes, None, 8).unwrap();
        assert_eq!(random, tamper_bytes(&bytes, None, 8).unwrap());
        let diff: u32 = random
            .iter()
            .zip(bytes)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum();
        assert_eq!(diff, 1);
    }

    #[test]
    fn replay_must_move_forward() {
        let cap = Captured {
            round: 3,
            client_id: "c".into(),
            bytes: vec![1, 2, 3],
        };
        assert!(replay(&cap, 3).is_err());
        let sub = replay(&cap, 5).unwrap();
        assert_eq!(sub.bytes, cap.bytes);
        assert_eq!(sub.provenance, Provenance::Replayed);
    }

    #[test]
    fn sybils_need_a_count() {
        assert!(spawn_sybil(Vec::new(), 1024, &DhParams::toy(), 0).is_err());
        let s = spawn_sybil(vec![data(2)], 1024, &DhParams::toy(), 0).unwrap();
        assert_eq!(s[0].id(), "sybil-0");
        assert!(s[0].session_key().is_none());
    }

    proptest! {
        #[test]
        fn flip_count_matches(fraction in 0.0f64..=1.0, seed in any::<u64>()) {
            let d = data(3);
            let f = flip_labels(&d, fraction, seed).unwrap();
            let changed = d.labels().iter().zip(f.labels()).filter(|(x, y)| x != y).count();
            prop_assert_eq!(changed, (fraction * d.len() as f64).round() as usize);
        }
    }
}
