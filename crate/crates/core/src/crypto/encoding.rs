use super::wire::{Reader, Writer};
use super::{CryptoError, Result};

pub const ENCODING_VERSION: u8 = 0x01;

/// Decoded form of [`canonical_encode`].
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalUpdate {
    pub round: u32,
    pub client_id: String,
    pub data_size: u64,
    pub values: Vec<f64>,
}

/// Byte layout, all integers big-endian:
///
/// ```text
/// 0x01 | round u32 | id_len u16 | id utf-8 | data_size u64 | count u64 | count × f64 bits
/// ```
pub fn canonical_encode(
    values: &[f64],
    round: u32,
    client_id: &str,
    data_size: u64,
) -> Result<Vec<u8>> {
    if client_id.len() > u16::MAX as usize {
        return Err(CryptoError::ClientIdTooLong(client_id.len()));
    }
    let mut w = Writer::new();
    w.u8(ENCODING_VERSION)
        .u32(round)
        .short_bytes(client_id.as_bytes())
        .u64(data_size)
        .u64(values.len() as u64);
    for &v in values {
        w.f64(v);
    }
    Ok(w.finish())
}

/// Strict inverse of [`canonical_encode`]; rejects non-finite parameters and
/// trailing bytes.
pub fn canonical_decode(bytes: &[u8]) -> Result<CanonicalUpdate> {
    let mut r = Reader::new(bytes);
    let version = r.u8()?;
    if version != ENCODING_VERSION {
        return Err(r.error(format!("unknown version {version:#04x}")).into());
    }
    let round = r.u32()?;
    let client_id = r.utf8()?;
    let data_size = r.u64()?;
    let count = r.u64()?;
    if count > (r.remaining() / 8) as u64 {
        return Err(r
            .error(format!("parameter count {count} exceeds payload"))
            .into());
    }
    let values = (0..count)
        .map(|_| {
            let v = r.f64()?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(r.error("non-finite parameter"))
            }
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    r.finish()?;
    Ok(CanonicalUpdate {
        round,
        client_id,
        data_size,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_assembled_layout() {
        let bytes = canonical_encode(&[], 0, "a", 0).unwrap();
        let expected = [
            vec![0x01],
            vec![0, 0, 0, 0],
            vec![0, 1, b'a'],
            vec![0; 8],
            vec![0; 8],
        ]
        .concat();
        assert_eq!(bytes, expected);
    }

    #[test]
    fn one_encodes_as_ieee_big_endian() {
        let bytes = canonical_encode(&[1.0], 7, "", 3).unwrap();
        assert_eq!(&bytes[bytes.len() - 8..], &[0x3F, 0xF0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(&bytes[1..5], &[0, 0, 0, 7]);
    }

    #[test]
    fn differing_parameter_changes_encoding() {
        let a = canonical_encode(&[1.0, 2.0], 1, "c", 10).unwrap();
        let b = canonical_encode(&[1.0, 2.000001], 1, "c", 10).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn long_client_id_rejected() {
        let id = "x".repeat(65536);
        assert_eq!(
            canonical_encode(&[], 0, &id, 0).unwrap_err(),
            CryptoError::ClientIdTooLong(65536)
        );
        assert!(canonical_encode(&[], 0, &id[..65535], 0).is_ok());
    }

    #[test]
    fn decode_rejects_garbage() {
        let mut bytes = canonical_encode(&[1.0], 1, "c", 1).unwrap();
        assert!(canonical_decode(&bytes[..bytes.len() - 1]).is_err());
        bytes.push(0);
        assert!(canonical_decode(&bytes).is_err());
        let nan = canonical_encode(&[f64::NAN], 1, "c", 1).unwrap();
        assert!(canonical_decode(&nan).is_err());
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL
    }

    proptest! {
        #[test]
        fn decode_inverts_encode(
            values in prop::collection::vec(finite(), 0..40),
            round in any::<u32>(),
            id in "[a-z0-9-]{0,12}",
            size in any::<u64>(),
        ) {
            let bytes = canonical_encode(&values, round, &id, size).unwrap();
            let back = canonical_decode(&bytes).unwrap();
            prop_assert_eq!(back.round, round);
            prop_assert_eq!(&back.client_id, &id);
            prop_assert_eq!(back.data_size, size);
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&back.values), bits(&values));
        }

        // Injectivity: distinct inputs never share an encoding.
        #[test]
        fn distinct_inputs_distinct_encodings(
            a in (prop::collection::vec(finite(), 0..6), any::<u32>(), "[ab]{0,3}", 0u64..4),
            b in (prop::collection::vec(finite(), 0..6), any::<u32>(), "[ab]{0,3}", 0u64..4),
        ) {
            let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
            let same = bits(&a.0) == bits(&b.0) && a.1 == b.1 && a.2 == b.2 && a.3 == b.3;
            let ea = canonical_encode(&a.0, a.1, &a.2, a.3).unwrap();
            let eb = canonical_encode(&b.0, b.1, &b.2, b.3).unwrap();
            prop_assert_eq!(same, ea == eb);
        }
    }
}
