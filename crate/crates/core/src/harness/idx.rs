//! Reader for the IDX container used by the MNIST distribution.
//!
//! ```text
//! images: 0x00000803 | count u32 | rows u32 | cols u32 | count*rows*cols u8
//! labels: 0x00000801 | count u32 | count u8
//! ```
//!
//! All integers are big-endian. Pixels are scaled by 1/255.

use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use thiserror::Error;

use crate::model::Dataset;
use crate::seed::rng_from_seed;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Error)]
pub enum IdxError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: magic {found:#010x}, expected {expected:#010x}")]
    WrongMagic {
        file: &'static str,
        expected: u32,
        found: u32,
    },
    #[error("{file}: truncated, need {needed} bytes, have {have}")]
    Truncated {
        file: &'static str,
        needed: usize,
        have: usize,
    },
    #[error("{file}: {extra} trailing bytes")]
    TrailingBytes { file: &'static str, extra: usize },
    #[error("{images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("subset of {subset} requested from {available} examples")]
    SubsetTooLarge { subset: usize, available: usize },
    #[error("image files with zero-sized dimensions are not supported")]
    EmptyImage,
}

fn header(
    bytes: &[u8],
    file: &'static str,
    magic: u32,
    dims: usize,
) -> Result<Vec<usize>, IdxError> {
    let truncated = |needed: usize| IdxError::Truncated {
        file,
        needed,
        have: bytes.len(),
    };
    if bytes.len() < 4 {
        return Err(truncated(4));
    }
    let word = |i: usize| u32::from_be_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap());
    let found = word(0);
    if found != magic {
        return Err(IdxError::WrongMagic {
            file,
            expected: magic,
            found,
        });
    }
    let needed = 4 * (1 + dims);
    if bytes.len() < needed {
        return Err(truncated(needed));
    }
    Ok((1..=dims).map(|i| word(i) as usize).collect())
}

fn body<'a>(
    bytes: &'a [u8],
    file: &'static str,
    offset: usize,
    len: usize,
) -> Result<&'a [u8], IdxError> {
    let needed = offset + len;
    match bytes.len().cmp(&needed) {
        std::cmp::Ordering::Less => Err(IdxError::Truncated {
            file,
            needed,
            have: bytes.len(),
        }),
        std::cmp::Ordering::Greater => Err(IdxError::TrailingBytes {
            file,
            extra: bytes.len() - needed,
        }),
        std::cmp::Ordering::Equal => Ok(&bytes[offset..]),
    }
}

/// Parses an image/label pair held in memory. `subset = None` keeps every
/// example in file order; otherwise `subset` examples are drawn without
/// replacement using `seed`. The class count is one more than the largest
/// label in the file.
pub fn parse_idx(
    images: &[u8],
    labels: &[u8],
    subset: Option<usize>,
    seed: u64,
) -> Result<Dataset, IdxError> {
    let dims = header(images, "images", IMAGES_MAGIC, 3)?;
    let (count, pixels) = (dims[0], dims[1] * dims[2]);
    if pixels == 0 {
        return Err(IdxError::EmptyImage);
    }
    let image_bytes = body(images, "images", 16, count * pixels)?;
    let label_count = header(labels, "labels", LABELS_MAGIC, 1)?[0];
    let label_bytes = body(labels, "labels", 8, label_count)?;
    if label_count != count {
        return Err(IdxError::CountMismatch {
            images: count,
            labels: label_count,
        });
    }

    let chosen: Vec<usize> = match subset {
        None => (0..count).collect(),
        Some(k) if k > count => {
            return Err(IdxError::SubsetTooLarge {
                subset: k,
                available: count,
            })
        }
        Some(k) => sample(&mut rng_from_seed(seed), count, k).into_vec(),
    };
    let num_classes = label_bytes
        .iter()
        .copied()
        .max()
        .map_or(1, |m| m as usize + 1);
    let mut features = Vec::with_capacity(chosen.len() * pixels);
    let mut out_labels = Vec::with_capacity(chosen.len());
    for &i in &chosen {
        features.extend(
            image_bytes[i * pixels..(i + 1) * pixels]
                .iter()
                .map(|&p| p as f64 / 255.0),
        );
        out_labels.push(label_bytes[i] as usize);
    }
    Ok(Dataset::new(features, pixels, out_labels, num_classes)
        .expect("IDX contents form a valid dataset"))
}

/// Reads and parses an IDX image/label file pair; see [`parse_idx`].
pub fn load_idx(
    images: impl AsRef<Path>,
    labels: impl AsRef<Path>,
    subset: Option<usize>,
    seed: u64,
) -> Result<Dataset, IdxError> {
    let read = |p: &Path| {
        std::fs::read(p).map_err(|source| IdxError::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    parse_idx(
        &read(images.as_ref())?,
        &read(labels.as_ref())?,
        subset,
        seed,
    )
}

/// Serializes a dataset whose features lie in [0, 1] back into IDX bytes,
/// rounding pixels to the nearest byte. Labels must fit in a byte.
pub fn encode_idx(rows: usize, cols: usize, data: &Dataset) -> (Vec<u8>, Vec<u8>) {
    assert_eq!(
        rows * cols,
        data.num_features(),
        "image shape does not match features"
    );
    let n = data.len() as u32;
    let mut images = Vec::with_capacity(16 + data.len() * rows * cols);
    for word in [IMAGES_MAGIC, n, rows as u32, cols as u32] {
        images.extend(word.to_be_bytes());
    }
    let mut labels = Vec::with_capacity(8 + data.len());
    labels.extend(LABELS_MAGIC.to_be_bytes());
    labels.extend(n.to_be_bytes());
    for (row, label) in data.rows() {
        images.extend(
            row.iter()
                .map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8),
        );
        labels.push(u8::try_from(label).expect("label fits in a byte"));
    }
    (images, labels)
}
