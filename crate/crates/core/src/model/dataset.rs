use super::{ModelError, Result};

/// Labelled examples for a single client (or an evaluation split).
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    num_features: usize,
    labels: Vec<usize>,
    num_classes: usize,
}

impl Dataset {
    /// `features` is row-major `[labels.len() × num_features]`.
    pub fn new(
        features: Vec<f64>,
        num_features: usize,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self> {
        if num_features == 0 {
            return Err(ModelError::InvalidConfig(
                "num_features must be >= 1".into(),
            ));
        }
        if num_classes == 0 {
            return Err(ModelError::InvalidConfig("num_classes must be >= 1".into()));
        }
        if features.len() != labels.len() * num_features {
            return Err(ModelError::DimensionMismatch {
                expected: labels.len() * num_features,
                got: features.len(),
            });
        }
        if let Some(&label) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(ModelError::LabelOutOfRange { label, num_classes });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite("dataset features"));
        }
        Ok(Self {
            features,
            num_features,
            labels,
            num_classes,
        })
    }

    /// Number of examples, `|D_i|`.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, index: usize) -> &[f64] {
        let start = index * self.num_features;
        &self.features[start..start + self.num_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], usize)> {
        self.features
            .chunks_exact(self.num_features)
            .zip(self.labels.iter().copied())
    }

    /// Examples at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let mut features = Vec::with_capacity(indices.len() * self.num_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Self {
            features,
            num_features: self.num_features,
            labels,
            num_classes: self.num_classes,
        }
    }

    /// Same features with a replacement label vector.
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Self> {
        Self::new(
            self.features.clone(),
            self.num_features,
            labels,
            self.num_classes,
        )
    }

    /// Concatenates datasets with identical dimensions.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Dataset>) -> Result<Self> {
        let mut iter = parts.into_iter();
        let first = iter.next().ok_or(ModelError::EmptyDataset)?;
        let mut out = first.clone();
        for part in iter {
            if part.num_features != out.num_features {
                return Err(ModelError::DimensionMismatch {
                    expected: out.num_features,
                    got: part.num_features,
                });
            }
            if part.num_classes != out.num_classes {
                return Err(ModelError::DimensionMismatch {
                    expected: out.num_classes,
                    got: part.num_classes,
                });
            }
            out.features.extend_from_slice(&part.features);
            out.labels.extend_from_slice(&part.labels);
        }
        Ok(out)
    }
}
