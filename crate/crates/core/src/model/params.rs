use std::fmt;

use super::{ModelError, Result};

/// Shape descriptor for a flat parameter vector.
///
/// Each block is a `rows × cols` matrix stored row-major; blocks are laid out
/// back to back in declaration order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Layout {
    blocks: Vec<(usize, usize)>,
}

impl Layout {
    pub fn new(blocks: Vec<(usize, usize)>) -> Self {
        Self { blocks }
    }

    pub fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    /// Total parameter count.
    pub fn size(&self) -> usize {
        self.blocks.iter().map(|(r, c)| r * c).sum()
    }

    /// Start offset of block `index` in the flat vector.
    pub fn offset(&self, index: usize) -> usize {
        self.blocks[..index].iter().map(|(r, c)| r * c).sum()
    }
}

/// Flat model parameters (or a parameter delta) with a fixed layout.
#[derive(Clone, PartialEq)]
pub struct ParameterVector {
    values: Vec<f64>,
    layout: Layout,
}

impl fmt::Debug for ParameterVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParameterVector")
            .field("len", &self.values.len())
            .field("layout", &self.layout)
            .finish()
    }
}

impl ParameterVector {
    pub fn zeros(layout: Layout) -> Self {
        Self {
            values: vec![0.0; layout.size()],
            layout,
        }
    }

    /// Builds a vector, checking length and finiteness.
    pub fn new(layout: Layout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.size() {
            return Err(ModelError::DimensionMismatch {
                expected: layout.size(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite("parameter vector"));
        }
        Ok(Self { values, layout })
    }

    /// A single-block vector, handy for plain updates with no model attached.
    pub fn flat(values: Vec<f64>) -> Result<Self> {
        let layout = Layout::new(vec![(values.len(), 1)]);
        Self::new(layout, values)
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Values of block `index`.
    pub fn block(&self, index: usize) -> &[f64] {
        let start = self.layout.offset(index);
        let (r, c) = self.layout.blocks()[index];
        &self.values[start..start + r * c]
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.layout != other.layout {
            return Err(ModelError::LayoutMismatch);
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_compatible(other)?;
        let values: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::new(self.layout.clone(), values)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Result<Self> {
        let values = self.values.iter().map(|v| v * factor).collect();
        Self::new(self.layout.clone(), values)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }
}
