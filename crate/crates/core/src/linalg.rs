//! Minimal sparse/dense numeric kernels shared by the models and optimizers.
//!
//! Accumulation order is fixed (ascending feature index) so that repeated
//! runs under the same seed are bit-reproducible. All values are `f64`.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("feature index {index} out of range for dimension {dim}")]
    DimensionMismatch { index: usize, dim: usize },
    #[error("indices must be strictly increasing, offending index {index}")]
    UnsortedIndices { index: usize },
    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },
    #[error("scale factor {0} is not finite")]
    NonFiniteScale(f64),
}

/// One sample's features as sorted `(index, value)` pairs.
///
/// Indices are strictly increasing and all values finite; both are enforced
/// at construction so training loops never have to re-validate.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVec {
    entries: Vec<(usize, f64)>,
    dim: usize,
}

impl SparseVec {
    /// Builds a sparse vector, rejecting unsorted/duplicate indices,
    /// non-finite values, and indices at or beyond `dim`.
    pub fn new(entries: Vec<(usize, f64)>, dim: usize) -> Result<Self, LinalgError> {
        let mut prev: Option<usize> = None;
        for &(index, value) in &entries {
            if let Some(p) = prev {
                if index <= p {
                    return Err(LinalgError::UnsortedIndices { index });
                }
            }
            if !value.is_finite() {
                return Err(LinalgError::NonFinite { index, value });
            }
            if index >= dim {
                return Err(LinalgError::DimensionMismatch { index, dim });
            }
            prev = Some(index);
        }
        Ok(Self { entries, dim })
    }

    pub fn empty(dim: usize) -> Self {
        Self { entries: Vec::new(), dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// ωᵀx against a dense vector, accumulated in ascending index order.
    pub fn dot(&self, d: &DenseVec) -> Result<f64, LinalgError> {
        if let Some(&(index, _)) = self.entries.last() {
            if index >= d.len() {
                return Err(LinalgError::DimensionMismatch { index, dim: d.len() });
            }
        }
        Ok(self.entries.iter().fold(0.0, |acc, &(i, v)| acc + v * d.values[i]))
    }

    /// xᵀx.
    pub fn sq_norm(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, &(_, v)| acc + v * v)
    }

    pub fn to_dense(&self) -> DenseVec {
        let mut values = vec![0.0; self.dim];
        for &(i, v) in &self.entries {
            values[i] = v;
        }
        DenseVec { values }
    }
}

/// Contiguous `f64` storage for one weight row; length fixed after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVec {
    values: Vec<f64>,
}

impl DenseVec {
    pub fn zeros(len: usize) -> Self {
        Self { values: vec![0.0; len] }
    }

    /// Rejects non-finite values; divergence can still push existing storage
    /// out of range through `scaled_add`, which callers detect via
    /// [`DenseVec::is_finite`].
    pub fn from_vec(values: Vec<f64>) -> Result<Self, LinalgError> {
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(LinalgError::NonFinite { index, value });
            }
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `self[i] += a * s[i]` over the entries of `s`; other components untouched.
    pub fn scaled_add(&mut self, a: f64, s: &SparseVec) -> Result<(), LinalgError> {
        if !a.is_finite() {
            return Err(LinalgError::NonFiniteScale(a));
        }
        if let Some(&(index, _)) = s.entries.last() {
            if index >= self.values.len() {
                return Err(LinalgError::DimensionMismatch { index, dim: self.values.len() });
            }
        }
        for &(i, v) in &s.entries {
            self.values[i] += a * v;
        }
        Ok(())
    }
}

/// Max-shifted softmax: `p_k = exp(z_k - max z) / Σ_j exp(z_j - max z)`.
///
/// The shift guarantees no overflow for any finite logits; the returned
/// vector sums to 1 up to rounding.
pub fn stable_softmax(z: &[f64]) -> Vec<f64> {
    assert!(z.len() >= 2, "softmax needs at least two logits");
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}
