//! Forward pass, per-sample loss, and per-sample gradient for linear,
//! logistic, and softmax regression.
//!
//! Gradients are never densified: the gradient of one sample's loss with
//! respect to weight row `l` is `coeffs[l] * x`, so an update touches only
//! `nnz(x) * L` weights.

use thiserror::Error;

use crate::data::Sample;
use crate::linalg::{stable_softmax, DenseVec, SparseVec};

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("{kind:?} regression requires {expected} class(es), dataset has {got}")]
    ClassCount { kind: ModelKind, expected: &'static str, got: usize },
    #[error("model has no features")]
    NoFeatures,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Linear,
    Logistic,
    Softmax,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Linear => "linear",
            ModelKind::Logistic => "logistic",
            ModelKind::Softmax => "softmax",
        }
    }
}

/// Per-class gradient coefficients: `grad(row l) = coeffs[l] * x`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCoeffs {
    coeffs: Vec<f64>,
}

impl GradCoeffs {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Dense weight storage: `L` rows of length `p` (`L = 1` for linear and
/// logistic, `L >= 2` for softmax).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    kind: ModelKind,
    weights: Vec<DenseVec>,
}

impl LinearModel {
    /// Zero-initialized model sized for a dataset with `n_features` columns
    /// and `n_classes` classes (1 for regression targets).
    pub fn zeros(kind: ModelKind, n_features: usize, n_classes: usize) -> Result<Self, ModelError> {
        if n_features == 0 {
            return Err(ModelError::NoFeatures);
        }
        let rows = match kind {
            ModelKind::Linear => {
                if n_classes != 1 {
                    return Err(ModelError::ClassCount { kind, expected: "1", got: n_classes });
                }
                1
            }
            ModelKind::Logistic => {
                if n_classes != 2 {
                    return Err(ModelError::ClassCount { kind, expected: "2", got: n_classes });
                }
                1
            }
            ModelKind::Softmax => {
                if n_classes < 2 {
                    return Err(ModelError::ClassCount { kind, expected: ">= 2", got: n_classes });
                }
                n_classes
            }
        };
        Ok(Self { kind, weights: vec![DenseVec::zeros(n_features); rows] })
    }

    pub fn from_rows(kind: ModelKind, weights: Vec<DenseVec>) -> Result<Self, ModelError> {
        let rows = weights.len();
        match kind {
            ModelKind::Softmax if rows < 2 => {
                return Err(ModelError::ClassCount { kind, expected: ">= 2", got: rows })
            }
            ModelKind::Linear | ModelKind::Logistic if rows != 1 => {
                return Err(ModelError::ClassCount { kind, expected: "1", got: rows })
            }
            _ => {}
        }
        if weights.is_empty() || weights[0].is_empty() {
            return Err(ModelError::NoFeatures);
        }
        Ok(Self { kind, weights })
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Feature count `p`.
    pub fn n_features(&self) -> usize {
        self.weights[0].len()
    }

    /// Weight-row count `L`.
    pub fn n_rows(&self) -> usize {
        self.weights.len()
    }

    pub fn rows(&self) -> &[DenseVec] {
        &self.weights
    }

    pub fn rows_mut(&mut self) -> &mut [DenseVec] {
        &mut self.weights
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(DenseVec::is_finite)
    }

    /// Loss and gradient coefficients for one sample, dispatched on kind.
    pub fn loss_grad(&self, sample: &Sample) -> (f64, GradCoeffs) {
        match self.kind {
            ModelKind::Linear => {
                let (loss, c) = linreg_loss_grad(&self.weights[0], &sample.features, sample.target);
                (loss, GradCoeffs::new(vec![c]))
            }
            ModelKind::Logistic => {
                let (loss, c) =
                    logistic_loss_grad(&self.weights[0], &sample.features, sample.label as u8);
                (loss, GradCoeffs::new(vec![c]))
            }
            ModelKind::Softmax => softmax_loss_grad(&self.weights, &sample.features, sample.label),
        }
    }

    /// Class-probability vector for metrics; logistic expands to `[1-p, p]`.
    /// Not defined for linear regression.
    pub fn class_probs(&self, x: &SparseVec) -> Vec<f64> {
        match self.kind {
            ModelKind::Linear => panic!("class probabilities are undefined for linear regression"),
            ModelKind::Logistic => {
                let p1 = logistic_forward(&self.weights[0], x);
                vec![1.0 - p1, p1]
            }
            ModelKind::Softmax => softmax_forward(&self.weights, x),
        }
    }

    /// Raw prediction `w . x` of the single row (linear/logistic).
    pub fn decision(&self, x: &SparseVec) -> f64 {
        x.dot(&self.weights[0]).expect("dimension mismatch")
    }

    /// Descent update `w_l -= step * coeffs[l] * x` applied to every row.
    ///
    /// A divergent run can push gradient coefficients past f64 range; such
    /// rows are left untouched so the run finishes and evaluation can flag
    /// it, instead of feeding a non-finite scale into the kernel.
    pub fn apply_step(&mut self, step: f64, coeffs: &GradCoeffs, x: &SparseVec) {
        debug_assert_eq!(coeffs.len(), self.weights.len());
        for (row, &c) in self.weights.iter_mut().zip(coeffs.as_slice()) {
            let scale = -step * c;
            if !scale.is_finite() {
                continue;
            }
            row.scaled_add(scale, x).expect("dimension mismatch");
        }
    }
}

/// Numerically stable sigmoid of `w . x`.
pub fn logistic_forward(w: &DenseVec, x: &SparseVec) -> f64 {
    sigmoid(x.dot(w).expect("dimension mismatch"))
}

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Cross-entropy loss and gradient coefficient for a single binary sample.
///
/// The loss is evaluated as `log1p(exp(-|z|)) + max(z, 0) - y z`, which is
/// exact for any finite logit; the gradient is `(p - y) * x`.
pub fn logistic_loss_grad(w: &DenseVec, x: &SparseVec, y: u8) -> (f64, f64) {
    debug_assert!(y <= 1);
    let z = x.dot(w).expect("dimension mismatch");
    let y = f64::from(y);
    let loss = (-z.abs()).exp().ln_1p() + z.max(0.0) - y * z;
    (loss, sigmoid(z) - y)
}

/// Class probabilities from per-row logits via the max-shifted softmax.
pub fn softmax_forward(rows: &[DenseVec], x: &SparseVec) -> Vec<f64> {
    let z: Vec<f64> = rows.iter().map(|w| x.dot(w).expect("dimension mismatch")).collect();
    stable_softmax(&z)
}

/// Softmax cross-entropy loss and per-class gradient coefficients for a
/// sample with true class `k`. The loss comes from the shifted logits, not
/// from a (possibly underflowed) probability.
pub fn softmax_loss_grad(rows: &[DenseVec], x: &SparseVec, k: usize) -> (f64, GradCoeffs) {
    assert!(k < rows.len(), "class {k} out of range for {} rows", rows.len());
    let z: Vec<f64> = rows.iter().map(|w| x.dot(w).expect("dimension mismatch")).collect();
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|&v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    let loss = sum.ln() - (z[k] - max);
    let mut coeffs: Vec<f64> = exps.into_iter().map(|e| e / sum).collect();
    coeffs[k] -= 1.0;
    (loss, GradCoeffs::new(coeffs))
}

/// Quadratic loss `r^2 / 2` and gradient coefficient `-r` for residual
/// `r = y - w . x`.
pub fn linreg_loss_grad(w: &DenseVec, x: &SparseVec, y: f64) -> (f64, f64) {
    let r = y - x.dot(w).expect("dimension mismatch");
    (0.5 * r * r, -r)
}
