//! Test-set evaluation: cross-entropy loss, precision (classification
//! accuracy), ROC-AUC for binary tasks, and the running-minimum loss
//! diagnostic.

use thiserror::Error;

use crate::data::Dataset;
use crate::models::{LinearModel, ModelKind};

/// Probabilities are clipped to `[CLIP, 1 - CLIP]` before taking logs, so a
/// fully-wrong prediction contributes `-ln(1e-15) ~ 34.538776` per sample.
pub const PROB_CLIP: f64 = 1e-15;

/// Loss level past which a run is flagged as diverged.
pub const DIVERGENCE_LOSS: f64 = 1e6;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("cannot evaluate an empty dataset")]
    EmptyDataset,
    #[error("ROC-AUC is undefined when only one class is present")]
    SingleClass,
    #[error("metric is not defined for {0:?} models")]
    Unsupported(ModelKind),
}

/// Mean clipped cross-entropy over the dataset. For linear-regression
/// models this is the mean quadratic loss instead (no clipping applies).
pub fn mean_cross_entropy(model: &LinearModel, data: &Dataset) -> Result<f64, MetricsError> {
    if data.is_empty() {
        return Err(MetricsError::EmptyDataset);
    }
    let total: f64 = match model.kind() {
        ModelKind::Linear => data.samples.iter().map(|s| model.loss_grad(s).0).sum(),
        _ => data
            .samples
            .iter()
            .map(|s| {
                let p = model.class_probs(&s.features)[s.label];
                -(p.clamp(PROB_CLIP, 1.0 - PROB_CLIP)).ln()
            })
            .sum(),
    };
    Ok(total / data.len() as f64)
}

/// Fraction of samples whose argmax class matches the label; ties go to the
/// lowest class index.
pub fn precision(model: &LinearModel, data: &Dataset) -> Result<f64, MetricsError> {
    if data.is_empty() {
        return Err(MetricsError::EmptyDataset);
    }
    if model.kind() == ModelKind::Linear {
        return Err(MetricsError::Unsupported(ModelKind::Linear));
    }
    let mut correct = 0usize;
    for s in &data.samples {
        let probs = model.class_probs(&s.features);
        let mut best = 0usize;
        for (k, &p) in probs.iter().enumerate().skip(1) {
            if p > probs[best] {
                best = k;
            }
        }
        if best == s.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

/// Probability that a random positive outscores a random negative, with
/// ties counted one half; computed from midranks in O(n log n).
pub fn roc_auc(scores: &[f64], labels: &[usize]) -> Result<f64, MetricsError> {
    assert_eq!(scores.len(), labels.len());
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(MetricsError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));

    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // midrank of the tie group spanning positions i..=j (1-based ranks)
        let midrank = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if labels[idx] == 1 {
                rank_sum_pos += midrank;
            }
        }
        i = j + 1;
    }
    let p = pos as f64;
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * neg as f64))
}

/// Running minimum of the evaluated loss over passes (`f_m`).
#[derive(Debug, Clone, Copy, Default)]
pub struct MinLossTracker {
    f_m: Option<f64>,
}

impl MinLossTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn observe(&mut self, loss: f64) {
        self.f_m = Some(match self.f_m {
            Some(m) => m.min(loss),
            None => loss,
        });
    }

    pub fn min(&self) -> Option<f64> {
        self.f_m
    }
}

/// One full test-set evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub loss: f64,
    /// Accuracy; absent for regression models.
    pub precision: Option<f64>,
    /// Present for binary classification only.
    pub auc: Option<f64>,
    pub diverged: bool,
}

/// Evaluates loss, precision, and (for binary tasks) AUC in one pass.
///
/// A model with non-finite weights short-circuits to a diverged record with
/// NaN loss rather than feeding NaN into the metric kernels.
pub fn evaluate(model: &LinearModel, data: &Dataset) -> Result<Evaluation, MetricsError> {
    if data.is_empty() {
        return Err(MetricsError::EmptyDataset);
    }
    if !model.is_finite() {
        return Ok(Evaluation { loss: f64::NAN, precision: None, auc: None, diverged: true });
    }
    let loss = mean_cross_entropy(model, data)?;
    let diverged = !loss.is_finite() || loss > DIVERGENCE_LOSS;
    if model.kind() == ModelKind::Linear {
        return Ok(Evaluation { loss, precision: None, auc: None, diverged });
    }
    let precision = precision(model, data)?;
    let auc = if model.kind() == ModelKind::Logistic && data.n_classes == 2 {
        let scores: Vec<f64> =
            data.samples.iter().map(|s| model.class_probs(&s.features)[1]).collect();
        let labels: Vec<usize> = data.samples.iter().map(|s| s.label).collect();
        match roc_auc(&scores, &labels) {
            Ok(a) => Some(a),
            Err(MetricsError::SingleClass) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    Ok(Evaluation { loss, precision: Some(precision), auc, diverged })
}
