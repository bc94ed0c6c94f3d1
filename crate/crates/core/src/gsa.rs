//! Greedy step averaging: per-sample greedy step lengths and the running
//! average that becomes the learning rate.
//!
//! Each visited sample yields the step length that would drive its own
//! predicted probability of the true class to the confidence threshold
//! `p_hat` along the negative per-sample gradient (closed form for linear
//! regression, a linear approximation for softmax, and the two-class
//! reduction of that approximation for logistic regression). The arithmetic
//! mean of all step lengths seen so far is the rate actually applied, so no
//! learning rate needs to be configured.

use thiserror::Error;

use crate::data::Dataset;
use crate::linalg::{DenseVec, SparseVec};
use crate::models::{logistic_forward, LinearModel, ModelKind};

#[derive(Debug, Error, PartialEq)]
pub enum GsaError {
    #[error("confidence threshold must lie strictly inside (0.5, 1), got {0}")]
    BadThreshold(f64),
    #[error("eta_max must be positive and finite, got {0}")]
    BadEtaMax(f64),
    #[error("training needs at least one pass")]
    ZeroPasses,
    #[error("model kind {model:?} does not match dataset with {classes} class(es)")]
    KindMismatch { model: ModelKind, classes: usize },
}

/// Tunables of the greedy step; the defaults are the only values used in
/// benchmark runs, making the optimizer parameter-free in practice.
#[derive(Debug, Clone, Copy)]
pub struct GsaConfig {
    /// Target probability substituted for the sigmoid/softmax asymptote.
    pub p_hat: f64,
    /// Floor negative greedy steps at zero instead of averaging them in.
    pub clamp_negative: bool,
    /// Safety cap on a single greedy step.
    pub eta_max: f64,
}

impl Default for GsaConfig {
    fn default() -> Self {
        Self { p_hat: 0.95, clamp_negative: true, eta_max: 1e4 }
    }
}

impl GsaConfig {
    pub fn with_p_hat(p_hat: f64) -> Result<Self, GsaError> {
        let cfg = Self { p_hat, ..Self::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), GsaError> {
        if !(self.p_hat > 0.5 && self.p_hat < 1.0) {
            return Err(GsaError::BadThreshold(self.p_hat));
        }
        if !(self.eta_max > 0.0 && self.eta_max.is_finite()) {
            return Err(GsaError::BadEtaMax(self.eta_max));
        }
        Ok(())
    }

    fn clamp(&self, eta: f64) -> f64 {
        let lo = if self.clamp_negative { 0.0 } else { -self.eta_max };
        eta.clamp(lo, self.eta_max)
    }
}

/// Running mean of all accepted greedy step lengths.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GsaState {
    mean_eta: f64,
    t: u64,
}

impl GsaState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn mean_eta(&self) -> f64 {
        self.mean_eta
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// `mean' = (t * mean + eta) / (t + 1)`; skipped samples simply never
    /// reach this method.
    pub fn update(&mut self, eta: f64) {
        debug_assert!(eta.is_finite());
        let t = self.t as f64;
        self.mean_eta = (t * self.mean_eta + eta) / (t + 1.0);
        self.t += 1;
    }
}

/// Closed-form greedy step for quadratic loss: `1 / (x . x)`.
/// One such step drives the sample's residual to exactly zero.
pub fn greedy_step_linreg(x: &SparseVec) -> Option<f64> {
    let sq = x.sq_norm();
    if sq == 0.0 {
        return None;
    }
    Some(1.0 / sq)
}

/// Exact logistic greedy step: the step along `x (y - p)` after which the
/// predicted probability equals `p_hat` (for y = 1) or `1 - p_hat` (y = 0).
///
/// Exposed for verification; training uses [`greedy_step_logistic_binary`],
/// the two-class reduction of the softmax approximation.
pub fn greedy_step_logistic_exact(w: &DenseVec, x: &SparseVec, y: u8, p_hat: f64) -> Option<f64> {
    debug_assert!(y <= 1);
    let sq = x.sq_norm();
    if sq == 0.0 {
        return None;
    }
    let p = logistic_forward(w, x);
    let y = f64::from(y);
    if (y - p).abs() < 1e-12 {
        return None; // saturated: no direction left to move along
    }
    let z = x.dot(w).expect("dimension mismatch");
    let sign = if y >= 0.5 { 1.0 } else { -1.0 };
    let target = sign * (p_hat / (1.0 - p_hat)).ln();
    Some((target - z) / (sq * (y - p)))
}

/// Approximate greedy step for softmax, true class `k`.
///
/// With `e_j = exp(z_j - max z)` (the shift cancels in the ratio) and
/// `b_j = exp(p_j)`, the linearized threshold equation gives
/// `lambda = (-p_hat sum_j e_j + e_k) / (p_hat sum_j e_j (1 - b_j) + e_k - e e_k / b_k)`
/// and `eta = lambda / (x . x)`, clamped per the config.
pub fn greedy_step_softmax(
    rows: &[DenseVec],
    x: &SparseVec,
    k: usize,
    cfg: &GsaConfig,
) -> Option<f64> {
    debug_assert!(rows.len() >= 2 && k < rows.len());
    let sq = x.sq_norm();
    if sq == 0.0 {
        return None;
    }
    let z: Vec<f64> = rows.iter().map(|w| x.dot(w).expect("dimension mismatch")).collect();
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|&v| (v - max).exp()).collect();
    let sum_e: f64 = e.iter().sum();

    let numerator = e[k] - cfg.p_hat * sum_e;
    let mut denominator = e[k];
    for (j, &ej) in e.iter().enumerate() {
        let pj = ej / sum_e;
        let bj = pj.exp();
        denominator += cfg.p_hat * ej * (1.0 - bj);
        if j == k {
            denominator -= std::f64::consts::E * ej / bj;
        }
    }
    // Degenerate inputs (including non-finite weights after a divergent
    // run) skip rather than poison the running mean.
    if denominator.abs() < 1e-300 || !(numerator.is_finite() && denominator.is_finite()) {
        return None;
    }
    let eta = numerator / denominator / sq;
    if !eta.is_finite() {
        return None;
    }
    Some(cfg.clamp(eta))
}

/// Two-class reduction of [`greedy_step_softmax`] for a logistic model,
/// including the factor `2 / (x . x)` from folding the two softmax rows
/// into the single weight vector `w = w1 - w0`.
pub fn greedy_step_logistic_binary(
    w: &DenseVec,
    x: &SparseVec,
    y: u8,
    cfg: &GsaConfig,
) -> Option<f64> {
    debug_assert!(y <= 1);
    let sq = x.sq_norm();
    if sq == 0.0 {
        return None;
    }
    let p1 = logistic_forward(w, x);
    let p0 = 1.0 - p1;
    let b0 = p0.exp();
    let b1 = p1.exp();
    let shared = cfg.p_hat * (1.0 - p0 * b0 - p1 * b1);
    let (numerator, denominator) = if y == 1 {
        (p1 - cfg.p_hat, shared + p1 * (1.0 - b0))
    } else {
        (p0 - cfg.p_hat, shared + p0 * (1.0 - b1))
    };
    if denominator.abs() < 1e-300 {
        return None;
    }
    let eta = numerator / denominator * 2.0 / sq;
    if !eta.is_finite() {
        return None;
    }
    Some(cfg.clamp(eta))
}

/// Outcome of one training-sample visit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub loss: f64,
    /// Accepted greedy step length, `None` when the sample was skipped.
    pub eta: Option<f64>,
    /// Averaged rate actually applied.
    pub applied_rate: f64,
}

/// One GSA iteration: greedy step length, running-mean update, then the
/// weight update with the averaged rate.
///
/// A skip signal (zero-norm sample, saturated probability, vanishing
/// denominator) leaves the running mean untouched; the weight update still
/// uses the existing mean.
pub fn gsa_step(
    model: &mut LinearModel,
    state: &mut GsaState,
    cfg: &GsaConfig,
    sample: &crate::data::Sample,
) -> StepOutcome {
    let (loss, coeffs) = model.loss_grad(sample);
    let eta = match model.kind() {
        ModelKind::Linear => greedy_step_linreg(&sample.features),
        ModelKind::Logistic => {
            greedy_step_logistic_binary(&model.rows()[0], &sample.features, sample.label as u8, cfg)
        }
        ModelKind::Softmax => {
            greedy_step_softmax(model.rows(), &sample.features, sample.label, cfg)
        }
    };
    if let Some(eta) = eta {
        state.update(eta);
    }
    let rate = state.mean_eta();
    model.apply_step(rate, &coeffs, &sample.features);
    StepOutcome { loss, eta, applied_rate: rate }
}

/// One `(step, eta, mean_eta)` row per accepted greedy step; `step` is the
/// global visit index, so gaps mark skipped samples.
#[derive(Debug, Clone, Default)]
pub struct StepTrace {
    pub rows: Vec<(u64, f64, f64)>,
}

impl StepTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,eta,mean_eta\n");
        for &(step, eta, mean) in &self.rows {
            out.push_str(&format!("{step},{eta},{mean}\n"));
        }
        out
    }
}

/// Trains for `passes` shuffled traversals of `train`, calling `eval_hook`
/// with the 1-based pass index after each pass. The averaging state persists
/// across passes and is returned alongside the step-size trace.
pub fn gsa_train<F>(
    model: &mut LinearModel,
    train: &Dataset,
    passes: u32,
    seed: u64,
    cfg: &GsaConfig,
    mut eval_hook: F,
) -> Result<(GsaState, StepTrace), GsaError>
where
    F: FnMut(u32, &LinearModel),
{
    if passes == 0 {
        return Err(GsaError::ZeroPasses);
    }
    cfg.validate()?;
    check_kind(model, train)?;
    let mut state = GsaState::new();
    let mut trace = StepTrace::default();
    let mut step_index: u64 = 0;
    for pass in 0..passes {
        for &i in &crate::data::epoch_permutation(train.len(), seed, u64::from(pass)) {
            step_index += 1;
            let outcome = gsa_step(model, &mut state, cfg, &train.samples[i]);
            if let Some(eta) = outcome.eta {
                trace.rows.push((step_index, eta, state.mean_eta()));
            }
        }
        eval_hook(pass + 1, model);
    }
    Ok((state, trace))
}

pub(crate) fn check_kind(model: &LinearModel, data: &Dataset) -> Result<(), GsaError> {
    let ok = match model.kind() {
        ModelKind::Linear => data.n_classes == 1,
        ModelKind::Logistic => data.n_classes == 2,
        ModelKind::Softmax => data.n_classes >= 2 && model.n_rows() == data.n_classes,
    } && model.n_features() == data.n_features;
    if ok {
        Ok(())
    } else {
        Err(GsaError::KindMismatch { model: model.kind(), classes: data.n_classes })
    }
}
