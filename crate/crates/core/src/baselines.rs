//! Comparison optimizers: constant-rate SGD, Adadelta with whole-time
//! averaging, and SCSG with batch anchors and Poisson inner-loop lengths.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::data::{Dataset, Sample};
use crate::gsa::check_kind;
use crate::models::LinearModel;
use crate::rng::{stream_rng, DetRng, STREAM_SCSG};

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("learning rate must be positive and finite, got {0}")]
    BadRate(f64),
    #[error("eps must be positive and finite, got {0}")]
    BadEps(f64),
    #[error("batch size {batch} exceeds dataset size {n}")]
    BatchTooLarge { batch: usize, n: usize },
    #[error("batch size must be at least 1")]
    EmptyBatch,
    #[error("training needs at least one pass")]
    ZeroPasses,
    #[error(transparent)]
    Kind(#[from] crate::gsa::GsaError),
}

/// Constant-rate SGD.
#[derive(Debug, Clone, Copy)]
pub struct SgdConfig {
    pub rate: f64,
}

impl SgdConfig {
    pub fn new(rate: f64) -> Result<Self, BaselineError> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(BaselineError::BadRate(rate));
        }
        Ok(Self { rate })
    }
}

/// `w_l -= rate * coeffs[l] * x`; returns the sample loss before the update.
pub fn sgd_step(model: &mut LinearModel, config: &SgdConfig, sample: &Sample) -> f64 {
    let (loss, coeffs) = model.loss_grad(sample);
    model.apply_step(config.rate, &coeffs, &sample.features);
    loss
}

pub fn sgd_train<F>(
    model: &mut LinearModel,
    train: &Dataset,
    passes: u32,
    seed: u64,
    config: &SgdConfig,
    mut eval_hook: F,
) -> Result<(), BaselineError>
where
    F: FnMut(u32, &LinearModel),
{
    if passes == 0 {
        return Err(BaselineError::ZeroPasses);
    }
    check_kind(model, train)?;
    for pass in 0..passes {
        for &i in &crate::data::epoch_permutation(train.len(), seed, u64::from(pass)) {
            sgd_step(model, config, &train.samples[i]);
        }
        eval_hook(pass + 1, model);
    }
    Ok(())
}

/// Adadelta state under the whole-time-average decay `gamma_t = (t-1)/t`.
///
/// With that decay both running averages are plain arithmetic means over all
/// steps so far, so the state keeps per-component running *sums* of `g^2`
/// and `dx^2` and divides by the global step count on use. Components
/// untouched by a sparse gradient contribute `g = 0` terms, which leave the
/// sums unchanged; the semantics match updating every component each step.
#[derive(Debug, Clone)]
pub struct AdadeltaState {
    eps: f64,
    g2_sum: Vec<Vec<f64>>,
    dx2_sum: Vec<Vec<f64>>,
    t: u64,
}

impl AdadeltaState {
    pub fn new(eps: f64, model: &LinearModel) -> Result<Self, BaselineError> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(BaselineError::BadEps(eps));
        }
        let shape = vec![vec![0.0; model.n_features()]; model.n_rows()];
        Ok(Self { eps, g2_sum: shape.clone(), dx2_sum: shape, t: 0 })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    /// Whole-time average of squared gradients for one component.
    pub fn mean_g2(&self, row: usize, col: usize) -> f64 {
        if self.t == 0 {
            0.0
        } else {
            self.g2_sum[row][col] / self.t as f64
        }
    }

    /// Whole-time average of squared updates for one component.
    pub fn mean_dx2(&self, row: usize, col: usize) -> f64 {
        if self.t == 0 {
            0.0
        } else {
            self.dx2_sum[row][col] / self.t as f64
        }
    }
}

/// One Adadelta step: per touched component,
/// `dx = -sqrt(E[dx^2]_{t-1} + eps) / (sqrt(E[g^2]_t) + eps) * g`.
pub fn adadelta_step(model: &mut LinearModel, state: &mut AdadeltaState, sample: &Sample) -> f64 {
    let (loss, coeffs) = model.loss_grad(sample);
    let t_prev = state.t as f64;
    let t_now = t_prev + 1.0;
    for (row_idx, &c) in coeffs.as_slice().iter().enumerate() {
        let row = &mut model.rows_mut()[row_idx];
        for &(col, xv) in sample.features.entries() {
            let g = c * xv;
            let mean_dx2_prev =
                if state.t == 0 { 0.0 } else { state.dx2_sum[row_idx][col] / t_prev };
            state.g2_sum[row_idx][col] += g * g;
            let mean_g2 = state.g2_sum[row_idx][col] / t_now;
            let dx = -((mean_dx2_prev + state.eps).sqrt() / (mean_g2.sqrt() + state.eps)) * g;
            row.as_mut_slice()[col] += dx;
            state.dx2_sum[row_idx][col] += dx * dx;
        }
    }
    state.t += 1;
    loss
}

pub fn adadelta_train<F>(
    model: &mut LinearModel,
    train: &Dataset,
    passes: u32,
    seed: u64,
    state: &mut AdadeltaState,
    mut eval_hook: F,
) -> Result<(), BaselineError>
where
    F: FnMut(u32, &LinearModel),
{
    if passes == 0 {
        return Err(BaselineError::ZeroPasses);
    }
    check_kind(model, train)?;
    for pass in 0..passes {
        for &i in &crate::data::epoch_permutation(train.len(), seed, u64::from(pass)) {
            adadelta_step(model, state, &train.samples[i]);
        }
        eval_hook(pass + 1, model);
    }
    Ok(())
}

/// SCSG: batch-gradient anchors with a Poisson number of variance-corrected
/// inner steps per epoch.
#[derive(Debug, Clone, Copy)]
pub struct ScsgConfig {
    pub rate: f64,
    pub batch_size: usize,
}

impl ScsgConfig {
    pub fn new(rate: f64, batch_size: usize) -> Result<Self, BaselineError> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(BaselineError::BadRate(rate));
        }
        if batch_size == 0 {
            return Err(BaselineError::EmptyBatch);
        }
        Ok(Self { rate, batch_size })
    }
}

/// Mean gradient over the given sample indices as a dense `L x p` matrix,
/// accumulated in index order.
pub fn batch_mean_gradient(
    model: &LinearModel,
    data: &Dataset,
    indices: &[usize],
) -> Vec<Vec<f64>> {
    let mut mu = vec![vec![0.0; model.n_features()]; model.n_rows()];
    for &i in indices {
        let sample = &data.samples[i];
        let (_, coeffs) = model.loss_grad(sample);
        for (row, &c) in mu.iter_mut().zip(coeffs.as_slice()) {
            for &(col, xv) in sample.features.entries() {
                row[col] += c * xv;
            }
        }
    }
    let scale = 1.0 / indices.len() as f64;
    for row in &mut mu {
        for v in row.iter_mut() {
            *v *= scale;
        }
    }
    mu
}

/// One variance-corrected inner step:
/// `w -= rate * (grad_i(w) - grad_i(anchor) + mu)`.
pub fn scsg_inner_step(
    model: &mut LinearModel,
    anchor: &LinearModel,
    mu: &[Vec<f64>],
    rate: f64,
    sample: &Sample,
) {
    let (_, coeffs_cur) = model.loss_grad(sample);
    let (_, coeffs_anchor) = anchor.loss_grad(sample);
    for (row_idx, row) in model.rows_mut().iter_mut().enumerate() {
        let slice = row.as_mut_slice();
        for (col, &m) in mu[row_idx].iter().enumerate() {
            slice[col] -= rate * m;
        }
        let dc = coeffs_cur.as_slice()[row_idx] - coeffs_anchor.as_slice()[row_idx];
        for &(col, xv) in sample.features.entries() {
            slice[col] -= rate * dc * xv;
        }
    }
}

/// One SCSG epoch: anchor on a size-B batch gradient, then `1 + Poisson(B)`
/// inner steps over uniformly drawn samples. Returns the number of sample
/// visits charged against the pass budget (`B + N`).
pub fn scsg_epoch(
    model: &mut LinearModel,
    config: &ScsgConfig,
    data: &Dataset,
    rng: &mut DetRng,
) -> Result<u64, BaselineError> {
    let n = data.len();
    let b = config.batch_size;
    if b > n {
        return Err(BaselineError::BatchTooLarge { batch: b, n });
    }
    // Batch without replacement via a partial Fisher-Yates, then sorted so
    // the mean-gradient accumulation order is index order.
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..b {
        let j = rng.gen_range(i..n);
        pool.swap(i, j);
    }
    let mut batch = pool[..b].to_vec();
    batch.sort_unstable();

    let anchor = model.clone();
    let mu = batch_mean_gradient(&anchor, data, &batch);

    let poisson = Poisson::new(b as f64).expect("positive mean");
    let inner_steps = 1 + poisson.sample(rng) as u64;
    for _ in 0..inner_steps {
        let i = rng.gen_range(0..n);
        scsg_inner_step(model, &anchor, &mu, config.rate, &data.samples[i]);
    }
    Ok(b as u64 + inner_steps)
}

/// Runs SCSG epochs against a budget of `passes * n` sample visits, calling
/// `eval_hook` whenever the budget crosses a pass boundary.
pub fn scsg_train<F>(
    model: &mut LinearModel,
    train: &Dataset,
    passes: u32,
    seed: u64,
    config: &ScsgConfig,
    mut eval_hook: F,
) -> Result<(), BaselineError>
where
    F: FnMut(u32, &LinearModel),
{
    if passes == 0 {
        return Err(BaselineError::ZeroPasses);
    }
    check_kind(model, train)?;
    if config.batch_size > train.len() {
        return Err(BaselineError::BatchTooLarge { batch: config.batch_size, n: train.len() });
    }
    let mut rng = stream_rng(seed, STREAM_SCSG);
    let n = train.len() as u64;
    let mut visits: u64 = 0;
    let mut next_pass: u32 = 1;
    while next_pass <= passes {
        visits += scsg_epoch(model, config, train, &mut rng)?;
        while next_pass <= passes && visits >= u64::from(next_pass) * n {
            eval_hook(next_pass, model);
            next_pass += 1;
        }
    }
    Ok(())
}
