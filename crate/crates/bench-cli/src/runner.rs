//! Experiment execution: dataset loading, single runs, and grid sweeps.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use gsa_core::baselines::{adadelta_train, scsg_train, sgd_train, AdadeltaState, BaselineError};
use gsa_core::data::{
    load_libsvm_pair, load_libsvm_path, split_train_test, DataError, Dataset, ParseOptions, Task,
};
use gsa_core::gsa::{gsa_train, GsaError, StepTrace};
use gsa_core::metrics::{evaluate, MetricsError};
use gsa_core::models::{LinearModel, ModelError, ModelKind};

use crate::config::{DataSource, GridConfig, OptimizerConfig, RunConfig, TestSpec};
use crate::fetch::{fetch_dataset, FetchError};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Fetch(#[from] FetchError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Gsa(#[from] GsaError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("registry dataset {0} has no official test split; use test_fraction")]
    NoOfficialTest(String),
}

/// One evaluation row, as serialized to the CSV report.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub dataset: String,
    pub optimizer: String,
    pub hyperparams: String,
    pub seed: u64,
    pub pass: u32,
    pub loss: f64,
    pub precision: Option<f64>,
    pub auc: Option<f64>,
    pub elapsed_ms: u64,
    pub diverged: bool,
}

#[derive(Debug, Clone)]
pub struct LoadedData {
    pub name: String,
    pub train: Dataset,
    pub test: Dataset,
}

/// Resolves and loads the configured dataset, applying the official-test,
/// explicit-path, or seeded-split protocol.
pub fn load_data(cfg: &RunConfig, cache: &Path, offline: bool) -> Result<LoadedData, RunError> {
    let task = if cfg.model == ModelKind::Linear { Task::Regression } else { Task::Classification };
    let opts = ParseOptions { add_bias: cfg.add_bias, task };
    let name = cfg.dataset.name();

    let (train_path, official_test) = match &cfg.dataset {
        DataSource::Registry(reg_name) => {
            let resolved = fetch_dataset(reg_name, cache, offline)?;
            (resolved.train, resolved.test)
        }
        DataSource::Path(path) => (path.clone(), None),
    };

    let (train, test) = match &cfg.test {
        TestSpec::Official => {
            let test_path = official_test.ok_or_else(|| RunError::NoOfficialTest(name.clone()))?;
            load_libsvm_pair(&train_path, &test_path, &opts)?
        }
        TestSpec::Path(test_path) => load_libsvm_pair(&train_path, test_path, &opts)?,
        TestSpec::Split { fraction } => {
            let full = load_libsvm_path(&train_path, &opts)?;
            split_train_test(&full, *fraction, cfg.seed)?
        }
    };
    Ok(LoadedData { name, train, test })
}

/// Everything one training run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub records: Vec<MetricsRecord>,
    /// Step-size trace; present for GSA runs only.
    pub trace: Option<StepTrace>,
    pub model: LinearModel,
}

/// Trains per the configuration and evaluates on the test set at each
/// requested pass.
pub fn run_with_data(cfg: &RunConfig, data: &LoadedData) -> Result<RunOutput, RunError> {
    let mut model = LinearModel::zeros(cfg.model, data.train.n_features, data.train.n_classes)?;
    let mut records = Vec::with_capacity(cfg.eval_passes.len());

    let optimizer_name = cfg.optimizer.name().to_string();
    let hyperparams = cfg.optimizer.hyperparams_label();
    let started = Instant::now();
    let mut eval_overhead_ms: u64 = 0;

    // Shared per-pass hook: evaluates at requested passes, charging only
    // training time (not evaluation time) to elapsed_ms.
    let hook = |pass: u32, model: &LinearModel| {
        if !cfg.eval_passes.contains(&pass) {
            return;
        }
        let train_elapsed_ms =
            (started.elapsed().as_millis() as u64).saturating_sub(eval_overhead_ms);
        let eval_started = Instant::now();
        let eval = evaluate(model, &data.test).expect("non-empty test set");
        eval_overhead_ms += eval_started.elapsed().as_millis() as u64;
        records.push(MetricsRecord {
            dataset: data.name.clone(),
            optimizer: optimizer_name.clone(),
            hyperparams: hyperparams.clone(),
            seed: cfg.seed,
            pass,
            loss: eval.loss,
            precision: eval.precision,
            auc: eval.auc,
            elapsed_ms: train_elapsed_ms,
            diverged: eval.diverged,
        });
    };

    let trace = match &cfg.optimizer {
        OptimizerConfig::Gsa(gsa_cfg) => {
            let (_, trace) =
                gsa_train(&mut model, &data.train, cfg.passes, cfg.seed, gsa_cfg, hook)?;
            Some(trace)
        }
        OptimizerConfig::Sgd(sgd_cfg) => {
            sgd_train(&mut model, &data.train, cfg.passes, cfg.seed, sgd_cfg, hook)?;
            None
        }
        OptimizerConfig::Adadelta { eps } => {
            let mut state = AdadeltaState::new(*eps, &model)?;
            adadelta_train(&mut model, &data.train, cfg.passes, cfg.seed, &mut state, hook)?;
            None
        }
        OptimizerConfig::Scsg(scsg_cfg) => {
            scsg_train(&mut model, &data.train, cfg.passes, cfg.seed, scsg_cfg, hook)?;
            None
        }
    };
    Ok(RunOutput { records, trace, model })
}

/// Loads data and runs one experiment end to end.
pub fn run_experiment(
    cfg: &RunConfig,
    cache: &Path,
    offline: bool,
) -> Result<(RunOutput, LoadedData), RunError> {
    let data = load_data(cfg, cache, offline)?;
    let output = run_with_data(cfg, &data)?;
    Ok((output, data))
}

/// One grid cell's aggregated results.
#[derive(Debug, Clone)]
pub struct GridReport {
    pub dataset: String,
    pub eval_passes: Vec<u32>,
    /// All per-run records, cell-major then repeat-major: deterministic.
    pub records: Vec<MetricsRecord>,
}

/// Runs every `(cell, repeat)` pair on a bounded worker pool. Repeat `r`
/// uses seed `base.seed + r`, and for split datasets that reshuffles the
/// split as well. Cells that fail (e.g. divergence guards) surface as
/// diverged records rather than aborting the grid.
pub fn run_grid(
    grid: &GridConfig,
    cache: &Path,
    offline: bool,
    jobs: usize,
) -> Result<GridReport, RunError> {
    // Data per repeat seed, loaded up front and shared read-only.
    let mut repeat_data = Vec::with_capacity(grid.repeats as usize);
    for r in 0..grid.repeats {
        let mut cfg = grid.base.clone();
        cfg.seed = grid.base.seed + u64::from(r);
        repeat_data.push(load_data(&cfg, cache, offline)?);
    }

    let tasks: Vec<(usize, u32)> =
        (0..grid.cells.len()).flat_map(|cell| (0..grid.repeats).map(move |r| (cell, r))).collect();

    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().expect("thread pool");
    let results: Vec<Vec<MetricsRecord>> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(cell, r)| {
                let mut cfg = grid.base.clone();
                cfg.optimizer = grid.cells[cell].clone();
                cfg.seed = grid.base.seed + u64::from(r);
                let data = &repeat_data[r as usize];
                match run_with_data(&cfg, data) {
                    Ok(output) => output.records,
                    Err(err) => {
                        eprintln!(
                            "grid cell {}[{}] seed {} failed: {err}",
                            cfg.optimizer.name(),
                            cfg.optimizer.hyperparams_label(),
                            cfg.seed
                        );
                        cfg.eval_passes
                            .iter()
                            .map(|&pass| MetricsRecord {
                                dataset: data.name.clone(),
                                optimizer: cfg.optimizer.name().to_string(),
                                hyperparams: cfg.optimizer.hyperparams_label(),
                                seed: cfg.seed,
                                pass,
                                loss: f64::NAN,
                                precision: None,
                                auc: None,
                                elapsed_ms: 0,
                                diverged: true,
                            })
                            .collect()
                    }
                }
            })
            .collect()
    });

    Ok(GridReport {
        dataset: grid.base.dataset.name(),
        eval_passes: grid.base.eval_passes.clone(),
        records: results.into_iter().flatten().collect(),
    })
}
