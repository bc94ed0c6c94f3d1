//! Run and grid configuration: a declarative TOML file per run, with CLI
//! flag overrides layered on top.
//!
//! ```toml
//! # one experiment
//! dataset = "w1a"          # registry name or a path to a LIBSVM file
//! model = "logistic"       # logistic | softmax | linear (registry default if omitted)
//! optimizer = "sgd"        # gsa | sgd | adadelta | scsg
//! passes = 5
//! seed = 42
//! add_bias = true
//! output_dir = "runs/w1a-sgd"
//! # eval_passes = [1, 2, 5]     # default: every pass
//! # test_path = "data/w1a.t"    # explicit test file
//! # test_fraction = 0.2         # seeded split when no official/explicit test
//!
//! [hyperparams]            # exactly the knobs the optimizer requires
//! rate = 0.01
//! ```
//!
//! GSA takes no required hyperparameters; `rate`, `eps`, or `batch_size`
//! under a GSA run is rejected rather than silently ignored.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use gsa_core::baselines::{ScsgConfig, SgdConfig};
use gsa_core::gsa::GsaConfig;
use gsa_core::models::ModelKind;

use crate::registry::lookup;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot parse config {path}: {source}")]
    Toml { path: String, source: toml::de::Error },
    #[error("unknown optimizer {0:?} (expected gsa | sgd | adadelta | scsg)")]
    UnknownOptimizer(String),
    #[error("unknown model {0:?} (expected logistic | softmax | linear)")]
    UnknownModel(String),
    #[error("{optimizer} requires hyperparameter {name}")]
    MissingHyper { optimizer: &'static str, name: &'static str },
    #[error("{optimizer} does not take hyperparameter {name}")]
    ForeignHyper { optimizer: &'static str, name: &'static str },
    #[error("invalid hyperparameter: {0}")]
    BadHyper(String),
    #[error("passes must be at least 1")]
    ZeroPasses,
    #[error("eval pass {0} is outside 1..=passes")]
    BadEvalPass(u32),
    #[error("dataset is required")]
    MissingDataset,
    #[error("model is required for path datasets")]
    MissingModel,
    #[error("test_path and test_fraction are mutually exclusive")]
    ConflictingTest,
    #[error("grid must contain at least one cell")]
    EmptyGrid,
    #[error("repeats must be at least 1")]
    ZeroRepeats,
}

/// Raw per-run TOML schema (also the shape of one grid cell's overrides).
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub dataset: Option<String>,
    pub model: Option<String>,
    pub optimizer: Option<String>,
    pub passes: Option<u32>,
    pub seed: Option<u64>,
    pub add_bias: Option<bool>,
    pub output_dir: Option<PathBuf>,
    pub eval_passes: Option<Vec<u32>>,
    pub test_path: Option<PathBuf>,
    pub test_fraction: Option<f64>,
    #[serde(default)]
    pub hyperparams: Hyperparams,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperparams {
    pub rate: Option<f64>,
    pub eps: Option<f64>,
    pub batch_size: Option<usize>,
    pub p_hat: Option<f64>,
    pub clamp_negative: Option<bool>,
    pub eta_max: Option<f64>,
}

impl RunFile {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
        toml::from_str(&text)
            .map_err(|source| ConfigError::Toml { path: path.display().to_string(), source })
    }

    /// Layers `other`'s set fields over `self`.
    pub fn overlay(mut self, other: RunFile) -> RunFile {
        macro_rules! take {
            ($($field:ident),*) => { $( if other.$field.is_some() { self.$field = other.$field; } )* };
        }
        take!(
            dataset,
            model,
            optimizer,
            passes,
            seed,
            add_bias,
            output_dir,
            eval_passes,
            test_path,
            test_fraction
        );
        macro_rules! take_hyper {
            ($($field:ident),*) => { $( if other.hyperparams.$field.is_some() { self.hyperparams.$field = other.hyperparams.$field; } )* };
        }
        take_hyper!(rate, eps, batch_size, p_hat, clamp_negative, eta_max);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// Built-in registry name.
    Registry(&'static str),
    /// Filesystem path to a LIBSVM file.
    Path(PathBuf),
}

impl DataSource {
    pub fn name(&self) -> String {
        match self {
            DataSource::Registry(name) => (*name).to_string(),
            DataSource::Path(path) => path
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TestSpec {
    /// The registry dataset's official test file.
    Official,
    Path(PathBuf),
    Split {
        fraction: f64,
    },
}

#[derive(Debug, Clone)]
pub enum OptimizerConfig {
    Gsa(GsaConfig),
    Sgd(SgdConfig),
    Adadelta { eps: f64 },
    Scsg(ScsgConfig),
}

impl OptimizerConfig {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizerConfig::Gsa(_) => "gsa",
            OptimizerConfig::Sgd(_) => "sgd",
            OptimizerConfig::Adadelta { .. } => "adadelta",
            OptimizerConfig::Scsg(_) => "scsg",
        }
    }

    /// Hyperparameter label for reports; empty for GSA, which is the point.
    pub fn hyperparams_label(&self) -> String {
        match self {
            OptimizerConfig::Gsa(_) => String::new(),
            OptimizerConfig::Sgd(cfg) => format!("r={}", cfg.rate),
            OptimizerConfig::Adadelta { eps } => format!("eps={eps:e}"),
            OptimizerConfig::Scsg(cfg) => format!("r={};B={}", cfg.rate, cfg.batch_size),
        }
    }
}

/// Fully validated run description.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub dataset: DataSource,
    pub test: TestSpec,
    pub model: ModelKind,
    pub optimizer: OptimizerConfig,
    pub passes: u32,
    pub seed: u64,
    pub eval_passes: Vec<u32>,
    pub add_bias: bool,
    pub output_dir: PathBuf,
}

pub const DEFAULT_TEST_FRACTION: f64 = 0.2;
pub const DEFAULT_SEED: u64 = 42;

fn parse_model(name: &str) -> Result<ModelKind, ConfigError> {
    match name {
        "logistic" => Ok(ModelKind::Logistic),
        "softmax" => Ok(ModelKind::Softmax),
        "linear" => Ok(ModelKind::Linear),
        other => Err(ConfigError::UnknownModel(other.to_string())),
    }
}

fn build_optimizer(name: &str, hp: &Hyperparams) -> Result<OptimizerConfig, ConfigError> {
    let required = |opt: &'static str, name: &'static str, v: Option<f64>| {
        v.ok_or(ConfigError::MissingHyper { optimizer: opt, name })
    };
    let forbid = |opt: &'static str, name: &'static str, absent: bool| {
        if absent {
            Ok(())
        } else {
            Err(ConfigError::ForeignHyper { optimizer: opt, name })
        }
    };
    match name {
        "gsa" => {
            forbid("gsa", "rate", hp.rate.is_none())?;
            forbid("gsa", "eps", hp.eps.is_none())?;
            forbid("gsa", "batch_size", hp.batch_size.is_none())?;
            let mut cfg = GsaConfig::default();
            if let Some(p_hat) = hp.p_hat {
                cfg.p_hat = p_hat;
            }
            if let Some(clamp) = hp.clamp_negative {
                cfg.clamp_negative = clamp;
            }
            if let Some(eta_max) = hp.eta_max {
                cfg.eta_max = eta_max;
            }
            cfg.validate().map_err(|e| ConfigError::BadHyper(e.to_string()))?;
            Ok(OptimizerConfig::Gsa(cfg))
        }
        "sgd" => {
            forbid("sgd", "eps", hp.eps.is_none())?;
            forbid("sgd", "batch_size", hp.batch_size.is_none())?;
            forbid("sgd", "p_hat", hp.p_hat.is_none())?;
            let rate = required("sgd", "rate", hp.rate)?;
            Ok(OptimizerConfig::Sgd(
                SgdConfig::new(rate).map_err(|e| ConfigError::BadHyper(e.to_string()))?,
            ))
        }
        "adadelta" => {
            // Adadelta is rate-free by construction; a rate here is a config bug.
            forbid("adadelta", "rate", hp.rate.is_none())?;
            forbid("adadelta", "batch_size", hp.batch_size.is_none())?;
            forbid("adadelta", "p_hat", hp.p_hat.is_none())?;
            let eps = required("adadelta", "eps", hp.eps)?;
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(ConfigError::BadHyper(format!("eps must be positive, got {eps}")));
            }
            Ok(OptimizerConfig::Adadelta { eps })
        }
        "scsg" => {
            forbid("scsg", "eps", hp.eps.is_none())?;
            forbid("scsg", "p_hat", hp.p_hat.is_none())?;
            let rate = required("scsg", "rate", hp.rate)?;
            let batch = hp
                .batch_size
                .ok_or(ConfigError::MissingHyper { optimizer: "scsg", name: "batch_size" })?;
            Ok(OptimizerConfig::Scsg(
                ScsgConfig::new(rate, batch).map_err(|e| ConfigError::BadHyper(e.to_string()))?,
            ))
        }
        other => Err(ConfigError::UnknownOptimizer(other.to_string())),
    }
}

impl RunConfig {
    /// Validates and resolves a raw [`RunFile`] (after any overlays).
    pub fn from_file(raw: &RunFile) -> Result<Self, ConfigError> {
        let dataset_str = raw.dataset.as_deref().ok_or(ConfigError::MissingDataset)?;
        let (dataset, registry_entry) = match lookup(dataset_str) {
            Some(spec) => (DataSource::Registry(spec.name), Some(spec)),
            None => (DataSource::Path(PathBuf::from(dataset_str)), None),
        };

        let model = match (&raw.model, registry_entry) {
            (Some(name), _) => parse_model(name)?,
            (None, Some(spec)) => spec.kind.default_model(),
            (None, None) => return Err(ConfigError::MissingModel),
        };

        let optimizer_name = raw.optimizer.as_deref().unwrap_or("gsa");
        let optimizer = build_optimizer(optimizer_name, &raw.hyperparams)?;

        let passes = match raw.passes {
            Some(0) => return Err(ConfigError::ZeroPasses),
            Some(p) => p,
            None => registry_entry.map(|s| s.default_passes).unwrap_or(5),
        };

        let eval_passes = match &raw.eval_passes {
            Some(list) => {
                let mut list = list.clone();
                list.sort_unstable();
                list.dedup();
                for &p in &list {
                    if p == 0 || p > passes {
                        return Err(ConfigError::BadEvalPass(p));
                    }
                }
                list
            }
            None => (1..=passes).collect(),
        };

        let test = match (&raw.test_path, raw.test_fraction) {
            (Some(_), Some(_)) => return Err(ConfigError::ConflictingTest),
            (Some(path), None) => TestSpec::Path(path.clone()),
            (None, Some(fraction)) => TestSpec::Split { fraction },
            (None, None) => match registry_entry {
                Some(spec) if spec.test_url.is_some() => TestSpec::Official,
                _ => TestSpec::Split { fraction: DEFAULT_TEST_FRACTION },
            },
        };

        Ok(RunConfig {
            dataset,
            test,
            model,
            optimizer,
            passes,
            seed: raw.seed.unwrap_or(DEFAULT_SEED),
            eval_passes,
            add_bias: raw.add_bias.unwrap_or(true),
            output_dir: raw.output_dir.clone().unwrap_or_else(|| PathBuf::from("runs/out")),
        })
    }
}

/// Grid TOML schema: shared base plus one `[[grid]]` block per cell.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub repeats: Option<u32>,
    pub base: RunFile,
    pub grid: Vec<GridCell>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCell {
    pub optimizer: String,
    pub rate: Option<f64>,
    pub eps: Option<f64>,
    pub batch_size: Option<usize>,
    pub p_hat: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct GridConfig {
    pub base: RunConfig,
    pub cells: Vec<OptimizerConfig>,
    pub repeats: u32,
}

impl GridConfig {
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
        let file: GridFile = toml::from_str(&text)
            .map_err(|source| ConfigError::Toml { path: path.display().to_string(), source })?;
        Self::from_file(file)
    }

    pub fn from_file(file: GridFile) -> Result<Self, ConfigError> {
        if file.grid.is_empty() {
            return Err(ConfigError::EmptyGrid);
        }
        let repeats = file.repeats.unwrap_or(1);
        if repeats == 0 {
            return Err(ConfigError::ZeroRepeats);
        }
        // The base must be valid on its own; its optimizer slot is filled
        // per cell.
        let mut base_raw = file.base.clone();
        base_raw.optimizer = Some("gsa".to_string());
        base_raw.hyperparams = Hyperparams::default();
        let base = RunConfig::from_file(&base_raw)?;

        let mut cells = Vec::with_capacity(file.grid.len());
        for cell in &file.grid {
            let hp = Hyperparams {
                rate: cell.rate,
                eps: cell.eps,
                batch_size: cell.batch_size,
                p_hat: cell.p_hat,
                clamp_negative: None,
                eta_max: None,
            };
            cells.push(build_optimizer(&cell.optimizer, &hp)?);
        }
        Ok(GridConfig { base, cells, repeats })
    }
}
