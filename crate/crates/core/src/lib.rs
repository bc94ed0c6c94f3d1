//! Parameter-free stochastic optimization for sparse generalized linear
//! models: the greedy-step-averaging optimizer plus the SGD, Adadelta, and
//! SCSG baselines it is benchmarked against, with LIBSVM ingestion and
//! classification metrics.

pub mod baselines;
pub mod data;
pub mod gsa;
pub mod linalg;
pub mod metrics;
pub mod models;
pub mod rng;
pub mod synth;

pub use data::{Dataset, Sample};
pub use gsa::{GsaConfig, GsaState};
pub use linalg::{DenseVec, SparseVec};
pub use models::{GradCoeffs, LinearModel, ModelKind};
