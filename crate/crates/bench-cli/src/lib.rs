//! Benchmark harness around `gsa-core`: dataset registry and fetching,
//! configuration-driven experiment runs and grids, model persistence, and
//! CSV/markdown reports.

pub mod config;
pub mod fetch;
pub mod model_io;
pub mod registry;
pub mod report;
pub mod runner;
