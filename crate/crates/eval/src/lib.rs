//! Directory-level evaluation on top of `hiou-core`: image IO, stem pairing,
//! parallel sample evaluation, json/csv/markdown reports and perturbation
//! manifests. The `eval` binary wraps these for the command line.

pub mod dataset;
pub mod error;
pub mod io;
pub mod manifest;
pub mod report;

pub use dataset::{dataset_stats, evaluate_dataset, pair_samples, DatasetReport, DatasetSpec};
pub use error::{EvalError, Result};
pub use report::{emit_report, samples_from_json, recompute_from_json, Format};
