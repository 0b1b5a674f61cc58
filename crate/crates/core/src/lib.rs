//! Allocation-only evaluation core for small-target segmentation masks.
//!
//! Pixel metrics, connected-component targets, two-phase target matching,
//! hierarchical IoU with its error decomposition, and seeded stress-test
//! synthesis. Everything here is pure and deterministic; file formats and the
//! command line live in the `hiou-eval` crate.

#![no_std]

extern crate alloc;

pub mod assignment;
pub mod decompose;
pub mod error;
pub mod mask;
pub mod matching;
pub mod metrics;
pub mod morphology;
pub mod pipeline;
pub mod region;
pub mod rng;
pub mod stats;
pub mod synth;

pub use assignment::{solve_assignment, CostMatrix};
pub use decompose::{aggregate_errors, decompose_localization, decompose_segmentation, LocErrors, SegErrors};
pub use error::{Error, Result};
pub use mask::{binarize, BinaryMask, GrayImage, ScoreMask};
pub use matching::{match_opdc, match_targets, MatchConfig, MatchResult, MatchedPair, Strategy};
pub use metrics::{hierarchical_iou, pixel_confusion, MetricReport, PixelConfusion, TargetTallies};
pub use pipeline::{aggregate, evaluate_pair, EvalConfig, SampleEvaluation};
pub use region::{extract_targets, Connectivity, TargetRegion, TargetSet};

/// Toolkit version stamped into reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
