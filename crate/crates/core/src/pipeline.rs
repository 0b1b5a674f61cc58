//! Per-sample evaluation and the ordered dataset fold.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::decompose::{aggregate_errors, decompose_localization, decompose_segmentation, LocErrors, SegErrors};
use crate::error::{Error, Result};
use crate::mask::{binarize, BinaryMask, ScoreMask, DEFAULT_THRESHOLD};
use crate::matching::{match_targets, MatchConfig, MatchedPair, Strategy};
use crate::metrics::{pixel_confusion, target_tallies, MetricReport, PixelConfusion, TargetTallies};
use crate::region::{extract_targets, Connectivity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResizePolicy {
    #[default]
    Forbid,
    NearestToGt,
}

impl ResizePolicy {
    pub fn name(self) -> &'static str {
        match self {
            ResizePolicy::Forbid => "forbid",
            ResizePolicy::NearestToGt => "nearest",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "forbid" => Some(ResizePolicy::Forbid),
            "nearest" | "nearest_to_gt" => Some(ResizePolicy::NearestToGt),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub threshold: f64,
    pub connectivity: Connectivity,
    pub matchers: Vec<MatchConfig>,
    pub resize: ResizePolicy,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            connectivity: Connectivity::default(),
            matchers: vec![
                MatchConfig::with_strategy(Strategy::Opdc),
                MatchConfig::with_strategy(Strategy::DistanceOnly),
            ],
            resize: ResizePolicy::Forbid,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidConfig("threshold must lie in [0, 1]"));
        }
        if self.matchers.is_empty() {
            return Err(Error::InvalidConfig("at least one matcher is required"));
        }
        for m in &self.matchers {
            m.validate()?;
        }
        Ok(())
    }
}

/// Nearest-neighbour resample: output pixel `(r, c)` reads source `(r * sh / h, c * sw / w)`.
pub fn resize_nearest(scores: &ScoreMask, height: usize, width: usize) -> Result<ScoreMask> {
    let (sh, sw) = scores.shape();
    let mut out = Vec::with_capacity(height * width);
    for r in 0..height {
        for c in 0..width {
            out.push(scores.get(r * sh / height, c * sw / width));
        }
    }
    ScoreMask::new(height, width, out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatcherEvaluation {
    pub strategy: Strategy,
    pub pairs: Vec<MatchedPair>,
    pub tallies: TargetTallies,
    pub loc: LocErrors,
    pub seg: SegErrors,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleEvaluation {
    pub id: String,
    pub shape: (usize, usize),
    pub confusion: PixelConfusion,
    pub matchers: Vec<MatcherEvaluation>,
}

/// Binarizes, labels both masks and scores every configured matcher.
pub fn evaluate_pair(id: &str, pred: &ScoreMask, gt: &BinaryMask, cfg: &EvalConfig) -> Result<SampleEvaluation> {
    cfg.validate()?;
    let resized;
    let pred = if pred.shape() == gt.shape() {
        pred
    } else if cfg.resize == ResizePolicy::NearestToGt {
        resized = resize_nearest(pred, gt.height(), gt.width())?;
        &resized
    } else {
        return Err(Error::ShapeMismatch {
            expected: gt.shape(),
            found: pred.shape(),
        });
    };
    let pred_bin = binarize(pred, cfg.threshold)?;
    evaluate_binary(id, &pred_bin, gt, cfg)
}

/// [`evaluate_pair`] on an already binarized prediction of the GT shape.
pub fn evaluate_binary(id: &str, pred: &BinaryMask, gt: &BinaryMask, cfg: &EvalConfig) -> Result<SampleEvaluation> {
    let confusion = pixel_confusion(pred, gt)?;
    let gt_set = extract_targets(gt, cfg.connectivity);
    let pred_set = extract_targets(pred, cfg.connectivity);
    let matchers = cfg
        .matchers
        .iter()
        .map(|m| {
            let result = match_targets(&gt_set, &pred_set, m)?;
            Ok(MatcherEvaluation {
                strategy: m.strategy,
                tallies: target_tallies(&result, &gt_set, &pred_set),
                loc: decompose_localization(&result, &gt_set, &pred_set),
                seg: decompose_segmentation(&result, &gt_set, &pred_set),
                pairs: result.pairs,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleEvaluation {
        id: String::from(id),
        shape: gt.shape(),
        confusion,
        matchers,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatcherSummary {
    pub strategy: Strategy,
    pub metrics: MetricReport,
    pub loc: LocErrors,
    pub seg: SegErrors,
}

/// Folds samples in the given order into one summary per matcher.
///
/// Every sample must carry the same matcher list.
pub fn aggregate(samples: &[SampleEvaluation]) -> Result<Vec<MatcherSummary>> {
    let first = samples.first().ok_or(Error::EmptyInput)?;
    let strategies: Vec<Strategy> = first.matchers.iter().map(|m| m.strategy).collect();
    if samples
        .iter()
        .any(|s| s.matchers.iter().map(|m| m.strategy).ne(strategies.iter().copied()))
    {
        return Err(Error::InvalidConfig("samples disagree on matcher list"));
    }
    let confusions: Vec<PixelConfusion> = samples.iter().map(|s| s.confusion).collect();
    strategies
        .iter()
        .enumerate()
        .map(|(k, &strategy)| {
            let tallies: Vec<TargetTallies> = samples.iter().map(|s| s.matchers[k].tallies.clone()).collect();
            let errors: Vec<(LocErrors, SegErrors)> = samples
                .iter()
                .map(|s| (s.matchers[k].loc, s.matchers[k].seg.clone()))
                .collect();
            let (loc, seg) = aggregate_errors(&errors)?;
            Ok(MatcherSummary {
                strategy,
                metrics: MetricReport::compute(&confusions, &tallies)?,
                loc,
                seg,
            })
        })
        .collect()
}
