//! One-to-one matching of ground-truth targets to predicted targets.
//!
//! Two strategies are provided. [`match_distance_only`] is the legacy
//! centroid-distance protocol. [`match_opdc`] prioritizes overlap: an
//! assignment over the full centroid-distance matrix is kept only where the
//! pair IoU reaches the overlap threshold, then the leftover targets are
//! re-assigned using only pairs closer than the distance threshold.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::assignment::{solve_assignment, CostMatrix, DEFAULT_SENTINEL};
use crate::error::{Error, Result};
use crate::region::{centroid_distance, TargetSet};

pub const DEFAULT_OVERLAP_THRESHOLD: f64 = 0.5;
pub const DEFAULT_DISTANCE_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    /// Overlap priority with distance compensation.
    Opdc,
    /// Centroid distance only.
    DistanceOnly,
}

impl Strategy {
    /// Short name used in reports and on the command line.
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Opdc => "opdc",
            Strategy::DistanceOnly => "distance",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "opdc" => Some(Strategy::Opdc),
            "distance" | "distance_only" => Some(Strategy::DistanceOnly),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchConfig {
    /// Pair IoU at or above this is an overlap match.
    pub overlap_threshold: f64,
    /// Centroid distance strictly below this is a distance match.
    pub distance_threshold: f64,
    pub strategy: Strategy,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            overlap_threshold: DEFAULT_OVERLAP_THRESHOLD,
            distance_threshold: DEFAULT_DISTANCE_THRESHOLD,
            strategy: Strategy::Opdc,
        }
    }
}

impl MatchConfig {
    pub fn with_strategy(strategy: Strategy) -> Self {
        Self {
            strategy,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.overlap_threshold > 0.0 && self.overlap_threshold <= 1.0) {
            return Err(Error::InvalidConfig("overlap threshold must lie in (0, 1]"));
        }
        if !self.distance_threshold.is_finite() || self.distance_threshold <= 0.0 {
            return Err(Error::InvalidConfig("distance threshold must be positive"));
        }
        Ok(())
    }
}

/// Which stage of the matcher produced a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Overlap,
    Compensation,
    /// Produced by [`match_distance_only`].
    Distance,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Overlap => "overlap",
            Phase::Compensation => "compensation",
            Phase::Distance => "distance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedPair {
    pub gt_id: usize,
    pub pred_id: usize,
    pub intersection: usize,
    pub union: usize,
    pub iou: f64,
    pub distance: f64,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// Sorted by `gt_id`.
    pub pairs: Vec<MatchedPair>,
    pub unmatched_gt: Vec<usize>,
    pub unmatched_pred: Vec<usize>,
    /// Every `(gt_id, pred_id)` satisfying at least one matching criterion of the strategy.
    pub candidates: BTreeSet<(usize, usize)>,
}

impl MatchResult {
    pub fn pred_for_gt(&self, gt_id: usize) -> Option<usize> {
        self.pairs.iter().find(|p| p.gt_id == gt_id).map(|p| p.pred_id)
    }

    pub fn gt_has_candidate(&self, gt_id: usize) -> bool {
        self.candidates.range((gt_id, 0)..=(gt_id, usize::MAX)).next().is_some()
    }

    pub fn pred_has_candidate(&self, pred_id: usize) -> bool {
        self.candidates.iter().any(|&(_, p)| p == pred_id)
    }
}

/// Pairwise overlap and distance tables shared by both strategies.
struct PairTable {
    cols: usize,
    inter: Vec<usize>,
    union: Vec<usize>,
    dist: Vec<f64>,
}

impl PairTable {
    fn build(gt: &TargetSet, pred: &TargetSet) -> Result<Self> {
        let inter = gt.intersection_matrix(pred)?;
        let cols = pred.len();
        let mut union = Vec::with_capacity(inter.len());
        let mut dist = Vec::with_capacity(inter.len());
        for g in gt.regions() {
            for p in pred.regions() {
                union.push(g.area() + p.area() - inter[g.id() * cols + p.id()]);
                dist.push(centroid_distance(g, p));
            }
        }
        Ok(Self {
            cols,
            inter,
            union,
            dist,
        })
    }

    fn idx(&self, g: usize, p: usize) -> usize {
        g * self.cols + p
    }

    fn iou(&self, g: usize, p: usize) -> f64 {
        let i = self.idx(g, p);
        self.inter[i] as f64 / self.union[i] as f64
    }

    fn distance(&self, g: usize, p: usize) -> f64 {
        self.dist[self.idx(g, p)]
    }

    fn pair(&self, g: usize, p: usize, phase: Phase) -> MatchedPair {
        let i = self.idx(g, p);
        MatchedPair {
            gt_id: g,
            pred_id: p,
            intersection: self.inter[i],
            union: self.union[i],
            iou: self.iou(g, p),
            distance: self.dist[i],
            phase,
        }
    }
}

fn finish(
    mut pairs: Vec<MatchedPair>,
    gt_len: usize,
    pred_len: usize,
    candidates: BTreeSet<(usize, usize)>,
) -> MatchResult {
    pairs.sort_by_key(|p| p.gt_id);
    let mut gt_used = alloc::vec![false; gt_len];
    let mut pred_used = alloc::vec![false; pred_len];
    for p in &pairs {
        gt_used[p.gt_id] = true;
        pred_used[p.pred_id] = true;
    }
    MatchResult {
        pairs,
        unmatched_gt: (0..gt_len).filter(|&g| !gt_used[g]).collect(),
        unmatched_pred: (0..pred_len).filter(|&p| !pred_used[p]).collect(),
        candidates,
    }
}

/// Assignment over `rows × cols`, keeping only entries `keep` accepts.
fn assign_filtered(
    rows: &[usize],
    cols: &[usize],
    cost: impl Fn(usize, usize) -> f64,
    keep: impl Fn(usize, usize) -> bool,
) -> Vec<(usize, usize)> {
    let matrix = CostMatrix::from_fn(rows.len(), cols.len(), |r, c| cost(rows[r], cols[c]))
        .expect("distances are finite and nonnegative");
    solve_assignment(&matrix)
        .into_iter()
        .map(|(r, c)| (rows[r], cols[c]))
        .filter(|&(g, p)| keep(g, p))
        .collect()
}

fn check_shapes(gt: &TargetSet, pred: &TargetSet, cfg: &MatchConfig) -> Result<()> {
    cfg.validate()?;
    if gt.source_shape() != pred.source_shape() {
        return Err(Error::ShapeMismatch {
            expected: gt.source_shape(),
            found: pred.source_shape(),
        });
    }
    Ok(())
}

/// Overlap priority with distance compensation.
pub fn match_opdc(gt: &TargetSet, pred: &TargetSet, cfg: &MatchConfig) -> Result<MatchResult> {
    check_shapes(gt, pred, cfg)?;
    let table = PairTable::build(gt, pred)?;
    let (m, n) = (gt.len(), pred.len());
    let overlaps = |g: usize, p: usize| table.iou(g, p) >= cfg.overlap_threshold;
    let near = |g: usize, p: usize| table.distance(g, p) < cfg.distance_threshold;

    let all_gt: Vec<usize> = (0..m).collect();
    let all_pred: Vec<usize> = (0..n).collect();
    let mut pairs: Vec<MatchedPair> =
        assign_filtered(&all_gt, &all_pred, |g, p| table.distance(g, p), overlaps)
            .into_iter()
            .map(|(g, p)| table.pair(g, p, Phase::Overlap))
            .collect();

    let mut gt_used = alloc::vec![false; m];
    let mut pred_used = alloc::vec![false; n];
    for p in &pairs {
        gt_used[p.gt_id] = true;
        pred_used[p.pred_id] = true;
    }
    let rest_gt: Vec<usize> = (0..m).filter(|&g| !gt_used[g]).collect();
    let rest_pred: Vec<usize> = (0..n).filter(|&p| !pred_used[p]).collect();
    let compensation = assign_filtered(
        &rest_gt,
        &rest_pred,
        |g, p| {
            if near(g, p) {
                table.distance(g, p)
            } else {
                DEFAULT_SENTINEL
            }
        },
        near,
    );
    pairs.extend(
        compensation
            .into_iter()
            .map(|(g, p)| table.pair(g, p, Phase::Compensation)),
    );

    let candidates = (0..m)
        .flat_map(|g| (0..n).map(move |p| (g, p)))
        .filter(|&(g, p)| overlaps(g, p) || near(g, p))
        .collect();
    Ok(finish(pairs, m, n, candidates))
}

/// Legacy protocol: one assignment over distances below the threshold.
pub fn match_distance_only(
    gt: &TargetSet,
    pred: &TargetSet,
    cfg: &MatchConfig,
) -> Result<MatchResult> {
    check_shapes(gt, pred, cfg)?;
    let table = PairTable::build(gt, pred)?;
    let (m, n) = (gt.len(), pred.len());
    let near = |g: usize, p: usize| table.distance(g, p) < cfg.distance_threshold;
    let all_gt: Vec<usize> = (0..m).collect();
    let all_pred: Vec<usize> = (0..n).collect();
    let pairs = assign_filtered(
        &all_gt,
        &all_pred,
        |g, p| {
            if near(g, p) {
                table.distance(g, p)
            } else {
                DEFAULT_SENTINEL
            }
        },
        near,
    )
    .into_iter()
    .map(|(g, p)| table.pair(g, p, Phase::Distance))
    .collect();
    let candidates = (0..m)
        .flat_map(|g| (0..n).map(move |p| (g, p)))
        .filter(|&(g, p)| near(g, p))
        .collect();
    Ok(finish(pairs, m, n, candidates))
}

/// Dispatches on `cfg.strategy`.
pub fn match_targets(gt: &TargetSet, pred: &TargetSet, cfg: &MatchConfig) -> Result<MatchResult> {
    match cfg.strategy {
        Strategy::Opdc => match_opdc(gt, pred, cfg),
        Strategy::DistanceOnly => match_distance_only(gt, pred, cfg),
    }
}
