//! Error decomposition.
//!
//! Localization error `1 - iou_loc` splits over unmatched targets:
//!
//! * S2M: unmatched GT that had a candidate prediction (lost the competition);
//! * PCP: unmatched GT with no candidate at all;
//! * M2S: unmatched prediction that had a candidate GT;
//! * ITF: unmatched prediction with no candidate GT.
//!
//! Segmentation error `1 - iou_seg` splits the non-overlapping pixels of each
//! matched pair `(g, p)` over the pair union:
//!
//! * MRG: pixels of `p` outside `g` but inside some other GT target;
//! * ITF: pixels of `p` outside every GT target;
//! * PCP: pixels of `g` not covered by `p`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matching::MatchResult;
use crate::region::TargetSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct LocCounts {
    pub s2m: u64,
    pub m2s: u64,
    pub itf: u64,
    pub pcp: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocErrors {
    pub counts: LocCounts,
    /// `tp + fp + fn` target count.
    pub denominator: u64,
    pub e_s2m: f64,
    pub e_m2s: f64,
    pub e_itf: f64,
    pub e_pcp: f64,
}

impl LocErrors {
    pub fn from_counts(counts: LocCounts, denominator: u64) -> Self {
        let frac = |n: u64| {
            if denominator == 0 {
                0.0
            } else {
                n as f64 / denominator as f64
            }
        };
        Self {
            counts,
            denominator,
            e_s2m: frac(counts.s2m),
            e_m2s: frac(counts.m2s),
            e_itf: frac(counts.itf),
            e_pcp: frac(counts.pcp),
        }
    }

    pub fn total(&self) -> f64 {
        self.e_s2m + self.e_m2s + self.e_itf + self.e_pcp
    }

    pub fn unmatched_gt(&self) -> u64 {
        self.counts.s2m + self.counts.pcp
    }

    pub fn unmatched_pred(&self) -> u64 {
        self.counts.m2s + self.counts.itf
    }
}

pub fn decompose_localization(matching: &MatchResult, gt: &TargetSet, pred: &TargetSet) -> LocErrors {
    debug_assert_eq!(matching.pairs.len() + matching.unmatched_gt.len(), gt.len());
    debug_assert_eq!(matching.pairs.len() + matching.unmatched_pred.len(), pred.len());
    let mut counts = LocCounts::default();
    for &g in &matching.unmatched_gt {
        if matching.gt_has_candidate(g) {
            counts.s2m += 1;
        } else {
            counts.pcp += 1;
        }
    }
    for &p in &matching.unmatched_pred {
        if matching.pred_has_candidate(p) {
            counts.m2s += 1;
        } else {
            counts.itf += 1;
        }
    }
    let denominator =
        (matching.pairs.len() + matching.unmatched_gt.len() + matching.unmatched_pred.len()) as u64;
    LocErrors::from_counts(counts, denominator)
}

/// Pixel breakdown of one matched pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSegError {
    pub gt_id: usize,
    pub pred_id: usize,
    /// `|g ∪ p|`.
    pub union: u64,
    pub mrg_px: u64,
    pub itf_px: u64,
    pub pcp_px: u64,
    pub mrg: f64,
    pub itf: f64,
    pub pcp: f64,
}

impl PairSegError {
    pub fn from_counts(gt_id: usize, pred_id: usize, union: u64, mrg_px: u64, itf_px: u64, pcp_px: u64) -> Self {
        let u = union as f64;
        Self {
            gt_id,
            pred_id,
            union,
            mrg_px,
            itf_px,
            pcp_px,
            mrg: mrg_px as f64 / u,
            itf: itf_px as f64 / u,
            pcp: pcp_px as f64 / u,
        }
    }

    pub fn intersection(&self) -> u64 {
        self.union - self.mrg_px - self.itf_px - self.pcp_px
    }

    pub fn iou(&self) -> f64 {
        self.intersection() as f64 / self.union as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SegErrors {
    pub per_pair: Vec<PairSegError>,
    /// Unmatched target counts; only consulted when there are no pairs.
    pub unmatched_gt: u64,
    pub unmatched_pred: u64,
    pub e_mrg: f64,
    pub e_itf: f64,
    pub e_pcp: f64,
}

impl SegErrors {
    /// Averages per-pair fractions over the pair count.
    ///
    /// With no pairs but some targets, segmentation IoU is 0 and the unit error
    /// goes to PCP when GT targets were missed, else to ITF.
    pub fn from_pairs(per_pair: Vec<PairSegError>, unmatched_gt: u64, unmatched_pred: u64) -> Self {
        let (e_mrg, e_itf, e_pcp) = if per_pair.is_empty() {
            if unmatched_gt > 0 {
                (0.0, 0.0, 1.0)
            } else if unmatched_pred > 0 {
                (0.0, 1.0, 0.0)
            } else {
                (0.0, 0.0, 0.0)
            }
        } else {
            let (mut m, mut i, mut p) = (0.0, 0.0, 0.0);
            for e in &per_pair {
                m += e.mrg;
                i += e.itf;
                p += e.pcp;
            }
            let n = per_pair.len() as f64;
            (m / n, i / n, p / n)
        };
        Self {
            per_pair,
            unmatched_gt,
            unmatched_pred,
            e_mrg,
            e_itf,
            e_pcp,
        }
    }

    pub fn total(&self) -> f64 {
        self.e_mrg + self.e_itf + self.e_pcp
    }
}

pub fn decompose_segmentation(matching: &MatchResult, gt: &TargetSet, pred: &TargetSet) -> SegErrors {
    let per_pair = matching
        .pairs
        .iter()
        .map(|pair| {
            let g = &gt.regions()[pair.gt_id];
            let p = &pred.regions()[pair.pred_id];
            let (mut inter, mut mrg, mut itf) = (0u64, 0u64, 0u64);
            for &(r, c) in p.pixels() {
                match gt.label_at(r, c) {
                    Some(id) if id == pair.gt_id => inter += 1,
                    Some(_) => mrg += 1,
                    None => itf += 1,
                }
            }
            let pcp = g.area() as u64 - inter;
            let union = g.area() as u64 + p.area() as u64 - inter;
            PairSegError::from_counts(pair.gt_id, pair.pred_id, union, mrg, itf, pcp)
        })
        .collect();
    SegErrors::from_pairs(
        per_pair,
        matching.unmatched_gt.len() as u64,
        matching.unmatched_pred.len() as u64,
    )
}

/// Dataset-level errors: localization by summed counts over summed
/// denominators, segmentation by averaging every pair of every sample.
pub fn aggregate_errors(samples: &[(LocErrors, SegErrors)]) -> Result<(LocErrors, SegErrors)> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut counts = LocCounts::default();
    let mut denominator = 0;
    let mut per_pair = Vec::new();
    let (mut ugt, mut upred) = (0, 0);
    for (loc, seg) in samples {
        counts.s2m += loc.counts.s2m;
        counts.m2s += loc.counts.m2s;
        counts.itf += loc.counts.itf;
        counts.pcp += loc.counts.pcp;
        denominator += loc.denominator;
        per_pair.extend_from_slice(&seg.per_pair);
        ugt += seg.unmatched_gt;
        upred += seg.unmatched_pred;
    }
    Ok((
        LocErrors::from_counts(counts, denominator),
        SegErrors::from_pairs(per_pair, ugt, upred),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::BinaryMask;
    use crate::matching::{match_opdc, MatchConfig};
    use crate::region::{extract_targets, Connectivity};
    use alloc::vec;

    fn rect_set(h: usize, w: usize, rects: &[(usize, usize, usize, usize)]) -> TargetSet {
        let mut px = Vec::new();
        for &(r0, c0, rh, cw) in rects {
            for r in r0..r0 + rh {
                for c in c0..c0 + cw {
                    px.push((r, c));
                }
            }
        }
        extract_targets(&BinaryMask::from_pixels(h, w, px).unwrap(), Connectivity::Eight)
    }

    #[test]
    fn merged_prediction_is_single_to_multi() {
        let gt = rect_set(8, 10, &[(0, 0, 3, 3), (0, 4, 3, 3)]);
        let pred = rect_set(8, 10, &[(0, 0, 3, 7)]);
        let m = match_opdc(&gt, &pred, &MatchConfig::default()).unwrap();
        let loc = decompose_localization(&m, &gt, &pred);
        assert_eq!(loc.counts, LocCounts { s2m: 1, m2s: 0, itf: 0, pcp: 0 });
        assert_eq!(loc.e_s2m, 0.5);
        let seg = decompose_segmentation(&m, &gt, &pred);
        let pair = seg.per_pair[0];
        assert_eq!((pair.union, pair.mrg_px, pair.itf_px, pair.pcp_px), (21, 9, 3, 0));
        assert_eq!((seg.e_mrg, seg.e_itf, seg.e_pcp), (9.0 / 21.0, 3.0 / 21.0, 0.0));
    }

    #[test]
    fn lone_prediction_is_interference() {
        let gt = rect_set(20, 20, &[(0, 0, 3, 3)]);
        let pred = rect_set(20, 20, &[(0, 0, 3, 3), (15, 15, 2, 2)]);
        let m = match_opdc(&gt, &pred, &MatchConfig::default()).unwrap();
        let loc = decompose_localization(&m, &gt, &pred);
        assert_eq!(loc.counts.itf, 1);
        assert_eq!(loc.e_itf, 1.0 / 2.0);
    }

    #[test]
    fn unreachable_gt_is_perception_error() {
        let gt = rect_set(20, 20, &[(0, 0, 3, 3)]);
        let pred = rect_set(20, 20, &[(15, 15, 2, 2)]);
        let m = match_opdc(&gt, &pred, &MatchConfig::default()).unwrap();
        let loc = decompose_localization(&m, &gt, &pred);
        assert_eq!(loc.counts, LocCounts { s2m: 0, m2s: 0, itf: 1, pcp: 1 });
        assert_eq!(loc.total(), 1.0);
        let seg = decompose_segmentation(&m, &gt, &pred);
        assert_eq!((seg.e_mrg, seg.e_itf, seg.e_pcp), (0.0, 0.0, 1.0));
    }

    #[test]
    fn prediction_inside_gt_is_pure_perception() {
        let gt = rect_set(10, 10, &[(0, 0, 4, 4)]);
        let pred = rect_set(10, 10, &[(0, 0, 2, 4)]);
        let m = match_opdc(&gt, &pred, &MatchConfig::default()).unwrap();
        let seg = decompose_segmentation(&m, &gt, &pred);
        assert_eq!((seg.e_mrg, seg.e_itf, seg.e_pcp), (0.0, 0.0, 0.5));
    }

    #[test]
    fn exact_match_has_no_errors() {
        let gt = rect_set(10, 10, &[(0, 0, 2, 2), (5, 5, 3, 3)]);
        let m = match_opdc(&gt, &gt, &MatchConfig::default()).unwrap();
        let loc = decompose_localization(&m, &gt, &gt);
        let seg = decompose_segmentation(&m, &gt, &gt);
        assert_eq!(loc.total(), 0.0);
        assert_eq!(seg.total(), 0.0);
    }

    #[test]
    fn aggregation_sums_counts() {
        let a = LocErrors::from_counts(LocCounts { s2m: 1, ..Default::default() }, 2);
        let b = LocErrors::from_counts(LocCounts::default(), 2);
        let s = SegErrors::from_pairs(vec![], 0, 0);
        let (loc, _) = aggregate_errors(&[(a, s.clone()), (b, s.clone())]).unwrap();
        assert_eq!(loc.e_s2m, 0.25);
        let (one, seg) = aggregate_errors(&[(a, s.clone())]).unwrap();
        assert_eq!(one, a);
        assert_eq!(seg, s);
        assert!(aggregate_errors(&[]).is_err());
    }

    #[test]
    fn zero_denominator_is_zero_error() {
        let e = LocErrors::from_counts(LocCounts::default(), 0);
        assert_eq!(e.total(), 0.0);
    }
}
