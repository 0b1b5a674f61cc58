//! Pixel-level, target-level, and hierarchical metrics.
//!
//! Dataset forms are ratios of sums over samples, so every aggregate is an
//! ordered fold over per-sample tallies.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::matching::MatchResult;
use crate::region::TargetSet;

/// Value of an agreement ratio whose denominator is zero (nothing to find, nothing found).
pub const EMPTY_AGREEMENT: f64 = 1.0;

/// Scale used when reporting the false-alarm rate.
pub const FA_SCALE: f64 = 1e6;

fn ratio_or(num: f64, den: f64, empty: f64) -> f64 {
    if den == 0.0 {
        empty
    } else {
        num / den
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct PixelConfusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl PixelConfusion {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Per-sample IoU; [`EMPTY_AGREEMENT`] when neither mask has foreground.
    pub fn iou(&self) -> f64 {
        ratio_or(
            self.tp as f64,
            (self.tp + self.fp + self.fn_) as f64,
            EMPTY_AGREEMENT,
        )
    }

    /// True when neither mask has foreground.
    pub fn is_degenerate(&self) -> bool {
        self.tp + self.fp + self.fn_ == 0
    }
}

impl core::ops::Add for PixelConfusion {
    type Output = PixelConfusion;
    fn add(self, o: PixelConfusion) -> PixelConfusion {
        PixelConfusion {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            tn: self.tn + o.tn,
            fn_: self.fn_ + o.fn_,
        }
    }
}

pub fn pixel_confusion(pred: &BinaryMask, gt: &BinaryMask) -> Result<PixelConfusion> {
    if pred.shape() != gt.shape() {
        return Err(Error::ShapeMismatch {
            expected: gt.shape(),
            found: pred.shape(),
        });
    }
    let mut c = PixelConfusion::default();
    for (&p, &g) in pred.bits().iter().zip(gt.bits()) {
        match (p, g) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

fn sum_confusions(confusions: &[PixelConfusion]) -> Result<PixelConfusion> {
    if confusions.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(confusions.iter().copied().fold(PixelConfusion::default(), |a, b| a + b))
}

/// Globally pooled IoU.
pub fn iou_pix_dataset(confusions: &[PixelConfusion]) -> Result<f64> {
    Ok(sum_confusions(confusions)?.iou())
}

/// Mean of per-sample IoU.
pub fn niou_pix_dataset(confusions: &[PixelConfusion]) -> Result<f64> {
    if confusions.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let [only] = confusions {
        return Ok(only.iou());
    }
    let sum: f64 = confusions.iter().map(PixelConfusion::iou).sum();
    Ok(sum / confusions.len() as f64)
}

/// Number of samples whose per-sample IoU fell back to [`EMPTY_AGREEMENT`].
pub fn niou_degenerate_count(confusions: &[PixelConfusion]) -> usize {
    confusions.iter().filter(|c| c.is_degenerate()).count()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecisionRecall {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

pub fn f1_pix_dataset(confusions: &[PixelConfusion]) -> Result<PrecisionRecall> {
    let c = sum_confusions(confusions)?;
    let precision = ratio_or(c.tp as f64, (c.tp + c.fp) as f64, EMPTY_AGREEMENT);
    let recall = ratio_or(c.tp as f64, (c.tp + c.fn_) as f64, EMPTY_AGREEMENT);
    let f1 = ratio_or(2.0 * precision * recall, precision + recall, 0.0);
    Ok(PrecisionRecall {
        precision,
        recall,
        f1,
    })
}

/// Target-level counts for one sample under one matcher.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TargetTallies {
    pub tp_tgt: u64,
    pub fp_tgt: u64,
    pub fn_tgt: u64,
    /// Total pixel area of unmatched predictions.
    pub fp_area: u64,
    pub image_area: u64,
    /// IoU of each matched pair, in pair order.
    pub pair_ious: Vec<f64>,
}

impl TargetTallies {
    pub fn target_count(&self) -> u64 {
        self.tp_tgt + self.fp_tgt + self.fn_tgt
    }

    pub fn pair_iou_sum(&self) -> f64 {
        self.pair_ious.iter().sum()
    }
}

pub fn target_tallies(matching: &MatchResult, gt: &TargetSet, pred: &TargetSet) -> TargetTallies {
    let (h, w) = gt.source_shape();
    TargetTallies {
        tp_tgt: matching.pairs.len() as u64,
        fp_tgt: matching.unmatched_pred.len() as u64,
        fn_tgt: matching.unmatched_gt.len() as u64,
        fp_area: matching
            .unmatched_pred
            .iter()
            .map(|&p| pred.regions()[p].area() as u64)
            .sum(),
        image_area: (h * w) as u64,
        pair_ious: matching
            .pairs
            .iter()
            .map(|p| p.intersection as f64 / p.union as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct TallySums {
    tp: u64,
    fp: u64,
    fn_: u64,
    fp_area: u64,
    image_area: u64,
    iou_sum: f64,
}

fn sum_tallies(tallies: &[TargetTallies]) -> TallySums {
    tallies.iter().fold(TallySums::default(), |mut s, t| {
        s.tp += t.tp_tgt;
        s.fp += t.fp_tgt;
        s.fn_ += t.fn_tgt;
        s.fp_area += t.fp_area;
        s.image_area += t.image_area;
        for v in &t.pair_ious {
            s.iou_sum += v;
        }
        s
    })
}

/// Probability of detection: matched GT over all GT.
pub fn pd(tallies: &[TargetTallies]) -> f64 {
    let s = sum_tallies(tallies);
    ratio_or(s.tp as f64, (s.tp + s.fn_) as f64, EMPTY_AGREEMENT)
}

/// False-alarm rate as a raw fraction of image area.
pub fn fa(tallies: &[TargetTallies]) -> f64 {
    let s = sum_tallies(tallies);
    ratio_or(s.fp_area as f64, s.image_area as f64, 0.0)
}

/// Target-level F1, `2TP / (2TP + FP + FN)`.
pub fn f1_tgt(tallies: &[TargetTallies]) -> f64 {
    let s = sum_tallies(tallies);
    ratio_or(
        2.0 * s.tp as f64,
        (2 * s.tp + s.fp + s.fn_) as f64,
        EMPTY_AGREEMENT,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HierarchicalIou {
    pub iou_loc: f64,
    pub iou_seg: f64,
    pub hiou: f64,
    pub aiou: f64,
}

impl HierarchicalIou {
    pub fn from_components(iou_loc: f64, iou_seg: f64) -> Self {
        Self {
            iou_loc,
            iou_seg,
            hiou: iou_loc * iou_seg,
            aiou: 0.5 * (iou_loc + iou_seg),
        }
    }
}

/// Localization IoU, segmentation IoU, their product and their mean.
///
/// With no targets anywhere every component is [`EMPTY_AGREEMENT`]. With
/// targets but no matched pair, segmentation IoU is 0.
pub fn hierarchical_iou(tallies: &[TargetTallies]) -> Result<HierarchicalIou> {
    if tallies.is_empty() {
        return Err(Error::EmptyInput);
    }
    let s = sum_tallies(tallies);
    let targets = s.tp + s.fp + s.fn_;
    if targets == 0 {
        return Ok(HierarchicalIou::from_components(EMPTY_AGREEMENT, EMPTY_AGREEMENT));
    }
    let iou_loc = s.tp as f64 / targets as f64;
    let iou_seg = if s.tp == 0 { 0.0 } else { s.iou_sum / s.tp as f64 };
    Ok(HierarchicalIou::from_components(iou_loc, iou_seg))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub iou_pix: f64,
    pub niou_pix: f64,
    pub pre_pix: f64,
    pub rec_pix: f64,
    pub f1_pix: f64,
    pub pd: f64,
    pub fa: f64,
    pub fa_scaled: f64,
    pub f1_tgt: f64,
    pub iou_loc: f64,
    pub iou_seg: f64,
    pub hiou: f64,
    pub aiou: f64,
}

impl MetricReport {
    /// All metrics for one matcher over aligned per-sample confusions and tallies.
    pub fn compute(confusions: &[PixelConfusion], tallies: &[TargetTallies]) -> Result<Self> {
        if confusions.len() != tallies.len() {
            return Err(Error::InvalidConfig("confusions and tallies must align"));
        }
        let pr = f1_pix_dataset(confusions)?;
        let h = hierarchical_iou(tallies)?;
        let fa = fa(tallies);
        Ok(Self {
            iou_pix: iou_pix_dataset(confusions)?,
            niou_pix: niou_pix_dataset(confusions)?,
            pre_pix: pr.precision,
            rec_pix: pr.recall,
            f1_pix: pr.f1,
            pd: pd(tallies),
            fa,
            fa_scaled: fa * FA_SCALE,
            f1_tgt: f1_tgt(tallies),
            iou_loc: h.iou_loc,
            iou_seg: h.iou_seg,
            hiou: h.hiou,
            aiou: h.aiou,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn conf(tp: u64, fp: u64, fn_: u64) -> PixelConfusion {
        PixelConfusion { tp, fp, tn: 0, fn_ }
    }

    fn tally(tp: u64, fp: u64, fn_: u64, ious: &[f64]) -> TargetTallies {
        TargetTallies {
            tp_tgt: tp,
            fp_tgt: fp,
            fn_tgt: fn_,
            fp_area: 0,
            image_area: 100,
            pair_ious: ious.to_vec(),
        }
    }

    #[test]
    fn confusion_counts() {
        let px = (0..10).map(|i| (i, 0));
        let m = BinaryMask::from_pixels(10, 10, px).unwrap();
        let c = pixel_confusion(&m, &m).unwrap();
        assert_eq!(c, PixelConfusion { tp: 10, fp: 0, tn: 90, fn_: 0 });
        let all = BinaryMask::new(4, 4, vec![true; 16]).unwrap();
        let none = BinaryMask::empty(4, 4).unwrap();
        assert_eq!(pixel_confusion(&all, &none).unwrap(), PixelConfusion { tp: 0, fp: 16, tn: 0, fn_: 0 });
        assert!(pixel_confusion(&all, &BinaryMask::empty(4, 5).unwrap()).is_err());
    }

    #[test]
    fn global_versus_per_sample_iou() {
        assert_eq!(iou_pix_dataset(&[conf(3, 3, 3)]).unwrap(), 1.0 / 3.0);
        let pair = [conf(1, 0, 0), conf(0, 0, 1)];
        assert_eq!(iou_pix_dataset(&pair).unwrap(), 0.5);
        let contrast = [conf(9, 1, 0), conf(0, 0, 1)];
        assert_eq!(iou_pix_dataset(&contrast).unwrap(), 9.0 / 11.0);
        assert_eq!(niou_pix_dataset(&contrast).unwrap(), 0.45);
        assert_eq!(iou_pix_dataset(&[conf(0, 0, 0), conf(0, 0, 0)]).unwrap(), 1.0);
        assert_eq!(niou_degenerate_count(&[conf(0, 0, 0), conf(1, 0, 0)]), 1);
        assert_eq!(iou_pix_dataset(&[]), Err(Error::EmptyInput));
        assert_eq!(niou_pix_dataset(&[]), Err(Error::EmptyInput));
    }

    #[test]
    fn niou_single_and_identical() {
        let c = conf(7, 2, 5);
        assert_eq!(niou_pix_dataset(&[c]).unwrap(), iou_pix_dataset(&[c]).unwrap());
        assert_eq!(niou_pix_dataset(&[c, c, c]).unwrap(), c.iou());
    }

    #[test]
    fn precision_recall_f1() {
        let p = f1_pix_dataset(&[conf(5, 0, 0)]).unwrap();
        assert_eq!((p.precision, p.recall, p.f1), (1.0, 1.0, 1.0));
        let p = f1_pix_dataset(&[conf(1, 1, 1)]).unwrap();
        assert_eq!((p.precision, p.recall, p.f1), (0.5, 0.5, 0.5));
        let p = f1_pix_dataset(&[conf(2, 0, 2)]).unwrap();
        assert_eq!((p.precision, p.recall), (1.0, 0.5));
        assert!((p.f1 - 2.0 / 3.0).abs() < 1e-15);
        let p = f1_pix_dataset(&[conf(0, 0, 0)]).unwrap();
        assert_eq!((p.precision, p.recall, p.f1), (1.0, 1.0, 1.0));
        let p = f1_pix_dataset(&[conf(0, 3, 0)]).unwrap();
        assert_eq!((p.precision, p.recall, p.f1), (0.0, 1.0, 0.0));
        assert!(f1_pix_dataset(&[]).is_err());
    }

    #[test]
    fn detection_rates() {
        assert_eq!(pd(&[tally(2, 0, 1, &[1.0, 1.0])]), 2.0 / 3.0);
        assert_eq!(pd(&[tally(2, 0, 1, &[1.0, 1.0]), tally(1, 0, 0, &[1.0])]), 0.75);
        assert_eq!(pd(&[tally(0, 4, 0, &[])]), 1.0);
        let fp = TargetTallies {
            fp_tgt: 1,
            fp_area: 4,
            image_area: 65536,
            ..TargetTallies::default()
        };
        assert_eq!(fa(core::slice::from_ref(&fp)), 4.0 / 65536.0);
        assert!((fa(&[fp]) * FA_SCALE - 61.03515625).abs() < 1e-9);
        assert_eq!(fa(&[tally(1, 0, 0, &[1.0])]), 0.0);
    }

    #[test]
    fn target_f1() {
        assert_eq!(f1_tgt(&[tally(1, 1, 0, &[1.0])]), 2.0 / 3.0);
        assert_eq!(f1_tgt(&[tally(3, 0, 0, &[1.0; 3])]), 1.0);
        assert_eq!(f1_tgt(&[tally(0, 0, 1, &[])]), 0.0);
        assert_eq!(f1_tgt(&[tally(0, 0, 0, &[])]), 1.0);
    }

    #[test]
    fn hierarchical_components() {
        let h = HierarchicalIou::from_components(0.5, 0.8);
        assert_eq!(h.hiou, 0.4);
        assert!((h.aiou - 0.65).abs() < 1e-15);
        let h = hierarchical_iou(&[tally(1, 0, 1, &[9.0 / 21.0])]).unwrap();
        assert_eq!(h.iou_loc, 0.5);
        assert_eq!(h.iou_seg, 9.0 / 21.0);
        assert_eq!(h.hiou, 9.0 / 42.0);
        let h = hierarchical_iou(&[tally(2, 0, 0, &[1.0, 1.0])]).unwrap();
        assert_eq!((h.iou_loc, h.iou_seg, h.hiou, h.aiou), (1.0, 1.0, 1.0, 1.0));
        let h = hierarchical_iou(&[tally(0, 1, 2, &[])]).unwrap();
        assert_eq!((h.iou_loc, h.iou_seg, h.hiou, h.aiou), (0.0, 0.0, 0.0, 0.0));
        let h = hierarchical_iou(&[tally(0, 0, 0, &[])]).unwrap();
        assert_eq!((h.iou_loc, h.iou_seg, h.hiou, h.aiou), (1.0, 1.0, 1.0, 1.0));
        assert!(hierarchical_iou(&[]).is_err());
    }
}
