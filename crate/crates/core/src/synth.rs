//! Seeded synthesis of stress-test masks.
//!
//! [`copy_paste`] densifies a ground-truth mask by duplicating targets into
//! free space. [`perturb`] derives a prediction from a ground-truth mask and
//! records, for every GT target, which prediction regions hold its perturbed
//! descendant, so matchers can be scored on [`match_success_rate`].
//!
//! All randomness comes from [`SplitMix64`] seeded from [`PerturbSpec::seed`]; outputs are
//! bit-identical for identical inputs.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mask::BinaryMask;
use crate::matching::{match_targets, MatchConfig};
use crate::morphology;
use crate::region::{extract_targets, Connectivity, TargetRegion, TargetSet};
use crate::rng::{derive_seed, SplitMix64};

/// Placement attempts per paste before it is skipped.
pub const MAX_PASTE_ATTEMPTS: usize = 100;

/// Attempts at a valid occlusion bite per target before the target is left whole.
pub const MAX_BITE_ATTEMPTS: usize = 100;

/// Fraction of boundary pixels toggled per unit of deform magnitude.
pub const DEFORM_TOGGLE_RATE: f64 = 0.1;

/// Upper bound on the toggled boundary fraction.
pub const DEFORM_TOGGLE_CAP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PerturbKind {
    CopyPaste,
    Occlude,
    Deform,
    Connect,
    Erode,
    Dilate,
    Sparser,
    Denser,
}

impl PerturbKind {
    pub const ALL: [PerturbKind; 8] = [
        PerturbKind::CopyPaste,
        PerturbKind::Occlude,
        PerturbKind::Deform,
        PerturbKind::Connect,
        PerturbKind::Erode,
        PerturbKind::Dilate,
        PerturbKind::Sparser,
        PerturbKind::Denser,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PerturbKind::CopyPaste => "copy_paste",
            PerturbKind::Occlude => "occlude",
            PerturbKind::Deform => "deform",
            PerturbKind::Connect => "connect",
            PerturbKind::Erode => "erode",
            PerturbKind::Dilate => "dilate",
            PerturbKind::Sparser => "sparser",
            PerturbKind::Denser => "denser",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// Parameters of one perturbation.
///
/// `magnitude` means: occlude, maximum removed fraction of each target's
/// area; deform, maximum shift in pixels per axis (boundary toggling scales
/// with it); sparser/denser, translation distance in pixels. `count` is the
/// number of pastes for copy-paste and of bridges for connect.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbSpec {
    pub kind: PerturbKind,
    pub seed: u64,
    pub magnitude: f64,
    pub count: usize,
    pub connectivity: Connectivity,
}

impl PerturbSpec {
    pub fn new(kind: PerturbKind, seed: u64, magnitude: f64, count: usize) -> Self {
        Self {
            kind,
            seed,
            magnitude,
            count,
            connectivity: Connectivity::default(),
        }
    }
}

/// A GT target and the prediction regions holding its perturbed descendant,
/// ordered by descending share of descendant pixels. Empty when the
/// perturbation annihilated the target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedPair {
    pub gt_id: usize,
    pub pred_ids: Vec<usize>,
}

impl ExpectedPair {
    pub fn primary_pred(&self) -> Option<usize> {
        self.pred_ids.first().copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchTrial {
    pub spec: PerturbSpec,
    pub gt_mask: BinaryMask,
    pub perturbed_pred: BinaryMask,
    pub expected_pairs: Vec<ExpectedPair>,
}

type Pixels = Vec<(usize, usize)>;

fn targets_of(mask: &BinaryMask, connectivity: Connectivity, required: usize) -> Result<TargetSet> {
    let set = extract_targets(mask, connectivity);
    if set.len() < required {
        return Err(Error::NotEnoughTargets {
            required,
            found: set.len(),
        });
    }
    Ok(set)
}

fn translate(pixels: &[(usize, usize)], dr: isize, dc: isize) -> Pixels {
    pixels
        .iter()
        .map(|&(r, c)| ((r as isize + dr) as usize, (c as isize + dc) as usize))
        .collect()
}

/// Clamps a translation so the region's bbox stays in frame.
fn clamp_shift(t: &TargetRegion, dr: isize, dc: isize, shape: (usize, usize)) -> (isize, isize) {
    let b = t.bbox();
    let dr = dr.clamp(-(b.min_row as isize), (shape.0 - 1 - b.max_row) as isize);
    let dc = dc.clamp(-(b.min_col as isize), (shape.1 - 1 - b.max_col) as isize);
    (dr, dc)
}

/// True if any pixel or its 8-neighbourhood is already foreground in `occupied`.
fn touches(occupied: &BinaryMask, pixels: &[(usize, usize)]) -> bool {
    let (h, w) = occupied.shape();
    pixels.iter().any(|&(r, c)| {
        (r.saturating_sub(1)..=(r + 1).min(h - 1))
            .any(|nr| (c.saturating_sub(1)..=(c + 1).min(w - 1)).any(|nc| occupied.get(nr, nc)))
    })
}

fn paint(mask: &mut BinaryMask, pixels: &[(usize, usize)], value: bool) {
    for &(r, c) in pixels {
        mask.set(r, c, value);
    }
}

/// Duplicates `spec.count` seeded target choices into free, non-touching positions.
pub fn copy_paste(mask: &BinaryMask, spec: &PerturbSpec) -> Result<BinaryMask> {
    let targets = targets_of(mask, spec.connectivity, 1)?;
    let (h, w) = mask.shape();
    let mut rng = SplitMix64::new(spec.seed);
    let mut out = mask.clone();
    for _ in 0..spec.count {
        let t = &targets.regions()[rng.index(targets.len())];
        let b = t.bbox();
        for _ in 0..MAX_PASTE_ATTEMPTS {
            let row = rng.below((h - b.height() + 1) as u64) as isize;
            let col = rng.below((w - b.width() + 1) as u64) as isize;
            let moved = translate(t.pixels(), row - b.min_row as isize, col - b.min_col as isize);
            if !touches(&out, &moved) {
                paint(&mut out, &moved, true);
                break;
            }
        }
    }
    Ok(out)
}

fn is_single_component(pixels: &[(usize, usize)], shape: (usize, usize), connectivity: Connectivity) -> bool {
    match BinaryMask::from_pixels(shape.0, shape.1, pixels.iter().copied()) {
        Ok(m) => extract_targets(&m, connectivity).len() == 1,
        Err(_) => false,
    }
}

fn occlude_one(t: &TargetRegion, fraction: f64, spec: &PerturbSpec, rng: &mut SplitMix64) -> Pixels {
    let area = t.area();
    let budget = libm::floor(fraction.clamp(0.0, 1.0) * area as f64) as usize;
    let b = t.bbox();
    if budget == 0 || area < 2 {
        return t.pixels().to_vec();
    }
    for _ in 0..MAX_BITE_ATTEMPTS {
        let rh = 1 + rng.index(b.height().min(budget));
        let rw = 1 + rng.index(b.width().min(budget / rh));
        let r0 = b.min_row + rng.index(b.height() - rh + 1);
        let c0 = b.min_col + rng.index(b.width() - rw + 1);
        let inside = |&(r, c): &(usize, usize)| r >= r0 && r < r0 + rh && c >= c0 && c < c0 + rw;
        let kept: Pixels = t.pixels().iter().filter(|p| !inside(p)).copied().collect();
        let removed = area - kept.len();
        if removed == 0 || removed > budget || kept.is_empty() {
            continue;
        }
        if is_single_component(&kept, t.source_shape(), spec.connectivity) {
            return kept;
        }
    }
    t.pixels().to_vec()
}

fn boundary_toggle(pixels: Pixels, shape: (usize, usize), fraction: f64, rng: &mut SplitMix64) -> Pixels {
    if fraction <= 0.0 {
        return pixels;
    }
    let own = BinaryMask::from_pixels(shape.0, shape.1, pixels.iter().copied())
        .expect("pixels are in frame");
    let mut candidates: Pixels = Vec::new();
    for r in 0..shape.0 {
        for c in 0..shape.1 {
            let edge_neighbors = [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)].iter().map(|&(dr, dc)| {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if nr < 0 || nc < 0 || nr as usize >= shape.0 || nc as usize >= shape.1 {
                    None
                } else {
                    Some(own.get(nr as usize, nc as usize))
                }
            });
            let boundary = if own.get(r, c) {
                edge_neighbors.clone().any(|n| n != Some(true))
            } else {
                edge_neighbors.clone().any(|n| n == Some(true))
            };
            if boundary {
                candidates.push((r, c));
            }
        }
    }
    let k = libm::floor(fraction * candidates.len() as f64) as usize;
    rng.shuffle(&mut candidates);
    let mut out = own;
    for &(r, c) in candidates.iter().take(k) {
        let v = out.get(r, c);
        if v && out.foreground_count() == 1 {
            continue;
        }
        out.set(r, c, !v);
    }
    out.foreground().collect()
}

fn bridge(a: &TargetRegion, b: &TargetRegion) -> Pixels {
    let mut best = (u64::MAX, (0, 0), (0, 0));
    for &pa in a.pixels() {
        for &pb in b.pixels() {
            let dr = pa.0.abs_diff(pb.0) as u64;
            let dc = pa.1.abs_diff(pb.1) as u64;
            let d = dr * dr + dc * dc;
            if d < best.0 {
                best = (d, pa, pb);
            }
        }
    }
    let ((r0, c0), (r1, c1)) = (best.1, best.2);
    // 4-connected staircase: each step moves one axis, so the path joins under either connectivity.
    let (mut r, mut c) = (r0 as isize, c0 as isize);
    let (tr, tc) = (r1 as isize, c1 as isize);
    let (sr, sc) = ((tr - r).signum(), (tc - c).signum());
    let (nr, nc) = ((tr - r).abs(), (tc - c).abs());
    let (mut done_r, mut done_c) = (0isize, 0isize);
    let mut path = vec![(r0, c0)];
    while done_r < nr || done_c < nc {
        // Advance the axis that lags its share of the straight line.
        if done_c >= nc || (done_r < nr && (done_r + 1) * nc <= (done_c + 1) * nr) {
            r += sr;
            done_r += 1;
        } else {
            c += sc;
            done_c += 1;
        }
        path.push((r as usize, c as usize));
    }
    path
}

fn mask_centroid(targets: &TargetSet) -> (f64, f64) {
    let (mut sr, mut sc, mut n) = (0.0, 0.0, 0.0);
    for t in targets.regions() {
        for &(r, c) in t.pixels() {
            sr += r as f64;
            sc += c as f64;
            n += 1.0;
        }
    }
    (sr / n, sc / n)
}

fn spread(targets: &TargetSet, spec: &PerturbSpec, outward: bool, rng: &mut SplitMix64) -> Vec<Pixels> {
    let shape = targets.source_shape();
    let center = mask_centroid(targets);
    let dist = |t: &TargetRegion| {
        let (dr, dc) = (t.centroid().0 - center.0, t.centroid().1 - center.1);
        libm::sqrt(dr * dr + dc * dc)
    };
    let mut order: Vec<usize> = (0..targets.len()).collect();
    // Outer targets move first when spreading, inner ones first when packing.
    order.sort_by(|&a, &b| {
        let (da, db) = (dist(&targets.regions()[a]), dist(&targets.regions()[b]));
        let o = if outward { db.total_cmp(&da) } else { da.total_cmp(&db) };
        o.then(a.cmp(&b))
    });

    let mut occupied = BinaryMask::empty(shape.0, shape.1).expect("nonzero shape");
    let mut out: Vec<Pixels> = vec![Vec::new(); targets.len()];
    for id in order {
        let t = &targets.regions()[id];
        let d = dist(t);
        let (ur, uc) = if d > 0.0 {
            ((t.centroid().0 - center.0) / d, (t.centroid().1 - center.1) / d)
        } else {
            let angle = rng.unit() * core::f64::consts::TAU;
            (libm::sin(angle), libm::cos(angle))
        };
        let step = if outward {
            spec.magnitude.max(0.0)
        } else {
            -spec.magnitude.max(0.0).min(d)
        };
        let steps = libm::ceil(step.abs()) as usize;
        let mut placed = None;
        for k in (0..=steps).rev() {
            let s = if steps == 0 { 0.0 } else { step * k as f64 / steps as f64 };
            let (dr, dc) = (libm::round(ur * s) as isize, libm::round(uc * s) as isize);
            let (dr, dc) = clamp_shift(t, dr, dc, shape);
            let moved = translate(t.pixels(), dr, dc);
            if !touches(&occupied, &moved) {
                placed = Some(moved);
                break;
            }
        }
        let moved = placed.unwrap_or_else(|| t.pixels().to_vec());
        paint(&mut occupied, &moved, true);
        out[id] = moved;
    }
    out
}

fn descendants(targets: &TargetSet, spec: &PerturbSpec, rng: &mut SplitMix64) -> Result<(Vec<Pixels>, Pixels)> {
    let shape = targets.source_shape();
    let mut extra: Pixels = Vec::new();
    let parts: Vec<Pixels> = match spec.kind {
        PerturbKind::CopyPaste => {
            return Err(Error::InvalidConfig("copy_paste produces a mask, not a trial"));
        }
        PerturbKind::Occlude => targets
            .regions()
            .iter()
            .map(|t| occlude_one(t, spec.magnitude, spec, rng))
            .collect(),
        PerturbKind::Deform => {
            let max_shift = libm::floor(spec.magnitude.max(0.0)) as i64;
            let fraction = (DEFORM_TOGGLE_RATE * spec.magnitude.max(0.0)).min(DEFORM_TOGGLE_CAP);
            targets
                .regions()
                .iter()
                .map(|t| {
                    let dr = rng.range_inclusive(-max_shift, max_shift) as isize;
                    let dc = rng.range_inclusive(-max_shift, max_shift) as isize;
                    let (dr, dc) = clamp_shift(t, dr, dc, shape);
                    boundary_toggle(translate(t.pixels(), dr, dc), shape, fraction, rng)
                })
                .collect()
        }
        PerturbKind::Connect => {
            if targets.len() < 2 {
                return Err(Error::NotEnoughTargets {
                    required: 2,
                    found: targets.len(),
                });
            }
            let mut group: Vec<usize> = (0..targets.len()).collect();
            for _ in 0..spec.count.max(1) {
                let mut best: Option<(f64, usize, usize)> = None;
                for a in targets.regions() {
                    for b in targets.regions() {
                        if a.id() >= b.id() || group[a.id()] == group[b.id()] {
                            continue;
                        }
                        let d = crate::region::centroid_distance(a, b);
                        if best.is_none_or(|(bd, _, _)| d < bd) {
                            best = Some((d, a.id(), b.id()));
                        }
                    }
                }
                let Some((_, a, b)) = best else { break };
                extra.extend(bridge(&targets.regions()[a], &targets.regions()[b]));
                let (from, to) = (group[b], group[a]);
                group.iter_mut().filter(|g| **g == from).for_each(|g| *g = to);
            }
            targets.regions().iter().map(|t| t.pixels().to_vec()).collect()
        }
        PerturbKind::Erode | PerturbKind::Dilate => targets
            .regions()
            .iter()
            .map(|t| {
                let own = BinaryMask::from_pixels(shape.0, shape.1, t.pixels().iter().copied())
                    .expect("pixels are in frame");
                let m = if spec.kind == PerturbKind::Erode {
                    morphology::erode(&own)
                } else {
                    morphology::dilate(&own)
                };
                m.foreground().collect()
            })
            .collect(),
        PerturbKind::Sparser => spread(targets, spec, true, rng),
        PerturbKind::Denser => spread(targets, spec, false, rng),
    };
    Ok((parts, extra))
}

/// Derives a perturbed prediction and its expected correspondences.
pub fn perturb(mask: &BinaryMask, spec: &PerturbSpec) -> Result<MatchTrial> {
    let targets = targets_of(mask, spec.connectivity, 1)?;
    let mut rng = SplitMix64::new(spec.seed);
    let (parts, extra) = descendants(&targets, spec, &mut rng)?;
    let (h, w) = mask.shape();

    let mut pred = BinaryMask::empty(h, w)?;
    for part in &parts {
        paint(&mut pred, part, true);
    }
    paint(&mut pred, &extra, true);
    let pred_set = extract_targets(&pred, spec.connectivity);

    let expected_pairs = parts
        .iter()
        .enumerate()
        .map(|(gt_id, part)| {
            let mut share = vec![0usize; pred_set.len()];
            for &(r, c) in part {
                if let Some(id) = pred_set.label_at(r, c) {
                    share[id] += 1;
                }
            }
            let mut ids: Vec<usize> = (0..pred_set.len()).filter(|&i| share[i] > 0).collect();
            ids.sort_by(|&a, &b| share[b].cmp(&share[a]).then(a.cmp(&b)));
            ExpectedPair { gt_id, pred_ids: ids }
        })
        .collect();

    Ok(MatchTrial {
        spec: *spec,
        gt_mask: mask.clone(),
        perturbed_pred: pred,
        expected_pairs,
    })
}

/// Fraction of expected pairs reproduced by the matcher.
///
/// A pair succeeds when the matcher pairs the GT target with any prediction
/// region holding at least one descendant pixel.
pub fn match_success_rate(trials: &[MatchTrial], cfg: &MatchConfig) -> Result<f64> {
    if trials.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (mut hits, mut total) = (0usize, 0usize);
    for trial in trials {
        let gt = extract_targets(&trial.gt_mask, trial.spec.connectivity);
        let pred = extract_targets(&trial.perturbed_pred, trial.spec.connectivity);
        let result = match_targets(&gt, &pred, cfg)?;
        for e in &trial.expected_pairs {
            total += 1;
            if let Some(p) = result.pred_for_gt(e.gt_id) {
                if e.pred_ids.contains(&p) {
                    hits += 1;
                }
            }
        }
    }
    Ok(if total == 0 { 1.0 } else { hits as f64 / total as f64 })
}

/// Random ground-truth layouts for generated suites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutParams {
    pub height: usize,
    pub width: usize,
    pub min_targets: usize,
    pub max_targets: usize,
    /// Bounding-box side range of each target.
    pub min_size: usize,
    pub max_size: usize,
    /// Minimum free pixels between target bounding boxes.
    pub gap: usize,
}

impl Default for LayoutParams {
    fn default() -> Self {
        Self {
            height: 96,
            width: 96,
            min_targets: 2,
            max_targets: 6,
            min_size: 3,
            max_size: 16,
            gap: 6,
        }
    }
}

/// Places rectangles and filled ellipses with at least `gap` pixels between bounding boxes.
pub fn random_layout(params: &LayoutParams, rng: &mut SplitMix64) -> BinaryMask {
    let (h, w) = (params.height, params.width);
    let mut mask = BinaryMask::empty(h, w).expect("layout shape is nonzero");
    let mut boxes: Vec<(usize, usize, usize, usize)> = Vec::new();
    let want = params.min_targets
        + rng.index(params.max_targets.saturating_sub(params.min_targets) + 1);
    let span = params.max_size.saturating_sub(params.min_size) + 1;
    let mut attempts = 0;
    while boxes.len() < want && attempts < 1000 {
        attempts += 1;
        let bh = (params.min_size + rng.index(span)).min(h);
        let bw = (params.min_size + rng.index(span)).min(w);
        let r0 = rng.index(h - bh + 1);
        let c0 = rng.index(w - bw + 1);
        let g = params.gap;
        let clear = boxes.iter().all(|&(br, bc, bbh, bbw)| {
            r0 >= br + bbh + g || br >= r0 + bh + g || c0 >= bc + bbw + g || bc >= c0 + bw + g
        });
        if !clear {
            continue;
        }
        let ellipse = bh >= 3 && bw >= 3 && rng.below(2) == 1;
        let (cy, cx) = ((bh as f64 - 1.0) / 2.0, (bw as f64 - 1.0) / 2.0);
        let (ry, rx) = (bh as f64 / 2.0, bw as f64 / 2.0);
        for r in 0..bh {
            for c in 0..bw {
                let inside = !ellipse || {
                    let (y, x) = ((r as f64 - cy) / ry, (c as f64 - cx) / rx);
                    y * y + x * x <= 1.0
                };
                if inside {
                    mask.set(r0 + r, c0 + c, true);
                }
            }
        }
        boxes.push((r0, c0, bh, bw));
    }
    mask
}

/// Default magnitude used for each kind in generated suites.
pub fn suite_magnitude(kind: PerturbKind) -> f64 {
    match kind {
        PerturbKind::Occlude => 0.5,
        PerturbKind::Deform => 3.0,
        PerturbKind::Sparser | PerturbKind::Denser => 3.0,
        _ => 1.0,
    }
}

/// `trials` seeded layouts, each perturbed once with the kind's suite magnitude.
pub fn generate_suite(
    kind: PerturbKind,
    trials: usize,
    seed: u64,
    layout: &LayoutParams,
) -> Result<Vec<MatchTrial>> {
    let mut out = Vec::with_capacity(trials);
    for i in 0..trials {
        let mut rng = SplitMix64::new(derive_seed(seed, 2 * i as u64));
        let mut gt = random_layout(layout, &mut rng);
        if extract_targets(&gt, Connectivity::Eight).len() < 2 {
            // Tiny frames can refuse a second target; fall back to two corner blocks.
            gt = BinaryMask::from_pixels(layout.height, layout.width, [(0, 0), (layout.height - 1, layout.width - 1)])?;
        }
        let spec = PerturbSpec::new(kind, derive_seed(seed, 2 * i as u64 + 1), suite_magnitude(kind), 1);
        out.push(perturb(&gt, &spec)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::Strategy;

    fn block_mask(h: usize, w: usize, rects: &[(usize, usize, usize, usize)]) -> BinaryMask {
        let mut px = Vec::new();
        for &(r0, c0, rh, cw) in rects {
            for r in r0..r0 + rh {
                for c in c0..c0 + cw {
                    px.push((r, c));
                }
            }
        }
        BinaryMask::from_pixels(h, w, px).unwrap()
    }

    #[test]
    fn copy_paste_adds_disjoint_targets() {
        let m = block_mask(16, 16, &[(0, 0, 2, 2)]);
        let out = copy_paste(&m, &PerturbSpec::new(PerturbKind::CopyPaste, 7, 0.0, 3)).unwrap();
        let set = extract_targets(&out, Connectivity::Eight);
        assert_eq!(set.len(), 4);
        assert!(set.regions().iter().all(|t| t.area() == 4));
        assert!(m.foreground().all(|(r, c)| out.get(r, c)));
    }

    #[test]
    fn copy_paste_zero_count_is_identity() {
        let m = block_mask(8, 8, &[(1, 1, 2, 2)]);
        let out = copy_paste(&m, &PerturbSpec::new(PerturbKind::CopyPaste, 1, 0.0, 0)).unwrap();
        assert_eq!(out, m);
    }

    #[test]
    fn copy_paste_full_mask_skips() {
        let mut m = BinaryMask::new(6, 6, vec![true; 36]).unwrap();
        m.set(5, 5, false);
        let out = copy_paste(&m, &PerturbSpec::new(PerturbKind::CopyPaste, 3, 0.0, 5)).unwrap();
        assert_eq!(out, m);
        let empty = BinaryMask::empty(4, 4).unwrap();
        assert!(copy_paste(&empty, &PerturbSpec::new(PerturbKind::CopyPaste, 3, 0.0, 1)).is_err());
    }

    #[test]
    fn occlusion_respects_budget() {
        let m = block_mask(12, 12, &[(3, 3, 5, 5)]);
        for seed in 0..50 {
            let t = perturb(&m, &PerturbSpec::new(PerturbKind::Occlude, seed, 0.3, 1)).unwrap();
            let area = t.perturbed_pred.foreground_count();
            assert!((18..=25).contains(&area), "seed {seed}: area {area}");
            assert_eq!(t.expected_pairs, vec![ExpectedPair { gt_id: 0, pred_ids: vec![0] }]);
        }
    }

    #[test]
    fn erosion_annihilates_singletons() {
        let m = block_mask(10, 10, &[(1, 1, 1, 1), (5, 5, 3, 3)]);
        let t = perturb(&m, &PerturbSpec::new(PerturbKind::Erode, 0, 0.0, 1)).unwrap();
        assert!(t.expected_pairs[0].pred_ids.is_empty());
        assert_eq!(t.expected_pairs[1].pred_ids, vec![0]);
        let rate = match_success_rate(&[t], &MatchConfig::default()).unwrap();
        assert_eq!(rate, 0.5);
    }

    #[test]
    fn zero_deform_is_identity() {
        let m = block_mask(12, 12, &[(1, 1, 3, 3), (7, 6, 2, 4)]);
        let t = perturb(&m, &PerturbSpec::new(PerturbKind::Deform, 99, 0.0, 1)).unwrap();
        assert_eq!(t.perturbed_pred, m);
    }

    #[test]
    fn connect_merges_nearest_pair() {
        let m = block_mask(12, 20, &[(1, 1, 3, 3), (1, 8, 3, 3), (9, 17, 2, 2)]);
        let t = perturb(&m, &PerturbSpec::new(PerturbKind::Connect, 0, 0.0, 1)).unwrap();
        let pred = extract_targets(&t.perturbed_pred, Connectivity::Eight);
        assert_eq!(pred.len(), 2);
        assert_eq!(t.expected_pairs[0].pred_ids, t.expected_pairs[1].pred_ids);
        let single = block_mask(8, 8, &[(1, 1, 2, 2)]);
        assert!(matches!(
            perturb(&single, &PerturbSpec::new(PerturbKind::Connect, 0, 0.0, 1)),
            Err(Error::NotEnoughTargets { required: 2, found: 1 })
        ));
    }

    #[test]
    fn bridge_joins_under_four_connectivity() {
        let m = block_mask(12, 12, &[(0, 0, 2, 2), (7, 9, 2, 2)]);
        let mut spec = PerturbSpec::new(PerturbKind::Connect, 0, 0.0, 1);
        spec.connectivity = Connectivity::Four;
        let t = perturb(&m, &spec).unwrap();
        assert_eq!(extract_targets(&t.perturbed_pred, Connectivity::Four).len(), 1);
    }

    #[test]
    fn spreading_moves_targets_apart() {
        let m = block_mask(40, 40, &[(15, 10, 3, 3), (15, 27, 3, 3)]);
        let far = perturb(&m, &PerturbSpec::new(PerturbKind::Sparser, 0, 4.0, 1)).unwrap();
        let near = perturb(&m, &PerturbSpec::new(PerturbKind::Denser, 0, 4.0, 1)).unwrap();
        let gap = |mask: &BinaryMask| {
            let s = extract_targets(mask, Connectivity::Eight);
            crate::region::centroid_distance(&s.regions()[0], &s.regions()[1])
        };
        assert_eq!(gap(&m), 17.0);
        assert_eq!(gap(&far.perturbed_pred), 25.0);
        assert_eq!(gap(&near.perturbed_pred), 9.0);
    }

    #[test]
    fn untouched_and_empty_predictions() {
        let m = block_mask(10, 10, &[(1, 1, 2, 2), (6, 6, 2, 2)]);
        let same = MatchTrial {
            spec: PerturbSpec::new(PerturbKind::Deform, 0, 0.0, 1),
            gt_mask: m.clone(),
            perturbed_pred: m.clone(),
            expected_pairs: vec![
                ExpectedPair { gt_id: 0, pred_ids: vec![0] },
                ExpectedPair { gt_id: 1, pred_ids: vec![1] },
            ],
        };
        assert_eq!(match_success_rate(core::slice::from_ref(&same), &MatchConfig::default()).unwrap(), 1.0);
        let empty = MatchTrial {
            perturbed_pred: BinaryMask::empty(10, 10).unwrap(),
            expected_pairs: vec![
                ExpectedPair { gt_id: 0, pred_ids: vec![] },
                ExpectedPair { gt_id: 1, pred_ids: vec![] },
            ],
            ..same
        };
        let cfg = MatchConfig::with_strategy(Strategy::DistanceOnly);
        assert_eq!(match_success_rate(&[empty], &cfg).unwrap(), 0.0);
        assert!(match_success_rate(&[], &cfg).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let layout = LayoutParams::default();
        for kind in [PerturbKind::Occlude, PerturbKind::Deform, PerturbKind::Connect] {
            let a = generate_suite(kind, 5, 42, &layout).unwrap();
            let b = generate_suite(kind, 5, 42, &layout).unwrap();
            assert_eq!(a, b);
        }
    }
}
