//! Connected-component extraction of target regions.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mask::BinaryMask;

/// Pixel adjacency used when grouping foreground into targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Connectivity {
    /// Edge neighbours only.
    Four,
    /// Edge and diagonal neighbours.
    #[default]
    Eight,
}

impl Connectivity {
    pub fn from_neighbors(n: u32) -> Option<Self> {
        match n {
            4 => Some(Connectivity::Four),
            8 => Some(Connectivity::Eight),
            _ => None,
        }
    }

    pub fn neighbors(self) -> u32 {
        match self {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }

    /// Neighbour offsets that precede a pixel in raster order.
    fn causal_offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &[(-1, 0), (0, -1)],
            Connectivity::Eight => &[(-1, -1), (-1, 0), (-1, 1), (0, -1)],
        }
    }

    pub fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &[(-1, 0), (0, -1), (0, 1), (1, 0)],
            Connectivity::Eight => &[
                (-1, -1),
                (-1, 0),
                (-1, 1),
                (0, -1),
                (0, 1),
                (1, -1),
                (1, 0),
                (1, 1),
            ],
        }
    }
}

/// Inclusive bounding box `(min_row, min_col, max_row, max_col)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BoundingBox {
    pub min_row: usize,
    pub min_col: usize,
    pub max_row: usize,
    pub max_col: usize,
}

impl BoundingBox {
    pub fn height(&self) -> usize {
        self.max_row - self.min_row + 1
    }

    pub fn width(&self) -> usize {
        self.max_col - self.min_col + 1
    }
}

/// One connected foreground component.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetRegion {
    id: usize,
    /// Row-major sorted coordinates.
    pixels: Vec<(usize, usize)>,
    centroid: (f64, f64),
    bbox: BoundingBox,
    shape: (usize, usize),
}

impl TargetRegion {
    /// Builds a region from a nonempty pixel list. Connectivity is not checked.
    pub fn from_pixels(
        id: usize,
        mut pixels: Vec<(usize, usize)>,
        shape: (usize, usize),
    ) -> Result<Self> {
        if pixels.is_empty() {
            return Err(Error::InvalidConfig("target region must be nonempty"));
        }
        if pixels.iter().any(|&(r, c)| r >= shape.0 || c >= shape.1) {
            return Err(Error::InvalidConfig("pixel outside mask frame"));
        }
        pixels.sort_unstable();
        pixels.dedup();
        let mut bbox = BoundingBox {
            min_row: usize::MAX,
            min_col: usize::MAX,
            max_row: 0,
            max_col: 0,
        };
        let (mut sum_r, mut sum_c) = (0u64, 0u64);
        for &(r, c) in &pixels {
            bbox.min_row = bbox.min_row.min(r);
            bbox.min_col = bbox.min_col.min(c);
            bbox.max_row = bbox.max_row.max(r);
            bbox.max_col = bbox.max_col.max(c);
            sum_r += r as u64;
            sum_c += c as u64;
        }
        let n = pixels.len() as f64;
        Ok(Self {
            id,
            centroid: (sum_r as f64 / n, sum_c as f64 / n),
            pixels,
            bbox,
            shape,
        })
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn pixels(&self) -> &[(usize, usize)] {
        &self.pixels
    }

    pub fn area(&self) -> usize {
        self.pixels.len()
    }

    /// Unweighted mean `(row, col)` of the pixel coordinates.
    pub fn centroid(&self) -> (f64, f64) {
        self.centroid
    }

    pub fn bbox(&self) -> BoundingBox {
        self.bbox
    }

    /// Shape of the mask this region was extracted from.
    pub fn source_shape(&self) -> (usize, usize) {
        self.shape
    }

    pub fn contains(&self, pixel: (usize, usize)) -> bool {
        self.pixels.binary_search(&pixel).is_ok()
    }

    /// Number of shared pixels with `other`.
    pub fn intersection(&self, other: &TargetRegion) -> usize {
        let (mut i, mut j, mut n) = (0, 0, 0);
        let (a, b) = (&self.pixels, &other.pixels);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }

    fn with_id(mut self, id: usize) -> Self {
        self.id = id;
        self
    }
}

/// `|a ∩ b| / |a ∪ b|` for two regions from masks of identical shape.
pub fn region_iou(a: &TargetRegion, b: &TargetRegion) -> Result<f64> {
    if a.shape != b.shape {
        return Err(Error::ShapeMismatch {
            expected: a.shape,
            found: b.shape,
        });
    }
    let inter = a.intersection(b);
    let union = a.area() + b.area() - inter;
    Ok(inter as f64 / union as f64)
}

/// Euclidean distance between region centroids, in pixels.
pub fn centroid_distance(a: &TargetRegion, b: &TargetRegion) -> f64 {
    let dr = a.centroid.0 - b.centroid.0;
    let dc = a.centroid.1 - b.centroid.1;
    libm::sqrt(dr * dr + dc * dc)
}

/// All targets of one mask, ordered by ascending `(min_row, min_col)` of
/// their bounding boxes (ties broken by first pixel in raster order).
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSet {
    regions: Vec<TargetRegion>,
    shape: (usize, usize),
    /// Row-major label map: 0 for background, `id + 1` for region `id`.
    labels: Vec<u32>,
}

impl TargetSet {
    pub fn regions(&self) -> &[TargetRegion] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&TargetRegion> {
        self.regions.get(id)
    }

    pub fn source_shape(&self) -> (usize, usize) {
        self.shape
    }

    /// Region id covering `(row, col)`, if any.
    pub fn label_at(&self, row: usize, col: usize) -> Option<usize> {
        match self.labels[row * self.shape.1 + col] {
            0 => None,
            l => Some(l as usize - 1),
        }
    }

    pub fn total_area(&self) -> usize {
        self.regions.iter().map(TargetRegion::area).sum()
    }

    /// Intersection pixel counts for every `(self_id, other_id)` pair, row-major `self.len() × other.len()`.
    pub fn intersection_matrix(&self, other: &TargetSet) -> Result<Vec<usize>> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                expected: self.shape,
                found: other.shape,
            });
        }
        let n = other.len();
        let mut counts = vec![0usize; self.len() * n];
        for region in &other.regions {
            for &(r, c) in region.pixels() {
                if let Some(mine) = self.label_at(r, c) {
                    counts[mine * n + region.id] += 1;
                }
            }
        }
        Ok(counts)
    }
}

struct DisjointSets {
    parent: Vec<u32>,
}

impl DisjointSets {
    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let grand = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = grand;
            x = grand;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi as usize] = lo;
        }
    }
}

/// Partitions the foreground of `mask` into maximal connected components.
pub fn extract_targets(mask: &BinaryMask, connectivity: Connectivity) -> TargetSet {
    let (h, w) = mask.shape();
    let mut provisional = vec![0u32; h * w];
    let mut sets = DisjointSets { parent: vec![0] };

    for r in 0..h {
        for c in 0..w {
            if !mask.get(r, c) {
                continue;
            }
            let mut label = 0u32;
            for &(dr, dc) in connectivity.causal_offsets() {
                let (nr, nc) = (r as isize + dr, c as isize + dc);
                if nr < 0 || nc < 0 || nc >= w as isize {
                    continue;
                }
                let l = provisional[nr as usize * w + nc as usize];
                if l == 0 {
                    continue;
                }
                if label == 0 {
                    label = l;
                } else {
                    sets.union(label, l);
                }
            }
            if label == 0 {
                label = sets.parent.len() as u32;
                sets.parent.push(label);
            }
            provisional[r * w + c] = label;
        }
    }

    // Compact roots in raster order of first appearance.
    let mut compact = vec![0u32; sets.parent.len()];
    let mut members: Vec<Vec<(usize, usize)>> = Vec::new();
    for r in 0..h {
        for c in 0..w {
            let l = provisional[r * w + c];
            if l == 0 {
                continue;
            }
            let root = sets.find(l) as usize;
            if compact[root] == 0 {
                members.push(Vec::new());
                compact[root] = members.len() as u32;
            }
            members[compact[root] as usize - 1].push((r, c));
        }
    }

    let mut regions: Vec<TargetRegion> = members
        .into_iter()
        .map(|px| TargetRegion::from_pixels(0, px, (h, w)).expect("component is nonempty"))
        .collect();
    regions.sort_by_key(|t| (t.bbox.min_row, t.bbox.min_col, t.pixels[0]));

    let mut labels = vec![0u32; h * w];
    let regions: Vec<TargetRegion> = regions
        .into_iter()
        .enumerate()
        .map(|(id, t)| {
            for &(r, c) in &t.pixels {
                labels[r * w + c] = id as u32 + 1;
            }
            t.with_id(id)
        })
        .collect();

    TargetSet {
        regions,
        shape: (h, w),
        labels,
    }
}
