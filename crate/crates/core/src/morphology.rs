//! Binary erosion and dilation with a 3×3 square structuring element.
//!
//! Pixels outside the frame count as background, so erosion shrinks targets
//! touching the border.

use crate::mask::BinaryMask;

fn any_neighbor(mask: &BinaryMask, r: usize, c: usize, want: bool) -> bool {
    let (h, w) = mask.shape();
    for dr in -1isize..=1 {
        for dc in -1isize..=1 {
            let (nr, nc) = (r as isize + dr, c as isize + dc);
            let inside = nr >= 0 && nc >= 0 && (nr as usize) < h && (nc as usize) < w;
            let v = inside && mask.get(nr as usize, nc as usize);
            if v == want {
                return true;
            }
        }
    }
    false
}

pub fn dilate(mask: &BinaryMask) -> BinaryMask {
    let mut out = mask.clone();
    for r in 0..mask.height() {
        for c in 0..mask.width() {
            out.set(r, c, any_neighbor(mask, r, c, true));
        }
    }
    out
}

pub fn erode(mask: &BinaryMask) -> BinaryMask {
    let mut out = mask.clone();
    for r in 0..mask.height() {
        for c in 0..mask.width() {
            out.set(r, c, mask.get(r, c) && !any_neighbor(mask, r, c, false));
        }
    }
    out
}
