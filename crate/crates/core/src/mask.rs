//! Score and binary masks.
//!
//! Both are row-major `height × width` grids. A [`ScoreMask`] holds per-pixel
//! prediction confidences in `[0, 1]`; a [`BinaryMask`] holds foreground bits.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Default binarization threshold applied to prediction scores.
pub const DEFAULT_THRESHOLD: f64 = 0.5;

fn check_shape(height: usize, width: usize, len: usize) -> Result<()> {
    if height == 0 || width == 0 || height.checked_mul(width) != Some(len) {
        return Err(Error::InvalidShape { height, width, len });
    }
    Ok(())
}

/// Per-pixel prediction scores in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreMask {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl ScoreMask {
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        check_shape(height, width, values.len())?;
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::ScoreOutOfRange { index, value });
        }
        Ok(Self {
            height,
            width,
            values,
        })
    }

    /// Scores from 8-bit intensities, `value / 255`.
    pub fn from_u8(height: usize, width: usize, data: &[u8]) -> Result<Self> {
        check_shape(height, width, data.len())?;
        Ok(Self {
            height,
            width,
            values: data.iter().map(|&v| f64::from(v) / 255.0).collect(),
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.width + col]
    }

    /// Foreground iff `score >= threshold`.
    pub fn binarize(&self, threshold: f64) -> BinaryMask {
        BinaryMask {
            height: self.height,
            width: self.width,
            bits: self.values.iter().map(|&v| v >= threshold).collect(),
        }
    }
}

/// Free-function form of [`ScoreMask::binarize`].
pub fn binarize(scores: &ScoreMask, threshold: f64) -> Result<BinaryMask> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidConfig("threshold must lie in [0, 1]"));
    }
    Ok(scores.binarize(threshold))
}

/// Row-major foreground indicator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    height: usize,
    width: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(height: usize, width: usize, bits: Vec<bool>) -> Result<Self> {
        check_shape(height, width, bits.len())?;
        Ok(Self {
            height,
            width,
            bits,
        })
    }

    /// All-background mask.
    pub fn empty(height: usize, width: usize) -> Result<Self> {
        Self::new(height, width, vec![false; height * width])
    }

    /// Ground-truth convention: any nonzero value is foreground.
    pub fn from_u8_nonzero(height: usize, width: usize, data: &[u8]) -> Result<Self> {
        check_shape(height, width, data.len())?;
        Ok(Self {
            height,
            width,
            bits: data.iter().map(|&v| v != 0).collect(),
        })
    }

    /// Builds a mask from foreground coordinates; out-of-frame points are an error.
    pub fn from_pixels(
        height: usize,
        width: usize,
        pixels: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut mask = Self::empty(height, width)?;
        for (r, c) in pixels {
            if r >= height || c >= width {
                return Err(Error::InvalidConfig("pixel outside mask frame"));
            }
            mask.set(r, c, true);
        }
        Ok(mask)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    pub fn foreground_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Row-major iterator over foreground coordinates.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let width = self.width;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i / width, i % width))
    }

    /// Nearest-neighbour integer upscale; every pixel becomes a `factor × factor` block.
    pub fn upscale(&self, factor: usize) -> BinaryMask {
        let (h, w) = (self.height * factor, self.width * factor);
        let mut bits = Vec::with_capacity(h * w);
        for r in 0..h {
            for c in 0..w {
                bits.push(self.get(r / factor, c / factor));
            }
        }
        BinaryMask {
            height: h,
            width: w,
            bits,
        }
    }

    /// 0/255 bytes, the conventional on-disk mask encoding.
    pub fn to_u8(&self) -> Vec<u8> {
        self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect()
    }
}

/// 8-bit single-channel intensity image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(height: usize, width: usize, data: Vec<u8>) -> Result<Self> {
        check_shape(height, width, data.len())?;
        Ok(Self {
            height,
            width,
            data,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.data[row * self.width + col]
    }

    pub fn to_scores(&self) -> ScoreMask {
        ScoreMask {
            height: self.height,
            width: self.width,
            values: self.data.iter().map(|&v| f64::from(v) / 255.0).collect(),
        }
    }

    pub fn to_binary_nonzero(&self) -> BinaryMask {
        BinaryMask {
            height: self.height,
            width: self.width,
            bits: self.data.iter().map(|&v| v != 0).collect(),
        }
    }
}
