//! Dataset attribute statistics over intensity images and their GT masks.
//!
//! Per image, with intensities `I` normalized to `[0, 1]` by `/255`:
//!
//! * brightness mean and std are the mean and population std of `I`;
//! * RMS contrast is the population std of `(I - min) / (max - min)`, 0 for a
//!   constant image;
//! * Laplacian noise is the population variance of the 4-neighbour Laplacian
//!   response on raw 0-255 intensities over interior pixels;
//! * target contrast averages, over targets, `|mean(I in target) - mean(I in ring)|`
//!   where the ring is the target dilated twice minus all foreground;
//! * fg/bg ratio is foreground pixels over background pixels.
//!
//! Dataset values average the per-image values. Target-level attributes skip
//! images without targets.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::mask::{BinaryMask, GrayImage};
use crate::morphology::dilate;
use crate::region::{extract_targets, Connectivity};

/// Dilation passes forming the local background ring.
pub const RING_WIDTH: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AttributeStats {
    pub brightness_mean: f64,
    pub brightness_std: f64,
    pub rms_contrast: f64,
    pub laplacian_noise: f64,
    pub avg_target_count: f64,
    pub avg_target_size: f64,
    pub target_background_contrast: f64,
    pub fg_bg_area_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImageAttributes {
    pub brightness_mean: f64,
    pub brightness_std: f64,
    pub rms_contrast: f64,
    pub laplacian_noise: f64,
    pub target_count: usize,
    /// `None` when the mask has no targets.
    pub mean_target_size: Option<f64>,
    pub target_background_contrast: Option<f64>,
    pub fg_bg_area_ratio: Option<f64>,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    if n == 0.0 {
        return (0.0, 0.0);
    }
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, libm::sqrt(var))
}

/// Mean and std of `/255` intensities from exact integer moments.
fn intensity_mean_std(data: &[u8]) -> (f64, f64) {
    let n = data.len() as u128;
    let sum: u128 = data.iter().map(|&v| v as u128).sum();
    let sq: u128 = data.iter().map(|&v| (v as u128) * (v as u128)).sum();
    let var_num = n * sq - sum * sum;
    let mean = sum as f64 / (n as f64 * 255.0);
    let std = libm::sqrt(var_num as f64) / (n as f64 * 255.0);
    (mean, std)
}

fn laplacian_variance(image: &GrayImage) -> f64 {
    let (h, w) = image.shape();
    if h < 3 || w < 3 {
        return 0.0;
    }
    let mut responses = Vec::with_capacity((h - 2) * (w - 2));
    for r in 1..h - 1 {
        for c in 1..w - 1 {
            let px = |r: usize, c: usize| image.get(r, c) as f64;
            responses.push(px(r - 1, c) + px(r + 1, c) + px(r, c - 1) + px(r, c + 1) - 4.0 * px(r, c));
        }
    }
    let (_, std) = mean_std(responses.iter().copied());
    std * std
}

pub fn image_attributes(image: &GrayImage, gt: &BinaryMask, connectivity: Connectivity) -> Result<ImageAttributes> {
    if image.shape() != gt.shape() {
        return Err(Error::ShapeMismatch {
            expected: gt.shape(),
            found: image.shape(),
        });
    }
    let norm = |v: u8| v as f64 / 255.0;
    let (brightness_mean, brightness_std) = intensity_mean_std(image.data());
    let lo = image.data().iter().copied().min().unwrap_or(0);
    let hi = image.data().iter().copied().max().unwrap_or(0);
    let rms_contrast = if hi == lo {
        0.0
    } else {
        let span = (hi - lo) as f64;
        mean_std(image.data().iter().map(|&v| (v - lo) as f64 / span)).1
    };

    let targets = extract_targets(gt, connectivity);
    let (h, w) = gt.shape();
    let (mut mean_target_size, mut target_background_contrast, mut fg_bg_area_ratio) = (None, None, None);
    if !targets.is_empty() {
        mean_target_size = Some(targets.total_area() as f64 / targets.len() as f64);
        let mut contrast_sum = 0.0;
        let mut counted = 0usize;
        for t in targets.regions() {
            let mut ring = BinaryMask::from_pixels(h, w, t.pixels().iter().copied())?;
            for _ in 0..RING_WIDTH {
                ring = dilate(&ring);
            }
            let ring_px: Vec<f64> = ring
                .foreground()
                .filter(|&(r, c)| !gt.get(r, c))
                .map(|(r, c)| norm(image.get(r, c)))
                .collect();
            if ring_px.is_empty() {
                continue;
            }
            let inside = t.pixels().iter().map(|&(r, c)| norm(image.get(r, c))).sum::<f64>() / t.area() as f64;
            let ring_mean = ring_px.iter().sum::<f64>() / ring_px.len() as f64;
            contrast_sum += libm::fabs(inside - ring_mean);
            counted += 1;
        }
        if counted > 0 {
            target_background_contrast = Some(contrast_sum / counted as f64);
        }
        let fg = gt.foreground_count();
        let bg = gt.len() - fg;
        if bg > 0 {
            fg_bg_area_ratio = Some(fg as f64 / bg as f64);
        }
    }

    Ok(ImageAttributes {
        brightness_mean,
        brightness_std,
        rms_contrast,
        laplacian_noise: laplacian_variance(image),
        target_count: targets.len(),
        mean_target_size,
        target_background_contrast,
        fg_bg_area_ratio,
    })
}

fn mean_of(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        sum += v;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Averages per-image attributes. Target count averages over every image.
pub fn aggregate_attributes(images: &[ImageAttributes]) -> Result<AttributeStats> {
    if images.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(AttributeStats {
        brightness_mean: mean_of(images.iter().map(|a| a.brightness_mean)),
        brightness_std: mean_of(images.iter().map(|a| a.brightness_std)),
        rms_contrast: mean_of(images.iter().map(|a| a.rms_contrast)),
        laplacian_noise: mean_of(images.iter().map(|a| a.laplacian_noise)),
        avg_target_count: mean_of(images.iter().map(|a| a.target_count as f64)),
        avg_target_size: mean_of(images.iter().filter_map(|a| a.mean_target_size)),
        target_background_contrast: mean_of(images.iter().filter_map(|a| a.target_background_contrast)),
        fg_bg_area_ratio: mean_of(images.iter().filter_map(|a| a.fg_bg_area_ratio)),
    })
}
