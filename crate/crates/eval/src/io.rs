//! Grayscale mask and image files.
//!
//! Supported by extension: `png` (any bit depth or color type, reduced to
//! 8-bit luma), `pgm` (P2/P5, samples read as-is, 16-bit reduced to 8-bit),
//! and `raw` (little-endian `u32` height, `u32` width, then `height * width`
//! bytes in row-major order).

use std::fs;
use std::path::Path;

use hiou_core::{BinaryMask, GrayImage, ScoreMask};

use crate::error::{EvalError, Result};

pub const EXTENSIONS: [&str; 3] = ["png", "pgm", "raw"];

pub fn is_supported(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

fn decode_error(path: &Path, reason: impl ToString) -> EvalError {
    EvalError::Decode {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

fn decode_raw(path: &Path, bytes: &[u8]) -> Result<GrayImage> {
    if bytes.len() < 8 {
        return Err(decode_error(path, "raw header shorter than 8 bytes"));
    }
    let height = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as usize;
    let width = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    GrayImage::new(height, width, bytes[8..].to_vec()).map_err(|source| EvalError::Mask {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_gray(path: &Path) -> Result<GrayImage> {
    let bytes = fs::read(path).map_err(EvalError::io(path))?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    if ext == "raw" {
        return decode_raw(path, &bytes);
    }
    let format = match ext.as_str() {
        "png" => image::ImageFormat::Png,
        "pgm" => image::ImageFormat::Pnm,
        _ => return Err(decode_error(path, "unsupported extension")),
    };
    let img = image::load_from_memory_with_format(&bytes, format).map_err(|e| decode_error(path, e))?;
    let luma = img.into_luma8();
    let (w, h) = luma.dimensions();
    GrayImage::new(h as usize, w as usize, luma.into_raw()).map_err(|source| EvalError::Mask {
        path: path.to_path_buf(),
        source,
    })
}

/// Prediction scores as intensity / 255.
pub fn read_scores(path: &Path) -> Result<ScoreMask> {
    Ok(read_gray(path)?.to_scores())
}

/// GT mask: every nonzero pixel is foreground.
pub fn read_mask(path: &Path) -> Result<BinaryMask> {
    Ok(read_gray(path)?.to_binary_nonzero())
}

/// Writes a mask as 8-bit PNG with foreground 255.
pub fn write_mask_png(path: &Path, mask: &BinaryMask) -> Result<()> {
    write_gray_png(path, &GrayImage::new(mask.height(), mask.width(), mask.to_u8())?)
}

pub fn write_gray_png(path: &Path, img: &GrayImage) -> Result<()> {
    let buf = image::GrayImage::from_raw(img.width() as u32, img.height() as u32, img.data().to_vec())
        .expect("buffer matches dimensions");
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(source) => EvalError::Io {
                path: path.to_path_buf(),
                source,
            },
            other => decode_error(path, other),
        })
}

pub fn write_raw(path: &Path, img: &GrayImage) -> Result<()> {
    let mut bytes = Vec::with_capacity(8 + img.data().len());
    bytes.extend_from_slice(&(img.height() as u32).to_le_bytes());
    bytes.extend_from_slice(&(img.width() as u32).to_le_bytes());
    bytes.extend_from_slice(img.data());
    fs::write(path, bytes).map_err(EvalError::io(path))
}
