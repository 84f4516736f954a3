//! Image loading with a consistent grayscale conversion.

use std::path::Path;

use image::{DynamicImage, GrayImage};

use crate::classifier::to_grayscale;
use crate::error::{Error, Result};

/// Converts any decoded image to 8-bit grayscale. Color images go through
/// BT.601 luma; single-channel images keep their values.
pub fn gray_from_dynamic(img: DynamicImage) -> GrayImage {
    match img {
        DynamicImage::ImageLuma8(g) => g,
        DynamicImage::ImageLumaA8(_) | DynamicImage::ImageLuma16(_) | DynamicImage::ImageLumaA16(_) => img.to_luma8(),
        other => to_grayscale(&other.to_rgb8()),
    }
}

pub fn load_gray(path: &Path) -> Result<GrayImage> {
    let img = image::open(path).map_err(|e| Error::image(path, e))?;
    if img.width() == 0 || img.height() == 0 {
        return Err(Error::EmptyImage {
            width: img.width(),
            height: img.height(),
        });
    }
    Ok(gray_from_dynamic(img))
}

pub fn save_gray(img: &GrayImage, path: &Path) -> Result<()> {
    img.save(path).map_err(|e| Error::image(path, e))
}
