//! Rotation, shear, brightness and salt-and-pepper augmentation.
//!
//! The transforms run in a fixed order (rotation, shear, brightness, noise)
//! with every random parameter drawn up front from one seeded stream.

use image::{GrayImage, Luma};
use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::render::Label;
use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::seed::rng_from_seed;

/// Symmetric parameter ranges. Defaults: rotation ±45°, shear ±27° on each
/// axis, brightness ±63 %, noise on 5 % of pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AugConfig {
    pub rotation_deg: f64,
    pub shear_deg: f64,
    /// Relative brightness change; the factor is drawn from `[1 - b, 1 + b]`.
    pub brightness: f64,
    /// Fraction of pixels forced to pure black or white.
    pub salt_pepper: f64,
    /// Labels whose clipped area drops below this fraction of their
    /// transformed area are removed.
    pub visibility_floor: f64,
    /// Intensity for pixels warped in from outside the canvas.
    pub fill: u8,
}

impl Default for AugConfig {
    fn default() -> Self {
        Self {
            rotation_deg: 45.0,
            shear_deg: 27.0,
            brightness: 0.63,
            salt_pepper: 0.05,
            visibility_floor: 0.25,
            fill: 255,
        }
    }
}

impl AugConfig {
    /// All ranges zero: augmentation returns its input unchanged.
    pub fn identity() -> Self {
        Self {
            rotation_deg: 0.0,
            shear_deg: 0.0,
            brightness: 0.0,
            salt_pepper: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ranges = [self.rotation_deg, self.shear_deg, self.brightness];
        if ranges.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::InvalidConfig(
                "augmentation ranges must be finite and non-negative".into(),
            ));
        }
        if self.shear_deg >= 45.0 {
            return Err(Error::InvalidConfig("shear range must stay below 45 degrees".into()));
        }
        if self.brightness > 1.0 {
            return Err(Error::InvalidConfig("brightness range must be at most 1".into()));
        }
        if !(0.0..=1.0).contains(&self.salt_pepper) || !(0.0..=1.0).contains(&self.visibility_floor) {
            return Err(Error::InvalidConfig(
                "salt_pepper and visibility_floor must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Concrete draw of the augmentation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugParams {
    pub rotation_deg: f64,
    pub shear_x_deg: f64,
    pub shear_y_deg: f64,
    pub brightness_factor: f64,
}

fn symmetric(rng: &mut impl Rng, range: f64) -> f64 {
    if range > 0.0 {
        rng.gen_range(-range..=range)
    } else {
        0.0
    }
}

impl AugParams {
    pub const IDENTITY: AugParams = AugParams {
        rotation_deg: 0.0,
        shear_x_deg: 0.0,
        shear_y_deg: 0.0,
        brightness_factor: 1.0,
    };

    pub fn sample(cfg: &AugConfig, rng: &mut impl Rng) -> Self {
        let rotation_deg = symmetric(rng, cfg.rotation_deg);
        let shear_x_deg = symmetric(rng, cfg.shear_deg);
        let shear_y_deg = symmetric(rng, cfg.shear_deg);
        let brightness_factor = 1.0 + symmetric(rng, cfg.brightness);
        Self {
            rotation_deg,
            shear_x_deg,
            shear_y_deg,
            brightness_factor,
        }
    }

    pub fn is_geometric_identity(&self) -> bool {
        self.rotation_deg == 0.0 && self.shear_x_deg == 0.0 && self.shear_y_deg == 0.0
    }

    /// Rotation followed by horizontal then vertical shear, about the canvas
    /// center.
    pub fn affine(&self, width: u32, height: u32) -> Affine {
        let (s, c) = self.rotation_deg.to_radians().sin_cos();
        let tx = self.shear_x_deg.to_radians().tan();
        let ty = self.shear_y_deg.to_radians().tan();
        let rot = [[c, -s], [s, c]];
        let shear = [[1.0, tx], [ty, 1.0 + tx * ty]];
        Affine {
            m: mul(shear, rot),
            center: (width as f64 / 2.0, height as f64 / 2.0),
        }
    }
}

fn mul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

/// Linear map about a fixed center point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub m: [[f64; 2]; 2],
    pub center: (f64, f64),
}

impl Affine {
    pub fn apply(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let (dx, dy) = (x - self.center.0, y - self.center.1);
        (
            self.m[0][0] * dx + self.m[0][1] * dy + self.center.0,
            self.m[1][0] * dx + self.m[1][1] * dy + self.center.1,
        )
    }

    pub fn inverse(&self) -> Affine {
        let [[a, b], [c, d]] = self.m;
        let det = a * d - b * c;
        Affine {
            m: [[d / det, -b / det], [-c / det, a / det]],
            center: self.center,
        }
    }

    /// Axis-aligned box enclosing the four transformed corners, unclipped.
    pub fn transform_box(&self, b: &BBox) -> BBox {
        BBox::enclosing(b.corners().map(|p| self.apply(p))).expect("four corners")
    }
}

/// Inverse-maps every output pixel center and samples bilinearly. Source
/// pixels outside the canvas read as `fill`.
pub fn warp(image: &GrayImage, affine: &Affine, fill: u8) -> GrayImage {
    let (w, h) = image.dimensions();
    let inv = affine.inverse();
    let fetch = |x: i64, y: i64| -> f64 {
        if x < 0 || y < 0 || x >= w as i64 || y >= h as i64 {
            fill as f64
        } else {
            image.get_pixel(x as u32, y as u32).0[0] as f64
        }
    };
    GrayImage::from_fn(w, h, |x, y| {
        let (sx, sy) = inv.apply((x as f64 + 0.5, y as f64 + 0.5));
        let (u, v) = (sx - 0.5, sy - 0.5);
        let (x0, y0) = (u.floor(), v.floor());
        let (fx, fy) = (u - x0, v - y0);
        let (x0, y0) = (x0 as i64, y0 as i64);
        let top = fetch(x0, y0) * (1.0 - fx) + fetch(x0 + 1, y0) * fx;
        let bottom = fetch(x0, y0 + 1) * (1.0 - fx) + fetch(x0 + 1, y0 + 1) * fx;
        let value = top * (1.0 - fy) + bottom * fy;
        Luma([value.round().clamp(0.0, 255.0) as u8])
    })
}

/// Multiplies every intensity by `factor`, rounding and clamping to `[0, 255]`.
pub fn adjust_brightness(image: &mut GrayImage, factor: f64) {
    if factor == 1.0 {
        return;
    }
    for p in image.pixels_mut() {
        p.0[0] = (p.0[0] as f64 * factor).round().clamp(0.0, 255.0) as u8;
    }
}

/// Pixels touched by salt-and-pepper noise, as row-major indices. The first
/// `salt` entries were set to 255, the rest to 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseRecord {
    pub pixels: Vec<u32>,
    pub salt: usize,
}

impl NoiseRecord {
    pub fn pepper(&self) -> usize {
        self.pixels.len() - self.salt
    }
}

/// Number of noisy pixels for `fraction` of `pixel_count`, rounded down.
pub fn noise_pixel_count(fraction: f64, pixel_count: usize) -> usize {
    ((fraction * pixel_count as f64) + 1e-9).floor() as usize
}

/// Sets exactly `noise_pixel_count(fraction, N)` distinct pixels to black or
/// white: half pepper, the remainder salt.
pub fn salt_and_pepper(image: &mut GrayImage, fraction: f64, rng: &mut impl Rng) -> NoiseRecord {
    let n_pixels = (image.width() * image.height()) as usize;
    let n = noise_pixel_count(fraction, n_pixels).min(n_pixels);
    let pixels: Vec<u32> = index::sample(rng, n_pixels, n)
        .into_iter()
        .map(|i| i as u32)
        .collect();
    let salt = n - n / 2;
    let buf: &mut [u8] = image;
    for (k, &i) in pixels.iter().enumerate() {
        buf[i as usize] = if k < salt { 255 } else { 0 };
    }
    NoiseRecord { pixels, salt }
}

/// Maps labels through `affine`: enclosing box of the transformed corners,
/// clipped to the canvas, dropped when less than `floor` of it stays visible.
pub fn transform_labels(labels: &[Label], affine: &Affine, width: u32, height: u32, floor: f64) -> Vec<Label> {
    labels
        .iter()
        .filter_map(|l| {
            let moved = affine.transform_box(&l.bbox);
            let clipped = moved.clip(width as f64, height as f64);
            let full = moved.area();
            (full > 0.0 && clipped.area() >= floor * full).then_some(Label {
                class: l.class,
                bbox: clipped,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugRecord {
    pub params: AugParams,
    pub noise: NoiseRecord,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Augmented {
    pub image: GrayImage,
    pub labels: Vec<Label>,
    pub record: AugRecord,
}

/// Applies already-drawn parameters for the deterministic stages (warp and
/// brightness). Noise is added separately.
pub fn apply_params(
    image: &GrayImage,
    labels: &[Label],
    params: &AugParams,
    cfg: &AugConfig,
) -> (GrayImage, Vec<Label>) {
    let (w, h) = image.dimensions();
    let (mut out, labels) = if params.is_geometric_identity() {
        (image.clone(), labels.to_vec())
    } else {
        let affine = params.affine(w, h);
        (
            warp(image, &affine, cfg.fill),
            transform_labels(labels, &affine, w, h, cfg.visibility_floor),
        )
    };
    adjust_brightness(&mut out, params.brightness_factor);
    (out, labels)
}

/// One random augmentation of `image`, deterministic in `seed`.
pub fn augment(image: &GrayImage, labels: &[Label], cfg: &AugConfig, seed: u64) -> Augmented {
    let mut rng = rng_from_seed(seed);
    let params = AugParams::sample(cfg, &mut rng);
    let (mut out, labels) = apply_params(image, labels, &params, cfg);
    let noise = salt_and_pepper(&mut out, cfg.salt_pepper, &mut rng);
    Augmented {
        image: out,
        labels,
        record: AugRecord { params, noise },
    }
}
