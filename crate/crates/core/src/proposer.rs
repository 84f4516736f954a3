//! Shape stage: boxes labeled circle or rectangle, each with an objectness
//! score.
//!
//! The built-in proposer is classical: threshold the frame, label connected
//! foreground regions, trace each region's outer boundary and call it a
//! circle when its circularity `4 pi A / P^2` clears a cutoff. Detections from
//! an external detector can be ingested instead.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::path::Path;

use image::GrayImage;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BBox, ShapeClass};
use crate::labels::parse_numbered_detections;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Threshold {
    /// Foreground is at or below (dark) / above (light) this intensity.
    Fixed(u8),
    /// Split that maximizes between-class intensity variance.
    Otsu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    /// Dark shapes on a light background.
    Dark,
    Light,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProposerParams {
    pub threshold: Threshold,
    pub polarity: Polarity,
    /// Regions with fewer pixels are ignored.
    pub min_area: u32,
    /// Regions at or above this circularity are circles.
    pub circularity_cutoff: f64,
    pub max_proposals: usize,
}

impl Default for ProposerParams {
    fn default() -> Self {
        Self {
            threshold: Threshold::Otsu,
            polarity: Polarity::Dark,
            min_area: 30,
            circularity_cutoff: 0.8,
            max_proposals: 100,
        }
    }
}

impl ProposerParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_area < 1 {
            return Err(Error::InvalidConfig("min_area must be at least 1".into()));
        }
        if !(self.circularity_cutoff > 0.0 && self.circularity_cutoff <= 1.0) {
            return Err(Error::InvalidConfig("circularity_cutoff must lie in (0, 1]".into()));
        }
        if self.max_proposals < 1 {
            return Err(Error::InvalidConfig("max_proposals must be at least 1".into()));
        }
        Ok(())
    }
}

/// Stage-one output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeDetection {
    pub shape: ShapeClass,
    pub bbox: BBox,
    pub objectness: f64,
}

/// Otsu split point: intensities `<= t` form the lower class. `None` when
/// the image holds a single intensity.
pub fn otsu_threshold(image: &GrayImage) -> Option<u8> {
    let mut hist = [0u64; 256];
    for p in image.pixels() {
        hist[p.0[0] as usize] += 1;
    }
    let total: u64 = hist.iter().sum();
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0) = (0u64, 0.0f64);
    let mut best: Option<(u8, f64)> = None;
    for t in 0..255usize {
        w0 += hist[t];
        sum0 += t as f64 * hist[t] as f64;
        let w1 = total - w0;
        if w0 == 0 || w1 == 0 {
            continue;
        }
        let m0 = sum0 / w0 as f64;
        let m1 = (sum_all - sum0) / w1 as f64;
        let between = w0 as f64 * w1 as f64 * (m0 - m1) * (m0 - m1);
        if best.is_none_or(|(_, b)| between > b) {
            best = Some((t as u8, between));
        }
    }
    best.map(|(t, _)| t)
}

/// Row-major foreground mask.
pub fn foreground_mask(image: &GrayImage, params: &ProposerParams) -> Vec<bool> {
    let t = match params.threshold {
        Threshold::Fixed(t) => Some(t),
        Threshold::Otsu => otsu_threshold(image),
    };
    let Some(t) = t else {
        return vec![false; image.as_raw().len()];
    };
    image
        .as_raw()
        .iter()
        .map(|&v| match params.polarity {
            Polarity::Dark => v <= t,
            Polarity::Light => v > t,
        })
        .collect()
}

// Clockwise in image coordinates (y down), starting east.
const DIRS: [(i64, i64); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

/// 8-connected regions as lists of row-major pixel indices, ordered by their
/// first pixel in raster order.
pub fn connected_regions(mask: &[bool], width: u32, height: u32) -> Vec<Vec<u32>> {
    let (w, h) = (width as i64, height as i64);
    let mut seen = vec![false; mask.len()];
    let mut regions = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..mask.len() {
        if !mask[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut region = Vec::new();
        while let Some(i) = queue.pop_front() {
            region.push(i as u32);
            let (x, y) = (i as i64 % w, i as i64 / w);
            for (dx, dy) in DIRS {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let j = (ny * w + nx) as usize;
                if mask[j] && !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        region.sort_unstable();
        regions.push(region);
    }
    regions
}

/// Geometry of one region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionStats {
    pub pixel_area: u64,
    /// Pixel extents; `x_max`/`y_max` are one past the last pixel.
    pub bbox: BBox,
    /// Length of the outer boundary chain through pixel centers, diagonal
    /// steps counting `sqrt(2)`.
    pub perimeter: f64,
    /// Area enclosed by that chain.
    pub chain_area: f64,
    pub circularity: f64,
}

/// Moore-neighbour trace of the outer boundary starting from the region's
/// first raster pixel. Returns the chain of step directions.
fn trace_boundary(inside: &dyn Fn(i64, i64) -> bool, start: (i64, i64), max_steps: usize) -> Vec<usize> {
    let mut chain = Vec::new();
    let mut cur = start;
    // the pixel west of the first raster pixel is background
    let mut back = 4usize;
    let mut first: Option<usize> = None;
    for _ in 0..max_steps {
        let next = (1..=8).map(|k| (back + k) % 8).find(|&d| {
            let (dx, dy) = DIRS[d];
            inside(cur.0 + dx, cur.1 + dy)
        });
        let Some(d) = next else {
            break; // isolated pixel
        };
        if cur == start && first == Some(d) {
            break;
        }
        first.get_or_insert(d);
        chain.push(d);
        // the last background neighbour examined, seen from the new pixel
        let prev = (d + 7) % 8;
        let bx = cur.0 + DIRS[prev].0;
        let by = cur.1 + DIRS[prev].1;
        cur = (cur.0 + DIRS[d].0, cur.1 + DIRS[d].1);
        let rel = (bx - cur.0, by - cur.1);
        back = DIRS.iter().position(|&o| o == rel).expect("adjacent cells");
    }
    chain
}

/// `region` holds row-major pixel indices of an image `width` pixels wide.
pub fn region_stats(region: &[u32], width: u32) -> RegionStats {
    let w = width as i64;
    let (mut x0, mut y0, mut x1, mut y1) = (i64::MAX, i64::MAX, i64::MIN, i64::MIN);
    for &i in region {
        let (x, y) = (i as i64 % w, i as i64 / w);
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    // local membership grid over the bounding box
    let (bw, bh) = (x1 - x0 + 1, y1 - y0 + 1);
    let mut local = vec![false; (bw * bh) as usize];
    for &i in region {
        let (x, y) = (i as i64 % w - x0, i as i64 / w - y0);
        local[(y * bw + x) as usize] = true;
    }
    let inside = |x: i64, y: i64| x >= 0 && y >= 0 && x < bw && y < bh && local[(y * bw + x) as usize];
    let first = region[0] as i64;
    let start = (first % w - x0, first / w - y0);
    let chain = trace_boundary(&inside, start, 4 * region.len() + 8);

    let mut perimeter = 0.0;
    let mut twice_area = 0.0;
    let (mut px, mut py) = (start.0 as f64, start.1 as f64);
    for &d in &chain {
        let (dx, dy) = DIRS[d];
        perimeter += if d % 2 == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
        let (nx, ny) = (px + dx as f64, py + dy as f64);
        twice_area += px * ny - nx * py;
        px = nx;
        py = ny;
    }
    let chain_area = twice_area.abs() / 2.0;
    let circularity = if perimeter > 0.0 {
        (4.0 * PI * chain_area / (perimeter * perimeter)).min(1.0)
    } else {
        0.0
    };
    RegionStats {
        pixel_area: region.len() as u64,
        bbox: BBox {
            x_min: x0 as f64,
            y_min: y0 as f64,
            x_max: (x1 + 1) as f64,
            y_max: (y1 + 1) as f64,
        },
        perimeter,
        chain_area,
        circularity,
    }
}

/// How completely the region fills the shape fitted to its box: the inscribed
/// ellipse for circles, the box itself for rectangles.
fn fill_ratio(stats: &RegionStats, shape: ShapeClass) -> f64 {
    let box_area = stats.bbox.area();
    let fitted = match shape {
        ShapeClass::Circle => PI * box_area / 4.0,
        ShapeClass::Rectangle => box_area,
    };
    let r = stats.pixel_area as f64 / fitted;
    if r > 1.0 {
        1.0 / r
    } else {
        r
    }
}

/// Proposes circles and rectangles in `image`, best objectness first.
pub fn propose_shapes(image: &GrayImage, params: &ProposerParams) -> Result<Vec<ShapeDetection>> {
    let (w, h) = image.dimensions();
    if w == 0 || h == 0 {
        return Err(Error::EmptyImage { width: w, height: h });
    }
    params.validate()?;
    let mask = foreground_mask(image, params);
    let mut out: Vec<ShapeDetection> = connected_regions(&mask, w, h)
        .iter()
        .filter(|r| r.len() as u64 >= params.min_area as u64)
        .map(|r| {
            let stats = region_stats(r, w);
            let shape = if stats.circularity >= params.circularity_cutoff {
                ShapeClass::Circle
            } else {
                ShapeClass::Rectangle
            };
            ShapeDetection {
                shape,
                bbox: stats.bbox,
                objectness: fill_ratio(&stats, shape).clamp(0.0, 1.0),
            }
        })
        .collect();
    // stable: equal scores keep raster order
    out.sort_by(|a, b| b.objectness.total_cmp(&a.objectness));
    out.truncate(params.max_proposals);
    Ok(out)
}

/// Parses `class cx cy w h confidence` lines (class 0 circle, 1 rectangle)
/// into pixel-space detections clipped to the frame.
pub fn parse_external_detections(text: &str, source: &str, img_w: u32, img_h: u32) -> Result<Vec<ShapeDetection>> {
    if img_w == 0 || img_h == 0 {
        return Err(Error::EmptyImage {
            width: img_w,
            height: img_h,
        });
    }
    parse_numbered_detections(text, source)?
        .into_iter()
        .map(|(line, d)| {
            let shape = ShapeClass::from_id(d.class_id).ok_or_else(|| {
                Error::parse(source, line, format!("class id {} is not a shape class (0 or 1)", d.class_id))
            })?;
            let bbox = d
                .label()
                .unit_box()
                .clip(1.0, 1.0);
            let bbox = BBox {
                x_min: bbox.x_min * img_w as f64,
                y_min: bbox.y_min * img_h as f64,
                x_max: bbox.x_max * img_w as f64,
                y_max: bbox.y_max * img_h as f64,
            };
            Ok(ShapeDetection {
                shape,
                bbox,
                objectness: d.confidence,
            })
        })
        .collect()
}

pub fn ingest_external_detections(path: &Path, img_w: u32, img_h: u32) -> Result<Vec<ShapeDetection>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_external_detections(&text, &path.display().to_string(), img_w, img_h)
}
