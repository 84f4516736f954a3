//! Scene rendering: dark filled shapes on a light canvas.

use image::{GrayImage, Luma};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{BBox, ShapeClass};
use crate::seed::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Circle,
    Rectangle,
    Triangle,
}

/// Geometry in pixels. Circles and rectangles use integer-valued parameters
/// so their rendered extents coincide with their boxes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeGeometry {
    Circle { cx: f64, cy: f64, radius: f64 },
    Rectangle { x: f64, y: f64, width: f64, height: f64 },
    Triangle { vertices: [(f64, f64); 3] },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub geometry: ShapeGeometry,
    pub intensity: u8,
}

impl ShapeSpec {
    pub fn circle(cx: f64, cy: f64, radius: f64, intensity: u8) -> Self {
        Self {
            geometry: ShapeGeometry::Circle { cx, cy, radius },
            intensity,
        }
    }

    pub fn rectangle(x: f64, y: f64, width: f64, height: f64, intensity: u8) -> Self {
        Self {
            geometry: ShapeGeometry::Rectangle {
                x,
                y,
                width,
                height,
            },
            intensity,
        }
    }

    pub fn triangle(vertices: [(f64, f64); 3], intensity: u8) -> Self {
        Self {
            geometry: ShapeGeometry::Triangle { vertices },
            intensity,
        }
    }

    pub fn kind(&self) -> ShapeKind {
        match self.geometry {
            ShapeGeometry::Circle { .. } => ShapeKind::Circle,
            ShapeGeometry::Rectangle { .. } => ShapeKind::Rectangle,
            ShapeGeometry::Triangle { .. } => ShapeKind::Triangle,
        }
    }

    /// Detectable class; triangles are unlabeled distractors.
    pub fn shape_class(&self) -> Option<ShapeClass> {
        match self.kind() {
            ShapeKind::Circle => Some(ShapeClass::Circle),
            ShapeKind::Rectangle => Some(ShapeClass::Rectangle),
            ShapeKind::Triangle => None,
        }
    }

    pub fn bbox(&self) -> BBox {
        match self.geometry {
            ShapeGeometry::Circle { cx, cy, radius } => BBox {
                x_min: cx - radius,
                y_min: cy - radius,
                x_max: cx + radius,
                y_max: cy + radius,
            },
            ShapeGeometry::Rectangle {
                x,
                y,
                width,
                height,
            } => BBox {
                x_min: x,
                y_min: y,
                x_max: x + width,
                y_max: y + height,
            },
            ShapeGeometry::Triangle { vertices } => {
                BBox::enclosing(vertices).expect("three vertices")
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.geometry {
            ShapeGeometry::Circle { radius, .. } => radius > 0.0,
            ShapeGeometry::Rectangle { width, height, .. } => width > 0.0 && height > 0.0,
            ShapeGeometry::Triangle { vertices: [a, b, c] } => {
                ((b.0 - a.0) * (c.1 - a.1) - (c.0 - a.0) * (b.1 - a.1)).abs() > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("degenerate shape {self:?}")))
        }
    }

    /// Whether the pixel whose center is `(px, py)` lies inside the shape.
    pub fn covers(&self, px: f64, py: f64) -> bool {
        match self.geometry {
            ShapeGeometry::Circle { cx, cy, radius } => {
                let (dx, dy) = (px - cx, py - cy);
                dx * dx + dy * dy <= radius * radius
            }
            ShapeGeometry::Rectangle {
                x,
                y,
                width,
                height,
            } => px >= x && px < x + width && py >= y && py < y + height,
            ShapeGeometry::Triangle { vertices: [a, b, c] } => {
                let edge = |p: (f64, f64), q: (f64, f64)| {
                    (q.0 - p.0) * (py - p.1) - (q.1 - p.1) * (px - p.0)
                };
                let (d1, d2, d3) = (edge(a, b), edge(b, c), edge(c, a));
                let neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
                let pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
                !(neg && pos)
            }
        }
    }

    pub fn render(&self, canvas: &mut GrayImage) {
        let b = self.bbox().clip(canvas.width() as f64, canvas.height() as f64);
        let (x0, y0) = (b.x_min.floor() as u32, b.y_min.floor() as u32);
        let (x1, y1) = (b.x_max.ceil() as u32, b.y_max.ceil() as u32);
        for y in y0..y1 {
            for x in x0..x1 {
                if self.covers(x as f64 + 0.5, y as f64 + 0.5) {
                    canvas.put_pixel(x, y, Luma([self.intensity]));
                }
            }
        }
    }
}

/// Labeled object in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Label {
    pub class: ShapeClass,
    pub bbox: BBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneConfig {
    pub width: u32,
    pub height: u32,
    pub min_shapes: usize,
    pub max_shapes: usize,
    /// Shape extent range in pixels (diameter, side or triangle span).
    pub min_size: u32,
    pub max_size: u32,
    /// Fill intensity range, inclusive.
    pub fill_min: u8,
    pub fill_max: u8,
    pub background: u8,
    /// Relative odds of circle, rectangle, triangle.
    pub kind_weights: [f64; 3],
    /// Minimum gap between shape boxes.
    pub gap: f64,
    pub max_attempts: usize,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            width: 416,
            height: 416,
            min_shapes: 3,
            max_shapes: 8,
            min_size: 24,
            max_size: 96,
            fill_min: 0,
            fill_max: 96,
            background: 255,
            kind_weights: [1.0, 1.0, 1.0],
            gap: 4.0,
            max_attempts: 500,
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.width == 0 || self.height == 0 {
            return Err(Error::EmptyImage {
                width: self.width,
                height: self.height,
            });
        }
        if self.min_shapes > self.max_shapes {
            return bad("min_shapes exceeds max_shapes");
        }
        if self.min_size < 2 || self.min_size > self.max_size {
            return bad("shape size range must satisfy 2 <= min_size <= max_size");
        }
        if self.fill_min > self.fill_max {
            return bad("fill_min exceeds fill_max");
        }
        if self.kind_weights.iter().any(|w| *w < 0.0 || !w.is_finite())
            || self.kind_weights.iter().sum::<f64>() <= 0.0
        {
            return bad("kind_weights must be non-negative with a positive sum");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub image: GrayImage,
    pub labels: Vec<Label>,
    pub shapes: Vec<ShapeSpec>,
}

impl Scene {
    /// Renders `shapes` in order on a blank canvas; later shapes paint over
    /// earlier ones.
    pub fn from_shapes(width: u32, height: u32, background: u8, shapes: Vec<ShapeSpec>) -> Self {
        let mut image = GrayImage::from_pixel(width, height, Luma([background]));
        for s in &shapes {
            s.render(&mut image);
        }
        let labels = shapes
            .iter()
            .filter_map(|s| {
                s.shape_class().map(|class| Label {
                    class,
                    bbox: s.bbox(),
                })
            })
            .collect();
        Self {
            image,
            labels,
            shapes,
        }
    }
}

fn sample_shape(cfg: &SceneConfig, rng: &mut impl Rng) -> ShapeSpec {
    let total: f64 = cfg.kind_weights.iter().sum();
    let mut pick = rng.gen_range(0.0..total);
    let mut kind = ShapeKind::Triangle;
    for (k, w) in [ShapeKind::Circle, ShapeKind::Rectangle, ShapeKind::Triangle]
        .into_iter()
        .zip(cfg.kind_weights)
    {
        if w > 0.0 && pick < w {
            kind = k;
            break;
        }
        pick -= w;
    }
    let max_size = cfg.max_size.min(cfg.width).min(cfg.height).max(1);
    let min_size = cfg.min_size.min(max_size);
    let size = |rng: &mut dyn rand::RngCore| rng.gen_range(min_size..=max_size) as f64;
    let intensity = rng.gen_range(cfg.fill_min..=cfg.fill_max);
    let (w, h) = (cfg.width as f64, cfg.height as f64);
    match kind {
        ShapeKind::Circle => {
            let r = (size(rng) / 2.0).floor().max(1.0);
            let cx = rng.gen_range(r as u32..=(w - r) as u32) as f64;
            let cy = rng.gen_range(r as u32..=(h - r) as u32) as f64;
            ShapeSpec::circle(cx, cy, r, intensity)
        }
        ShapeKind::Rectangle => {
            let (sw, sh) = (size(rng), size(rng));
            let x = rng.gen_range(0..=(w - sw) as u32) as f64;
            let y = rng.gen_range(0..=(h - sh) as u32) as f64;
            ShapeSpec::rectangle(x, y, sw, sh, intensity)
        }
        ShapeKind::Triangle => {
            let s = size(rng);
            let x = rng.gen_range(0..=(w - s) as u32) as f64;
            let y = rng.gen_range(0..=(h - s) as u32) as f64;
            let apex = x + (rng.gen_range(0..=s as u32) as f64);
            ShapeSpec::triangle([(x, y + s), (x + s, y + s), (apex, y)], intensity)
        }
    }
}

fn overlaps(a: &BBox, b: &BBox, gap: f64) -> bool {
    a.x_min < b.x_max + gap && b.x_min < a.x_max + gap && a.y_min < b.y_max + gap && b.y_min < a.y_max + gap
}

/// Random non-overlapping shapes on a blank canvas, deterministic in `seed`.
/// Circles and rectangles are labeled with their exact extents; triangles are
/// drawn but left unlabeled.
pub fn generate_base_image(cfg: &SceneConfig, seed: u64) -> Result<Scene> {
    cfg.validate()?;
    let mut rng = rng_from_seed(seed);
    let count = rng.gen_range(cfg.min_shapes..=cfg.max_shapes);
    let mut shapes: Vec<ShapeSpec> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut placed = false;
        for _ in 0..cfg.max_attempts.max(1) {
            let candidate = sample_shape(cfg, &mut rng);
            let b = candidate.bbox();
            if shapes.iter().all(|s| !overlaps(&s.bbox(), &b, cfg.gap)) {
                shapes.push(candidate);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::PlacementFailed {
                requested: count,
                width: cfg.width,
                height: cfg.height,
                attempts: cfg.max_attempts,
            });
        }
    }
    Ok(Scene::from_shapes(cfg.width, cfg.height, cfg.background, shapes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_shapes_gives_blank_canvas() {
        let cfg = SceneConfig {
            min_shapes: 0,
            max_shapes: 0,
            ..SceneConfig::default()
        };
        let scene = generate_base_image(&cfg, 1).unwrap();
        assert!(scene.labels.is_empty());
        assert!(scene.image.pixels().all(|p| p.0[0] == 255));
    }

    #[test]
    fn circle_label_is_tight() {
        let scene = Scene::from_shapes(100, 100, 255, vec![ShapeSpec::circle(50.0, 40.0, 12.0, 0)]);
        assert_eq!(
            scene.labels,
            vec![Label {
                class: ShapeClass::Circle,
                bbox: BBox::new(38.0, 28.0, 62.0, 52.0).unwrap()
            }]
        );
        // rendered extents match the label exactly
        let dark: Vec<(u32, u32)> = scene
            .image
            .enumerate_pixels()
            .filter(|(_, _, p)| p.0[0] == 0)
            .map(|(x, y, _)| (x, y))
            .collect();
        assert_eq!(dark.iter().map(|p| p.0).min(), Some(38));
        assert_eq!(dark.iter().map(|p| p.0).max(), Some(61));
        assert_eq!(dark.iter().map(|p| p.1).min(), Some(28));
        assert_eq!(dark.iter().map(|p| p.1).max(), Some(51));
    }

    #[test]
    fn triangles_are_unlabeled() {
        let scene = Scene::from_shapes(
            50,
            50,
            255,
            vec![ShapeSpec::triangle([(5.0, 30.0), (30.0, 30.0), (10.0, 5.0)], 10)],
        );
        assert!(scene.labels.is_empty());
        assert!(scene.image.pixels().any(|p| p.0[0] == 10));
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = SceneConfig::default();
        let a = generate_base_image(&cfg, 42).unwrap();
        let b = generate_base_image(&cfg, 42).unwrap();
        assert_eq!(a, b);
        let c = generate_base_image(&cfg, 43).unwrap();
        assert_ne!(a.shapes, c.shapes);
    }

    #[test]
    fn shapes_stay_inside_and_apart() {
        let cfg = SceneConfig::default();
        for seed in 0..20 {
            let scene = generate_base_image(&cfg, seed).unwrap();
            let frame = BBox::new(0.0, 0.0, 416.0, 416.0).unwrap();
            for (i, a) in scene.shapes.iter().enumerate() {
                a.validate().unwrap();
                assert!(frame.contains(&a.bbox()));
                for b in &scene.shapes[i + 1..] {
                    assert_eq!(a.bbox().intersection_area(&b.bbox()), 0.0);
                }
            }
        }
    }

    #[test]
    fn crowded_canvas_fails_explicitly() {
        let cfg = SceneConfig {
            width: 40,
            height: 40,
            min_shapes: 30,
            max_shapes: 30,
            min_size: 20,
            max_size: 20,
            max_attempts: 50,
            ..SceneConfig::default()
        };
        assert!(matches!(
            generate_base_image(&cfg, 0),
            Err(Error::PlacementFailed { .. })
        ));
    }
}
