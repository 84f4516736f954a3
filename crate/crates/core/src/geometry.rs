//! Bounding boxes, class taxonomies and IoU.
//!
//! Boxes use continuous pixel coordinates in corner form with the origin at
//! the top-left of the image. Center/size form only appears at file
//! boundaries (YOLO label files).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box in pixel space. `x_min <= x_max` and `y_min <= y_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl BBox {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Result<Self> {
        let finite = [x_min, y_min, x_max, y_max].iter().all(|v| v.is_finite());
        if !finite || x_min > x_max || y_min > y_max {
            return Err(Error::InvalidBox {
                x_min,
                y_min,
                x_max,
                y_max,
            });
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    /// Box from a center point and size, both in pixels.
    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        Self::new(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0)
    }

    /// Smallest box containing every point. `None` for an empty iterator.
    pub fn enclosing(points: impl IntoIterator<Item = (f64, f64)>) -> Option<Self> {
        let mut it = points.into_iter();
        let (x, y) = it.next()?;
        let mut b = Self {
            x_min: x,
            y_min: y,
            x_max: x,
            y_max: y,
        };
        for (x, y) in it {
            b.x_min = b.x_min.min(x);
            b.y_min = b.y_min.min(y);
            b.x_max = b.x_max.max(x);
            b.y_max = b.y_max.max(y);
        }
        Some(b)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.x_min + self.x_max) / 2.0,
            (self.y_min + self.y_max) / 2.0,
        )
    }

    pub fn is_degenerate(&self) -> bool {
        self.area() <= 0.0
    }

    pub fn corners(&self) -> [(f64, f64); 4] {
        [
            (self.x_min, self.y_min),
            (self.x_max, self.y_min),
            (self.x_max, self.y_max),
            (self.x_min, self.y_max),
        ]
    }

    /// Overlap area with `other`, zero when disjoint.
    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let w = self.x_max.min(other.x_max) - self.x_min.max(other.x_min);
        let h = self.y_max.min(other.y_max) - self.y_min.max(other.y_min);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    pub fn contains(&self, other: &BBox) -> bool {
        self.x_min <= other.x_min
            && self.y_min <= other.y_min
            && self.x_max >= other.x_max
            && self.y_max >= other.y_max
    }

    pub fn iou(&self, other: &BBox) -> f64 {
        iou(self, other)
    }

    pub fn clip(&self, img_w: f64, img_h: f64) -> BBox {
        clip(self, img_w, img_h)
    }

    /// Center/size form as fractions of the image dimensions.
    pub fn to_normalized(&self, img_w: f64, img_h: f64) -> (f64, f64, f64, f64) {
        let (cx, cy) = self.center();
        (cx / img_w, cy / img_h, self.width() / img_w, self.height() / img_h)
    }
}

impl fmt::Display for BBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            self.x_min, self.y_min, self.x_max, self.y_max
        )
    }
}

/// Intersection over union. Zero whenever the union is empty, so degenerate
/// boxes never match anything.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).min(1.0)
    }
}

/// Converts a YOLO center/size box (fractions of the image) to pixel corners.
pub fn bbox_from_normalized(
    cx: f64,
    cy: f64,
    w: f64,
    h: f64,
    img_w: u32,
    img_h: u32,
) -> Result<BBox> {
    if img_w == 0 || img_h == 0 {
        return Err(Error::EmptyImage {
            width: img_w,
            height: img_h,
        });
    }
    for (name, value) in [("cx", cx), ("cy", cy), ("w", w), ("h", h)] {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::NormalizedOutOfRange { name, value });
        }
    }
    let (iw, ih) = (img_w as f64, img_h as f64);
    BBox::new(
        (cx - w / 2.0) * iw,
        (cy - h / 2.0) * ih,
        (cx + w / 2.0) * iw,
        (cy + h / 2.0) * ih,
    )
}

/// Intersects `b` with the frame `[0, img_w] x [0, img_h]`. A box entirely
/// outside the frame collapses onto the nearest frame edge.
pub fn clip(b: &BBox, img_w: f64, img_h: f64) -> BBox {
    BBox {
        x_min: b.x_min.clamp(0.0, img_w),
        y_min: b.y_min.clamp(0.0, img_h),
        x_max: b.x_max.clamp(0.0, img_w),
        y_max: b.y_max.clamp(0.0, img_h),
    }
}

/// Classes the shape stage can propose. Ids match the label files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeClass {
    Circle,
    Rectangle,
}

impl ShapeClass {
    pub const ALL: [ShapeClass; 2] = [ShapeClass::Circle, ShapeClass::Rectangle];

    pub fn id(self) -> usize {
        self as usize
    }

    pub fn from_id(id: usize) -> Option<Self> {
        Self::ALL.get(id).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ShapeClass::Circle => "circle",
            ShapeClass::Rectangle => "rectangle",
        }
    }

    /// Component classes whose silhouettes read as this shape.
    pub fn components(self) -> [ComponentClass; 2] {
        match self {
            ShapeClass::Circle => [ComponentClass::Antenna, ComponentClass::Thruster],
            ShapeClass::Rectangle => [ComponentClass::Body, ComponentClass::SolarPanel],
        }
    }
}

impl fmt::Display for ShapeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShapeClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "circle" | "circular" => Ok(ShapeClass::Circle),
            "rectangle" | "rectangular" => Ok(ShapeClass::Rectangle),
            other => Err(Error::InvalidConfig(format!("unknown shape class '{other}'"))),
        }
    }
}

/// Spacecraft component classes in canonical order. The order fixes the
/// layout of every per-class vector (probabilities, weights, counts).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentClass {
    Antenna,
    Body,
    Thruster,
    SolarPanel,
}

impl ComponentClass {
    pub const ALL: [ComponentClass; 4] = [
        ComponentClass::Antenna,
        ComponentClass::Body,
        ComponentClass::Thruster,
        ComponentClass::SolarPanel,
    ];

    pub const COUNT: usize = 4;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ComponentClass::Antenna => "antenna",
            ComponentClass::Body => "body",
            ComponentClass::Thruster => "thruster",
            ComponentClass::SolarPanel => "solar_panel",
        }
    }

    /// The shape branch this component is expected to be proposed under.
    pub fn branch(self) -> ShapeClass {
        match self {
            ComponentClass::Antenna | ComponentClass::Thruster => ShapeClass::Circle,
            ComponentClass::Body | ComponentClass::SolarPanel => ShapeClass::Rectangle,
        }
    }
}

impl fmt::Display for ComponentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ComponentClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', ' '], "_").as_str() {
            "antenna" => Ok(ComponentClass::Antenna),
            "body" => Ok(ComponentClass::Body),
            "thruster" => Ok(ComponentClass::Thruster),
            "solar_panel" | "solar" | "solarpanel" => Ok(ComponentClass::SolarPanel),
            other => Err(Error::InvalidConfig(format!(
                "unknown component class '{other}'"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bb(x0: f64, y0: f64, x1: f64, y1: f64) -> BBox {
        BBox::new(x0, y0, x1, y1).unwrap()
    }

    #[test]
    fn iou_identity_disjoint_and_partial() {
        let b = bb(3.0, 4.0, 10.0, 12.5);
        assert_eq!(iou(&b, &b), 1.0);
        assert_eq!(iou(&bb(0.0, 0.0, 1.0, 1.0), &bb(2.0, 2.0, 3.0, 3.0)), 0.0);
        // intersection 2, union 6
        let v = iou(&bb(0.0, 0.0, 2.0, 2.0), &bb(1.0, 0.0, 3.0, 2.0));
        assert!((v - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_boxes_never_match() {
        let p = bb(5.0, 5.0, 5.0, 5.0);
        assert_eq!(iou(&p, &p), 0.0);
        assert_eq!(iou(&p, &bb(0.0, 0.0, 10.0, 10.0)), 0.0);
    }

    #[test]
    fn rejects_inverted_corners() {
        assert!(BBox::new(2.0, 0.0, 1.0, 1.0).is_err());
        assert!(BBox::new(0.0, 0.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn normalized_conversion() {
        assert_eq!(
            bbox_from_normalized(0.5, 0.5, 1.0, 1.0, 640, 480).unwrap(),
            bb(0.0, 0.0, 640.0, 480.0)
        );
        let d = bbox_from_normalized(0.5, 0.5, 0.0, 0.0, 33, 17).unwrap();
        assert_eq!(d, bb(16.5, 8.5, 16.5, 8.5));
        assert!(d.is_degenerate());
        assert_eq!(
            bbox_from_normalized(0.25, 0.25, 0.5, 0.5, 100, 100).unwrap(),
            bb(0.0, 0.0, 50.0, 50.0)
        );
        assert!(matches!(
            bbox_from_normalized(1.2, 0.5, 0.1, 0.1, 10, 10),
            Err(Error::NormalizedOutOfRange { name: "cx", .. })
        ));
        assert!(bbox_from_normalized(0.5, 0.5, 0.1, 0.1, 0, 10).is_err());
    }

    #[test]
    fn clip_cases() {
        let inside = bb(10.0, 10.0, 20.0, 30.0);
        assert_eq!(clip(&inside, 100.0, 100.0), inside);
        assert_eq!(
            clip(&bb(-10.0, -10.0, 5.0, 5.0), 100.0, 100.0),
            bb(0.0, 0.0, 5.0, 5.0)
        );
        let out = clip(&bb(200.0, 200.0, 300.0, 300.0), 100.0, 100.0);
        assert_eq!(out, bb(100.0, 100.0, 100.0, 100.0));
        assert_eq!(out.area(), 0.0);
    }

    #[test]
    fn branch_map_partitions_components() {
        let mut seen: Vec<ComponentClass> = ShapeClass::ALL
            .iter()
            .flat_map(|s| s.components())
            .collect();
        seen.sort();
        assert_eq!(seen, ComponentClass::ALL.to_vec());
        for c in ComponentClass::ALL {
            assert!(c.branch().components().contains(&c));
        }
    }

    #[test]
    fn class_names_round_trip() {
        for c in ComponentClass::ALL {
            assert_eq!(c.name().parse::<ComponentClass>().unwrap(), c);
        }
        for s in ShapeClass::ALL {
            assert_eq!(s.name().parse::<ShapeClass>().unwrap(), s);
            assert_eq!(ShapeClass::from_id(s.id()), Some(s));
        }
        assert!("triangle".parse::<ShapeClass>().is_err());
    }

    fn arb_box() -> impl Strategy<Value = BBox> {
        (-50.0..150.0f64, -50.0..150.0f64, 0.0..80.0f64, 0.0..80.0f64)
            .prop_map(|(x, y, w, h)| bb(x, y, x + w, y + h))
    }

    proptest! {
        #[test]
        fn iou_symmetric_and_bounded(a in arb_box(), b in arb_box()) {
            let ab = iou(&a, &b);
            prop_assert_eq!(ab, iou(&b, &a));
            prop_assert!((0.0..=1.0).contains(&ab));
        }

        #[test]
        fn iou_one_only_for_equal_boxes(a in arb_box(), b in arb_box()) {
            if iou(&a, &b) == 1.0 {
                prop_assert_eq!(a, b);
            }
            if a.area() > 0.0 {
                prop_assert_eq!(iou(&a, &a), 1.0);
            }
        }

        #[test]
        fn clip_idempotent_and_inside(a in arb_box()) {
            let once = clip(&a, 100.0, 80.0);
            prop_assert_eq!(clip(&once, 100.0, 80.0), once);
            prop_assert!(BBox::new(0.0, 0.0, 100.0, 80.0).unwrap().contains(&once));
        }
    }
}
