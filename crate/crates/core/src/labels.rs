//! YOLO-style text files: ground-truth labels (`class cx cy w h`), detections
//! (`class cx cy w h confidence`) and class-name maps (one name per line).
//!
//! Coordinates are fractions of the image size. Values are written with six
//! decimals so files are stable across runs.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{bbox_from_normalized, BBox};

/// One label line in normalized center/size form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YoloLabel {
    pub class_id: usize,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl YoloLabel {
    pub fn from_bbox(class_id: usize, b: &BBox, img_w: u32, img_h: u32) -> Self {
        let (cx, cy, w, h) = b.to_normalized(img_w as f64, img_h as f64);
        Self {
            class_id,
            cx,
            cy,
            w,
            h,
        }
    }

    pub fn to_bbox(&self, img_w: u32, img_h: u32) -> Result<BBox> {
        bbox_from_normalized(self.cx, self.cy, self.w, self.h, img_w, img_h)
    }

    /// Box in unit-square coordinates.
    pub fn unit_box(&self) -> BBox {
        BBox {
            x_min: self.cx - self.w / 2.0,
            y_min: self.cy - self.h / 2.0,
            x_max: self.cx + self.w / 2.0,
            y_max: self.cy + self.h / 2.0,
        }
    }

    pub fn to_line(&self) -> String {
        format!(
            "{} {:.6} {:.6} {:.6} {:.6}",
            self.class_id, self.cx, self.cy, self.w, self.h
        )
    }
}

/// One detection line: a label plus a confidence in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YoloDetection {
    pub class_id: usize,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    pub confidence: f64,
}

impl YoloDetection {
    pub fn label(&self) -> YoloLabel {
        YoloLabel {
            class_id: self.class_id,
            cx: self.cx,
            cy: self.cy,
            w: self.w,
            h: self.h,
        }
    }

    pub fn to_line(&self) -> String {
        format!("{} {:.6}", self.label().to_line(), self.confidence)
    }
}

fn parse_fields(line: &str, expected: usize, source: &str, lineno: usize) -> Result<Vec<f64>> {
    let fields: Vec<&str> = line.split_whitespace().collect();
    if fields.len() != expected {
        return Err(Error::parse(
            source,
            lineno,
            format!("expected {expected} fields, found {}", fields.len()),
        ));
    }
    let class: usize = fields[0]
        .parse()
        .map_err(|_| Error::parse(source, lineno, format!("bad class id '{}'", fields[0])))?;
    let mut out = vec![class as f64];
    for (i, f) in fields[1..].iter().enumerate() {
        let v: f64 = f
            .parse()
            .map_err(|_| Error::parse(source, lineno, format!("bad number '{f}'")))?;
        if !(0.0..=1.0).contains(&v) {
            let what = if i == 4 { "confidence" } else { "coordinate" };
            return Err(Error::parse(
                source,
                lineno,
                format!("{what} {v} outside [0, 1]"),
            ));
        }
        out.push(v);
    }
    Ok(out)
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_labels(text: &str, source: &str) -> Result<Vec<YoloLabel>> {
    content_lines(text)
        .map(|(n, line)| {
            let v = parse_fields(line, 5, source, n)?;
            Ok(YoloLabel {
                class_id: v[0] as usize,
                cx: v[1],
                cy: v[2],
                w: v[3],
                h: v[4],
            })
        })
        .collect()
}

pub fn parse_detections(text: &str, source: &str) -> Result<Vec<YoloDetection>> {
    Ok(parse_numbered_detections(text, source)?
        .into_iter()
        .map(|(_, d)| d)
        .collect())
}

/// Detections paired with their 1-based line numbers.
pub fn parse_numbered_detections(text: &str, source: &str) -> Result<Vec<(usize, YoloDetection)>> {
    content_lines(text)
        .map(|(n, line)| {
            let v = parse_fields(line, 6, source, n)?;
            Ok((
                n,
                YoloDetection {
                    class_id: v[0] as usize,
                    cx: v[1],
                    cy: v[2],
                    w: v[3],
                    h: v[4],
                    confidence: v[5],
                },
            ))
        })
        .collect()
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn read_labels(path: &Path) -> Result<Vec<YoloLabel>> {
    parse_labels(&read_text(path)?, &path.display().to_string())
}

pub fn read_detections(path: &Path) -> Result<Vec<YoloDetection>> {
    parse_detections(&read_text(path)?, &path.display().to_string())
}

fn write_lines(path: &Path, lines: impl Iterator<Item = String>) -> Result<()> {
    let mut text = String::new();
    for l in lines {
        text.push_str(&l);
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_labels(path: &Path, labels: &[YoloLabel]) -> Result<()> {
    write_lines(path, labels.iter().map(YoloLabel::to_line))
}

pub fn write_detections(path: &Path, dets: &[YoloDetection]) -> Result<()> {
    write_lines(path, dets.iter().map(YoloDetection::to_line))
}

/// Class names indexed by id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassMap {
    pub names: Vec<String>,
}

impl ClassMap {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        Self {
            names: names.into_iter().map(Into::into).collect(),
        }
    }

    pub fn shapes() -> Self {
        Self::new(crate::ShapeClass::ALL.iter().map(|s| s.name()))
    }

    pub fn components() -> Self {
        Self::new(crate::ComponentClass::ALL.iter().map(|c| c.name()))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn parse(text: &str) -> Self {
        Self::new(content_lines(text).map(|(_, l)| l.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let map = Self::parse(&read_text(path)?);
        if map.is_empty() {
            return Err(Error::parse(path.display().to_string(), 1, "no class names"));
        }
        Ok(map)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_lines(path, self.names.iter().cloned())
    }

    /// Id of a class given either its name or its numeric id.
    pub fn resolve(&self, token: &str) -> Option<usize> {
        if let Ok(id) = token.parse::<usize>() {
            return (id < self.len()).then_some(id);
        }
        let norm = |s: &str| s.to_ascii_lowercase().replace(['-', ' '], "_");
        let t = norm(token);
        self.names.iter().position(|n| norm(n) == t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_labels_and_detections() {
        let labels = parse_labels("0 0.5 0.5 0.2 0.2\n\n1 0.1 0.2 0.1 0.3\n", "t").unwrap();
        assert_eq!(labels.len(), 2);
        assert_eq!(labels[1].class_id, 1);

        let dets = parse_detections("0 0.5 0.5 0.2 0.2 0.9", "t").unwrap();
        assert_eq!(dets[0].confidence, 0.9);
        let b = dets[0].label().to_bbox(100, 100).unwrap();
        assert!((b.x_min - 40.0).abs() < 1e-9 && (b.x_max - 60.0).abs() < 1e-9);
    }

    #[test]
    fn errors_name_the_line() {
        let err = parse_detections("0 0.5 0.5 0.2 0.2 0.9\n0 0.5 0.5\n", "f.txt").unwrap_err();
        assert!(err.to_string().starts_with("f.txt:2:"), "{err}");
        let err = parse_detections("1 0.5 0.5 0.2 0.2 1.5\n", "f.txt").unwrap_err();
        assert!(err.to_string().contains("confidence"), "{err}");
    }

    #[test]
    fn line_format_is_stable() {
        let l = YoloLabel {
            class_id: 1,
            cx: 0.5,
            cy: 0.25,
            w: 1.0 / 3.0,
            h: 0.1,
        };
        assert_eq!(l.to_line(), "1 0.500000 0.250000 0.333333 0.100000");
    }

    #[test]
    fn class_map_resolves_names_and_ids() {
        let m = ClassMap::components();
        assert_eq!(m.resolve("solar_panel"), Some(3));
        assert_eq!(m.resolve("Solar-Panel"), Some(3));
        assert_eq!(m.resolve("2"), Some(2));
        assert_eq!(m.resolve("9"), None);
        assert_eq!(ClassMap::parse("circle\nrectangle\n"), ClassMap::shapes());
    }
}
