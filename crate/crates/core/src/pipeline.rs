//! Frame in, component detections out: propose shapes, crop each box, score
//! the crop against the histograms of its shape branch.

use std::path::PathBuf;
use std::time::Instant;

use image::GrayImage;
use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{classify, ClassScores, VarianceModel};
use crate::error::{Error, Result};
use crate::geometry::{BBox, ComponentClass, ShapeClass};
use crate::imageio::load_gray;
use crate::labels::YoloDetection;
use crate::proposer::{ingest_external_detections, propose_shapes, ProposerParams, ShapeDetection};

/// Sub-image under `bbox` after growing each side by `pad` times the box
/// dimension (negative shrinks) and clipping to the frame. Fractional edges
/// round outward.
pub fn crop(image: &GrayImage, bbox: &BBox, pad: f64) -> Result<GrayImage> {
    let (w, h) = image.dimensions();
    let (px, py) = (pad * bbox.width(), pad * bbox.height());
    let grown = BBox {
        x_min: bbox.x_min - px,
        y_min: bbox.y_min - py,
        x_max: bbox.x_max + px,
        y_max: bbox.y_max + py,
    };
    let c = grown.clip(w as f64, h as f64);
    let (x0, y0) = (c.x_min.floor().max(0.0), c.y_min.floor().max(0.0));
    let (x1, y1) = (c.x_max.ceil().min(w as f64), c.y_max.ceil().min(h as f64));
    if !(x1 > x0 && y1 > y0) || c.is_degenerate() {
        return Err(Error::EmptyCrop(bbox.to_string()));
    }
    Ok(image::imageops::crop_imm(image, x0 as u32, y0 as u32, (x1 - x0) as u32, (y1 - y0) as u32).to_image())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentDetection {
    pub component: ComponentClass,
    pub bbox: BBox,
    pub scores: ClassScores,
    pub source_shape: ShapeClass,
    pub source_objectness: f64,
}

impl ComponentDetection {
    /// Share of the predicted class in the normalized weighted scores.
    pub fn score(&self) -> f64 {
        self.scores.normalized()[self.component.index()]
    }

    pub fn to_yolo(&self, img_w: u32, img_h: u32) -> YoloDetection {
        let (cx, cy, w, h) = self.bbox.to_normalized(img_w as f64, img_h as f64);
        YoloDetection {
            class_id: self.component.index(),
            cx,
            cy,
            w,
            h,
            confidence: self.score().clamp(0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectOptions {
    /// Crop padding as a fraction of box size; negative values shrink.
    pub pad: f64,
    /// Proposals below this objectness are not classified.
    pub min_objectness: f64,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self {
            pad: 0.0,
            min_objectness: 0.0,
        }
    }
}

impl DetectOptions {
    pub fn validate(&self) -> Result<()> {
        if !self.pad.is_finite() || self.pad <= -0.5 {
            return Err(Error::InvalidConfig(format!("crop pad {} must be finite and above -0.5", self.pad)));
        }
        if !(0.0..=1.0).contains(&self.min_objectness) {
            return Err(Error::InvalidConfig("min_objectness must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Classifies already proposed shapes.
pub fn classify_proposals(
    image: &GrayImage,
    model: &VarianceModel,
    proposals: &[ShapeDetection],
    opts: &DetectOptions,
) -> Vec<ComponentDetection> {
    proposals
        .iter()
        .filter(|p| p.objectness >= opts.min_objectness)
        .filter_map(|p| {
            let scored = crop(image, &p.bbox, opts.pad).and_then(|c| classify(model, p.shape, &c));
            match scored {
                Ok(scores) => Some(ComponentDetection {
                    component: scores.predicted,
                    bbox: p.bbox,
                    scores,
                    source_shape: p.shape,
                    source_objectness: p.objectness,
                }),
                Err(e) => {
                    warn!("skipping {} proposal at {}: {e}", p.shape.name(), p.bbox);
                    None
                }
            }
        })
        .collect()
}

/// Where stage-one boxes come from.
#[derive(Debug, Clone, Copy)]
pub enum ProposalSource<'a> {
    Proposer(&'a ProposerParams),
    External(&'a [ShapeDetection]),
}

pub fn detect_components(
    image: &GrayImage,
    model: &VarianceModel,
    source: ProposalSource<'_>,
    opts: &DetectOptions,
) -> Result<Vec<ComponentDetection>> {
    let proposals = match source {
        ProposalSource::Proposer(params) => propose_shapes(image, params)?,
        ProposalSource::External(d) => d.to_vec(),
    };
    Ok(classify_proposals(image, model, &proposals, opts))
}

/// One frame of a sequence. `detections`, when set, replaces the built-in
/// proposer for this frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameInput {
    pub id: String,
    pub image: PathBuf,
    pub detections: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageLatency {
    pub propose_ms: f64,
    pub classify_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameResult {
    pub id: String,
    pub width: u32,
    pub height: u32,
    pub detections: Vec<ComponentDetection>,
    pub latency: StageLatency,
    /// Set when the frame could not be processed.
    pub error: Option<String>,
}

impl FrameResult {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }

    pub fn yolo_detections(&self) -> Vec<YoloDetection> {
        self.detections.iter().map(|d| d.to_yolo(self.width, self.height)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencySummary {
    pub frames: usize,
    pub failed: usize,
    pub mean_ms: f64,
    pub median_ms: f64,
    /// `1000 / mean_ms`.
    pub fps: f64,
}

impl LatencySummary {
    /// Statistics over the total latencies of successful frames.
    pub fn from_frames(frames: &[FrameResult]) -> Self {
        let mut totals: Vec<f64> = frames.iter().filter(|f| !f.failed()).map(|f| f.latency.total_ms).collect();
        totals.sort_by(f64::total_cmp);
        let n = totals.len();
        let (mean_ms, median_ms) = if n == 0 {
            (0.0, 0.0)
        } else {
            let mean = totals.iter().sum::<f64>() / n as f64;
            let median = if n % 2 == 1 {
                totals[n / 2]
            } else {
                (totals[n / 2 - 1] + totals[n / 2]) / 2.0
            };
            (mean, median)
        };
        Self {
            frames: frames.len(),
            failed: frames.len() - n,
            mean_ms,
            median_ms,
            fps: if mean_ms > 0.0 { 1000.0 / mean_ms } else { 0.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceResult {
    pub frames: Vec<FrameResult>,
    pub summary: LatencySummary,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1000.0
}

pub fn process_frame(
    frame: &FrameInput,
    model: &VarianceModel,
    params: &ProposerParams,
    opts: &DetectOptions,
) -> FrameResult {
    let start = Instant::now();
    let mut result = FrameResult {
        id: frame.id.clone(),
        width: 0,
        height: 0,
        detections: Vec::new(),
        latency: StageLatency::default(),
        error: None,
    };
    let image = match load_gray(&frame.image) {
        Ok(img) => img,
        Err(e) => {
            warn!("frame {}: {e}", frame.id);
            result.error = Some(e.to_string());
            return result;
        }
    };
    (result.width, result.height) = image.dimensions();
    let t = Instant::now();
    let proposals = match &frame.detections {
        Some(path) => ingest_external_detections(path, result.width, result.height),
        None => propose_shapes(&image, params),
    };
    result.latency.propose_ms = ms(t);
    match proposals {
        Ok(p) => {
            let t = Instant::now();
            result.detections = classify_proposals(&image, model, &p, opts);
            result.latency.classify_ms = ms(t);
        }
        Err(e) => {
            warn!("frame {}: {e}", frame.id);
            result.error = Some(e.to_string());
        }
    }
    result.latency.total_ms = ms(start);
    result
}

/// Runs every frame, in parallel on the current rayon pool; results keep input
/// order and do not depend on the pool size.
pub fn process_sequence(
    frames: &[FrameInput],
    model: &VarianceModel,
    params: &ProposerParams,
    opts: &DetectOptions,
) -> Result<SequenceResult> {
    if frames.is_empty() {
        return Err(Error::InvalidConfig("no frames to process".into()));
    }
    model.validate()?;
    params.validate()?;
    opts.validate()?;
    let results: Vec<FrameResult> = frames.par_iter().map(|f| process_frame(f, model, params, opts)).collect();
    let summary = LatencySummary::from_frames(&results);
    Ok(SequenceResult { frames: results, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{build_from_variances, BuildConfig, VarianceSample};
    use image::Luma;

    fn ramp(w: u32, h: u32) -> GrayImage {
        GrayImage::from_fn(w, h, |x, y| Luma([(x + 10 * y) as u8]))
    }

    #[test]
    fn crop_exact_and_padded() {
        let img = ramp(40, 20);
        let c = crop(&img, &BBox::new(3.0, 2.0, 7.0, 5.0).unwrap(), 0.0).unwrap();
        assert_eq!(c.dimensions(), (4, 3));
        for (x, y, p) in c.enumerate_pixels() {
            assert_eq!(*p, *img.get_pixel(x + 3, y + 2));
        }
        let big = ramp(100, 25);
        let c = crop(&big, &BBox::new(10.0, 10.0, 20.0, 20.0).unwrap(), 0.1).unwrap();
        assert_eq!(c.dimensions(), (12, 12));
        assert_eq!(c.get_pixel(0, 0), big.get_pixel(9, 9));
        let c = crop(&big, &BBox::new(10.0, 10.0, 20.0, 20.0).unwrap(), -0.2).unwrap();
        assert_eq!(c.dimensions(), (6, 6));
    }

    #[test]
    fn crop_outside_frame_fails() {
        let img = ramp(10, 10);
        assert!(crop(&img, &BBox::new(20.0, 20.0, 30.0, 30.0).unwrap(), 0.0).is_err());
        // clipped at the border but still nonempty
        let c = crop(&img, &BBox::new(8.0, -3.0, 14.0, 2.0).unwrap(), 0.0).unwrap();
        assert_eq!(c.dimensions(), (2, 2));
    }

    fn antenna_model() -> VarianceModel {
        // low variances are antenna only, high variances body only
        let mut samples = Vec::new();
        for v in [0.0, 10.0, 20.0] {
            for b in ShapeClass::ALL {
                samples.push(VarianceSample {
                    branch: b,
                    class: ComponentClass::Antenna,
                    variance: v,
                });
                samples.push(VarianceSample {
                    branch: b,
                    class: ComponentClass::Body,
                    variance: 5000.0 + v,
                });
            }
        }
        build_from_variances(&samples, &BuildConfig::default()).unwrap()
    }

    #[test]
    fn antenna_bin_gives_antenna() {
        let model = antenna_model();
        let img = GrayImage::from_fn(50, 50, |x, y| Luma([if (10..30).contains(&x) && (10..30).contains(&y) { 100 + (x % 2) as u8 * 4 } else { 255 }]));
        let prop = [ShapeDetection {
            shape: ShapeClass::Circle,
            bbox: BBox::new(10.0, 10.0, 30.0, 30.0).unwrap(),
            objectness: 0.9,
        }];
        let dets = detect_components(&img, &model, ProposalSource::External(&prop), &DetectOptions::default()).unwrap();
        assert_eq!(dets.len(), 1);
        assert_eq!(dets[0].component, ComponentClass::Antenna);
        assert_eq!(dets[0].scores.branch, ShapeClass::Circle);
        assert_eq!(dets[0].component, dets[0].scores.predicted);
        let again = detect_components(&img, &model, ProposalSource::External(&prop), &DetectOptions::default()).unwrap();
        assert_eq!(dets, again);
    }

    #[test]
    fn bad_proposals_are_skipped_and_gate_applies() {
        let model = antenna_model();
        let img = ramp(30, 30);
        let props = [
            ShapeDetection {
                shape: ShapeClass::Rectangle,
                bbox: BBox::new(50.0, 50.0, 60.0, 60.0).unwrap(),
                objectness: 0.9,
            },
            ShapeDetection {
                shape: ShapeClass::Rectangle,
                bbox: BBox::new(0.0, 0.0, 10.0, 10.0).unwrap(),
                objectness: 0.5,
            },
        ];
        let dets = detect_components(&img, &model, ProposalSource::External(&props), &DetectOptions::default()).unwrap();
        assert_eq!(dets.len(), 1);
        let gated = DetectOptions {
            min_objectness: 0.6,
            ..DetectOptions::default()
        };
        assert!(detect_components(&img, &model, ProposalSource::External(&props), &gated).unwrap().is_empty());
        let blank = GrayImage::from_pixel(30, 30, Luma([255]));
        let params = ProposerParams::default();
        assert!(detect_components(&blank, &model, ProposalSource::Proposer(&params), &DetectOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn latency_summary() {
        let frame = |ms: f64, err: bool| FrameResult {
            id: String::new(),
            width: 1,
            height: 1,
            detections: vec![],
            latency: StageLatency {
                propose_ms: 0.0,
                classify_ms: 0.0,
                total_ms: ms,
            },
            error: err.then(|| "x".to_string()),
        };
        let s = LatencySummary::from_frames(&[frame(4.0, false)]);
        assert_eq!(s.fps, 250.0);
        assert_eq!(s.median_ms, 4.0);
        let s = LatencySummary::from_frames(&[frame(2.0, false), frame(6.0, false), frame(100.0, true), frame(1.0, false)]);
        assert_eq!((s.frames, s.failed), (4, 1));
        assert_eq!(s.mean_ms, 3.0);
        assert_eq!(s.median_ms, 2.0);
    }

    #[test]
    fn unreadable_frame_is_recorded() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("a.png");
        GrayImage::from_pixel(20, 20, Luma([255])).save(&good).unwrap();
        let frames = [
            FrameInput {
                id: "missing".into(),
                image: dir.path().join("nope.png"),
                detections: None,
            },
            FrameInput {
                id: "a".into(),
                image: good,
                detections: None,
            },
        ];
        let res = process_sequence(&frames, &antenna_model(), &ProposerParams::default(), &DetectOptions::default()).unwrap();
        assert!(res.frames[0].failed());
        assert!(!res.frames[1].failed());
        assert!(res.frames[1].detections.is_empty());
        assert_eq!(res.summary.failed, 1);
        assert!(process_sequence(&[], &antenna_model(), &ProposerParams::default(), &DetectOptions::default()).is_err());
    }
}
