//! Evaluation over directories of per-frame label and detection files, and
//! the report and count-table renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    classification_pairs, match_detections, mean_ap, percent, precision_recall, ConfusionMatrix, Detection,
    GroundTruth, Interpolation,
};
use crate::error::{Error, Result};
use crate::labels::{read_detections, read_labels, YoloDetection, YoloLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Text,
}

impl ReportFormat {
    /// JSON for `.json` paths, text otherwise.
    pub fn from_path(path: &Path) -> Self {
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            ReportFormat::Json
        } else {
            ReportFormat::Text
        }
    }
}

fn txt_files(dir: &Path) -> Result<BTreeMap<String, std::path::PathBuf>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_txt = path.extension().is_some_and(|e| e == "txt");
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        if is_txt && stem != "classes" {
            out.insert(stem, path);
        }
    }
    Ok(out)
}

/// Label files of a directory keyed by file stem. `classes.txt` is skipped.
pub fn load_label_dir(dir: &Path) -> Result<BTreeMap<String, Vec<YoloLabel>>> {
    txt_files(dir)?.into_iter().map(|(k, p)| Ok((k, read_labels(&p)?))).collect()
}

pub fn load_detection_dir(dir: &Path) -> Result<BTreeMap<String, Vec<YoloDetection>>> {
    txt_files(dir)?.into_iter().map(|(k, p)| Ok((k, read_detections(&p)?))).collect()
}

/// Detections and ground truth of a set of frames, boxes in unit-square
/// coordinates (IoU does not depend on the image size).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalSet {
    pub frames: Vec<String>,
    pub gts: Vec<GroundTruth>,
    pub dets: Vec<Detection>,
}

impl EvalSet {
    pub fn new(
        labels: &BTreeMap<String, Vec<YoloLabel>>,
        detections: &BTreeMap<String, Vec<YoloDetection>>,
    ) -> Self {
        let mut frames: Vec<String> = labels.keys().chain(detections.keys()).cloned().collect();
        frames.sort();
        frames.dedup();
        let gts = labels
            .iter()
            .flat_map(|(f, ls)| {
                ls.iter().map(|l| GroundTruth {
                    frame: f.clone(),
                    class_id: l.class_id,
                    bbox: l.unit_box(),
                })
            })
            .collect();
        let dets = detections
            .iter()
            .flat_map(|(f, ds)| {
                ds.iter().map(|d| Detection {
                    frame: f.clone(),
                    class_id: d.class_id,
                    bbox: d.label().unit_box(),
                    confidence: d.confidence,
                })
            })
            .collect();
        Self { frames, gts, dets }
    }

    pub fn from_dirs(dets: &Path, gt: &Path) -> Result<Self> {
        Ok(Self::new(&load_label_dir(gt)?, &load_detection_dir(dets)?))
    }

    pub fn frames_without_detections(&self) -> usize {
        self.frames
            .iter()
            .filter(|f| !self.dets.iter().any(|d| &d.frame == *f))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub name: String,
    /// Frames with at least one ground-truth instance.
    pub images: usize,
    pub instances: usize,
    pub detections: usize,
    pub tp: usize,
    pub fp: usize,
    pub fn_count: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub ap50: Option<f64>,
    pub ap50_95: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub interpolation: Interpolation,
    /// Threshold for precision, recall and the confusion matrix.
    pub iou_threshold: f64,
    pub classes: Vec<ClassReport>,
    pub map50: Option<f64>,
    pub map50_95: Option<f64>,
    /// Class-agnostic matches tallied by predicted and actual class.
    pub confusion: Option<ConfusionMatrix>,
    pub frames: usize,
    pub frames_without_detections: usize,
}

pub fn evaluate(set: &EvalSet, class_names: &[String], iou_threshold: f64, interpolation: Interpolation) -> Result<EvalReport> {
    if !(iou_threshold > 0.0 && iou_threshold <= 1.0) {
        return Err(Error::InvalidConfig(format!("IoU threshold {iou_threshold} must lie in (0, 1]")));
    }
    let n = class_names.len();
    for (what, id) in set.gts.iter().map(|g| ("label", g.class_id)).chain(set.dets.iter().map(|d| ("detection", d.class_id))) {
        if id >= n {
            return Err(Error::InvalidConfig(format!("{what} class id {id} outside the {n}-class map")));
        }
    }
    let maps = mean_ap(&set.dets, &set.gts, n, interpolation);
    let classes = (0..n)
        .map(|c| {
            let gts: Vec<GroundTruth> = set.gts.iter().filter(|g| g.class_id == c).cloned().collect();
            let dets: Vec<Detection> = set.dets.iter().filter(|d| d.class_id == c).cloned().collect();
            let m = match_detections(&dets, &gts, iou_threshold);
            let (precision, recall) = precision_recall(m.tp(), m.fp(), m.fn_count());
            let mut frames: Vec<&str> = gts.iter().map(|g| g.frame.as_str()).collect();
            frames.sort_unstable();
            frames.dedup();
            ClassReport {
                name: class_names[c].clone(),
                images: frames.len(),
                instances: gts.len(),
                detections: dets.len(),
                tp: m.tp(),
                fp: m.fp(),
                fn_count: m.fn_count(),
                precision,
                recall,
                ap50: maps.ap50[c],
                ap50_95: maps.ap50_95[c],
            }
        })
        .collect();
    let mut confusion = ConfusionMatrix::new(class_names.to_vec());
    for (p, a) in classification_pairs(&set.dets, &set.gts, iou_threshold) {
        confusion.add(p, a)?;
    }
    Ok(EvalReport {
        interpolation,
        iou_threshold,
        classes,
        map50: maps.map50,
        map50_95: maps.map50_95,
        confusion: (!set.gts.is_empty()).then_some(confusion),
        frames: set.frames.len(),
        frames_without_detections: set.frames_without_detections(),
    })
}

fn fixed(v: Option<f64>) -> String {
    v.map_or_else(|| "N/A".to_string(), |v| format!("{v:.4}"))
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// "No detections in k out of n frames".
    pub fn empty_frames_line(&self) -> String {
        format!(
            "No detections in {} out of {} frames",
            self.frames_without_detections, self.frames
        )
    }

    pub fn to_text(&self) -> String {
        let name_w = self.classes.iter().map(|c| c.name.len()).chain([5]).max().unwrap_or(5);
        let mut s = String::new();
        let _ = writeln!(
            s,
            "IoU threshold {:.2}, {} interpolation",
            self.iou_threshold,
            self.interpolation.name()
        );
        let _ = writeln!(
            s,
            "{:<name_w$}  {:>6}  {:>9}  {:>10}  {:>8}  {:>8}  {:>8}  {:>12}",
            "class", "images", "instances", "detections", "P", "R", "AP@0.5", "AP@0.5:0.95"
        );
        for c in &self.classes {
            let _ = writeln!(
                s,
                "{:<name_w$}  {:>6}  {:>9}  {:>10}  {:>8}  {:>8}  {:>8}  {:>12}",
                c.name,
                c.images,
                c.instances,
                c.detections,
                percent(c.precision),
                percent(c.recall),
                fixed(c.ap50),
                fixed(c.ap50_95)
            );
        }
        let _ = writeln!(s, "mAP@0.5 {}  mAP@0.5:0.95 {}", fixed(self.map50), fixed(self.map50_95));
        let _ = writeln!(s, "{}", self.empty_frames_line());
        if let Some(m) = &self.confusion {
            let _ = writeln!(s, "\n{m}");
        }
        s
    }

    pub fn render(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Text => Ok(self.to_text()),
        }
    }

    pub fn write(&self, path: &Path, format: ReportFormat) -> Result<()> {
        fs::write(path, self.render(format)?).map_err(|e| Error::io(path, e))
    }
}

/// Per-class detection counts of several methods next to the ground-truth
/// label counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    pub classes: Vec<String>,
    pub methods: Vec<String>,
    /// `detections[method][class]`.
    pub detections: Vec<Vec<u64>>,
    pub labelled: Vec<u64>,
}

pub fn detection_counts(runs: &[(String, Vec<Detection>)], gts: &[GroundTruth], class_names: &[String]) -> CountTable {
    let n = class_names.len();
    let count = |ids: &mut dyn Iterator<Item = usize>| {
        let mut c = vec![0u64; n];
        for id in ids {
            if id < n {
                c[id] += 1;
            }
        }
        c
    };
    CountTable {
        classes: class_names.to_vec(),
        methods: runs.iter().map(|(m, _)| m.clone()).collect(),
        detections: runs.iter().map(|(_, d)| count(&mut d.iter().map(|d| d.class_id))).collect(),
        labelled: count(&mut gts.iter().map(|g| g.class_id)),
    }
}

impl CountTable {
    pub fn to_text(&self) -> String {
        let first = self.methods.iter().map(String::len).chain(["labelled occurrence".len()]).max().unwrap_or(0);
        let col = self.classes.iter().map(String::len).chain([6]).max().unwrap_or(6);
        let mut s = format!("{:<first$}", "method");
        for c in &self.classes {
            let _ = write!(s, "  {c:>col$}");
        }
        s.push('\n');
        let labelled = "labelled occurrence".to_string();
        let rows = self.methods.iter().zip(&self.detections).chain([(&labelled, &self.labelled)]);
        for (name, counts) in rows {
            let _ = write!(s, "{name:<first$}");
            for v in counts {
                let _ = write!(s, "  {v:>col$}");
            }
            s.push('\n');
        }
        s
    }

    pub fn render(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::Json => Ok(serde_json::to_string_pretty(self)? + "\n"),
            ReportFormat::Text => Ok(self.to_text()),
        }
    }
}
