//! Detection metrics: greedy matching, precision and recall, AP and mAP,
//! confusion matrices and per-class count tables.

pub mod confusion;
pub mod report;

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::BBox;

pub use confusion::{confusion_matrix, parse_pairs, ConfusionMatrix};
pub use report::{
    detection_counts, evaluate, load_detection_dir, load_label_dir, ClassReport, CountTable, EvalReport, EvalSet,
    ReportFormat,
};

/// COCO-style sweep: 0.50, 0.55, ..., 0.95.
pub const IOU_SWEEP: [f64; 10] = [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub frame: String,
    pub class_id: usize,
    pub bbox: BBox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub frame: String,
    pub class_id: usize,
    pub bbox: BBox,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    TruePositive,
    FalsePositive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub iou_threshold: f64,
    /// Per detection, in input order.
    pub outcomes: Vec<Outcome>,
    /// Per ground truth, the index of the detection that claimed it.
    pub matched_by: Vec<Option<usize>>,
    /// Detection indices in processing order.
    pub order: Vec<usize>,
}

impl MatchResult {
    pub fn tp(&self) -> usize {
        self.outcomes.iter().filter(|o| **o == Outcome::TruePositive).count()
    }

    pub fn fp(&self) -> usize {
        self.outcomes.len() - self.tp()
    }

    pub fn fn_count(&self) -> usize {
        self.matched_by.iter().filter(|m| m.is_none()).count()
    }
}

/// Indices of `dets` by descending confidence; ties keep input order.
pub fn confidence_order(dets: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].confidence.partial_cmp(&dets[a].confidence).unwrap_or(Ordering::Equal));
    order
}

fn greedy_match(
    dets: &[Detection],
    gts: &[GroundTruth],
    iou_threshold: f64,
    same_class: bool,
) -> MatchResult {
    let order = confidence_order(dets);
    let mut outcomes = vec![Outcome::FalsePositive; dets.len()];
    let mut matched_by = vec![None; gts.len()];
    for &d in &order {
        let det = &dets[d];
        let mut best: Option<(usize, f64)> = None;
        for (g, gt) in gts.iter().enumerate() {
            if matched_by[g].is_some() || gt.frame != det.frame || (same_class && gt.class_id != det.class_id) {
                continue;
            }
            let iou = det.bbox.iou(&gt.bbox);
            if best.is_none_or(|(_, b)| iou > b) {
                best = Some((g, iou));
            }
        }
        if let Some((g, iou)) = best {
            if iou >= iou_threshold {
                matched_by[g] = Some(d);
                outcomes[d] = Outcome::TruePositive;
            }
        }
    }
    MatchResult {
        iou_threshold,
        outcomes,
        matched_by,
        order,
    }
}

/// Greedy matching by descending confidence: each detection claims the
/// unmatched ground truth of the same frame and class with the highest IoU,
/// provided it reaches `iou_threshold`.
pub fn match_detections(dets: &[Detection], gts: &[GroundTruth], iou_threshold: f64) -> MatchResult {
    greedy_match(dets, gts, iou_threshold, true)
}

/// `(predicted, actual)` class pairs from class-agnostic matching: every
/// detection that overlaps some ground truth enough is paired with it,
/// whatever the two classes are.
pub fn classification_pairs(dets: &[Detection], gts: &[GroundTruth], iou_threshold: f64) -> Vec<(usize, usize)> {
    let m = greedy_match(dets, gts, iou_threshold, false);
    let mut pairs: Vec<(usize, usize, usize)> = m
        .matched_by
        .iter()
        .enumerate()
        .filter_map(|(g, d)| d.map(|d| (d, dets[d].class_id, gts[g].class_id)))
        .collect();
    pairs.sort_unstable();
    pairs.into_iter().map(|(_, p, a)| (p, a)).collect()
}

/// `(precision, recall)`; `None` where the denominator is zero.
pub fn precision_recall(tp: usize, fp: usize, fn_count: usize) -> (Option<f64>, Option<f64>) {
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    (ratio(tp, tp + fp), ratio(tp, tp + fn_count))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Exact area under the precision envelope.
    #[default]
    #[value(name = "all")]
    AllPoint,
    /// Envelope sampled at recall 0.00, 0.01, ..., 1.00.
    #[value(name = "101")]
    Point101,
}

impl Interpolation {
    pub fn name(self) -> &'static str {
        match self {
            Interpolation::AllPoint => "all-point",
            Interpolation::Point101 => "101-point",
        }
    }
}

/// Recall and precision after each detection of `class`, by descending
/// confidence. `None` when the class has no ground truth.
pub fn pr_curve(dets: &[Detection], gts: &[GroundTruth], class: usize, iou_threshold: f64) -> Option<Vec<(f64, f64)>> {
    let gts: Vec<GroundTruth> = gts.iter().filter(|g| g.class_id == class).cloned().collect();
    if gts.is_empty() {
        return None;
    }
    let dets: Vec<Detection> = dets.iter().filter(|d| d.class_id == class).cloned().collect();
    let m = match_detections(&dets, &gts, iou_threshold);
    let (mut tp, mut fp) = (0usize, 0usize);
    let n = gts.len() as f64;
    Some(
        m.order
            .iter()
            .map(|&d| {
                match m.outcomes[d] {
                    Outcome::TruePositive => tp += 1,
                    Outcome::FalsePositive => fp += 1,
                }
                (tp as f64 / n, tp as f64 / (tp + fp) as f64)
            })
            .collect(),
    )
}

/// Area under the precision envelope of `class` at `iou_threshold`. `None`
/// when the class has no ground truth.
pub fn average_precision(
    dets: &[Detection],
    gts: &[GroundTruth],
    class: usize,
    iou_threshold: f64,
    interpolation: Interpolation,
) -> Option<f64> {
    let curve = pr_curve(dets, gts, class, iou_threshold)?;
    // envelope: running max of precision from the right
    let mut envelope: Vec<f64> = curve.iter().map(|&(_, p)| p).collect();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    let ap = match interpolation {
        Interpolation::AllPoint => {
            let mut prev = 0.0;
            let mut area = 0.0;
            for (i, &(r, _)) in curve.iter().enumerate() {
                area += (r - prev) * envelope[i];
                prev = r;
            }
            area
        }
        Interpolation::Point101 => {
            let mut sum = 0.0;
            for k in 0..=100 {
                let r = k as f64 / 100.0;
                let i = curve.partition_point(|&(rec, _)| rec < r);
                if i < curve.len() {
                    sum += envelope[i];
                }
            }
            sum / 101.0
        }
    };
    Some(ap.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanAp {
    /// AP at 0.5 per class; `None` for classes without ground truth.
    pub ap50: Vec<Option<f64>>,
    /// AP averaged over the sweep per class.
    pub ap50_95: Vec<Option<f64>>,
    pub map50: Option<f64>,
    pub map50_95: Option<f64>,
}

fn mean_defined(values: &[Option<f64>]) -> Option<f64> {
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
}

/// mAP at 0.5 and averaged over [`IOU_SWEEP`] for classes `0..num_classes`,
/// skipping classes without ground truth.
pub fn mean_ap(dets: &[Detection], gts: &[GroundTruth], num_classes: usize, interpolation: Interpolation) -> MeanAp {
    let per_class: Vec<Vec<Option<f64>>> = (0..num_classes)
        .into_par_iter()
        .map(|c| {
            IOU_SWEEP
                .iter()
                .map(|&t| average_precision(dets, gts, c, t, interpolation))
                .collect()
        })
        .collect();
    let ap50: Vec<Option<f64>> = per_class.iter().map(|aps| aps[0]).collect();
    let ap50_95: Vec<Option<f64>> = per_class
        .iter()
        .map(|aps| aps[0].map(|_| aps.iter().flatten().sum::<f64>() / IOU_SWEEP.len() as f64))
        .collect();
    let map50 = mean_defined(&ap50);
    let map50_95 = mean_defined(&ap50_95);
    MeanAp {
        ap50,
        ap50_95,
        map50,
        map50_95,
    }
}

/// Percentage with two decimals, or `N/A`.
pub fn percent(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{:.2}%", 100.0 * v),
        None => "N/A".to_string(),
    }
}
