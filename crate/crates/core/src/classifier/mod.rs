//! Texture stage: classify a shape crop into a spacecraft component from the
//! variance of its grayscale intensities.
//!
//! Each shape branch (circle, rectangle) owns a histogram of crop variances
//! per component class. A crop's variance selects a bin, the bin's class
//! counts become probabilities `p(c_n) = f_n / sum_i f_i`, and the branch
//! weight vector rescales them before the argmax.

pub mod corpus;
pub mod optimize;

use std::fs;
use std::path::Path;

use image::{GrayImage, RgbImage};
use serde::{Deserialize, Serialize};

pub use corpus::{load_crop_dir, load_crop_manifest, load_crops, CropManifestEntry};
pub use optimize::{optimize_weights, optimize_weights_for_samples, weight_grid, Objective, WeightSearch};

use crate::error::{Error, Result};
use crate::geometry::{ComponentClass, ShapeClass};

pub const MODEL_VERSION: u32 = 1;
pub const DEFAULT_BINS: usize = 32;

/// Branch weights in canonical class order (antenna, body, thruster, solar panel).
pub const CIRCLE_WEIGHTS: [f64; 4] = [0.45, 0.045, 0.45, 0.045];
pub const RECTANGLE_WEIGHTS: [f64; 4] = [0.2, 0.2, 0.2, 0.4];

pub fn default_weights(branch: ShapeClass) -> [f64; 4] {
    match branch {
        ShapeClass::Circle => CIRCLE_WEIGHTS,
        ShapeClass::Rectangle => RECTANGLE_WEIGHTS,
    }
}

/// BT.601 luma, rounded to the nearest intensity.
pub fn to_grayscale(image: &RgbImage) -> GrayImage {
    GrayImage::from_fn(image.width(), image.height(), |x, y| {
        let [r, g, b] = image.get_pixel(x, y).0;
        let luma = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
        image::Luma([luma.round().clamp(0.0, 255.0) as u8])
    })
}

/// Population variance (mean squared deviation from the mean).
pub fn variance_of(values: &[u8]) -> Result<f64> {
    let n = values.len();
    if n < 2 {
        return Err(Error::TooFewPixels(n));
    }
    // exact integer moments: n * sum(x^2) - sum(x)^2 over n^2
    let (sum, sum_sq) = values.iter().fold((0u128, 0u128), |(s, q), &v| {
        let v = v as u128;
        (s + v, q + v * v)
    });
    let n = n as u128;
    let numerator = n * sum_sq - sum * sum;
    Ok(numerator as f64 / (n * n) as f64)
}

pub fn pixel_variance(image: &GrayImage) -> Result<f64> {
    variance_of(image.as_raw())
}

/// A cropped component image with its ground-truth class and the shape
/// branch it was proposed under.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCrop {
    pub image: GrayImage,
    pub class: ComponentClass,
    pub branch: ShapeClass,
}

impl LabeledCrop {
    pub fn new(image: GrayImage, class: ComponentClass, branch: ShapeClass) -> Result<Self> {
        if image.width() < 2 || image.height() < 2 {
            return Err(Error::InvalidConfig(format!(
                "crop must be at least 2x2, got {}x{}",
                image.width(),
                image.height()
            )));
        }
        Ok(Self {
            image,
            class,
            branch,
        })
    }

    /// Crop filed under the branch its class usually appears in.
    pub fn with_default_branch(image: GrayImage, class: ComponentClass) -> Result<Self> {
        Self::new(image, class, class.branch())
    }

    pub fn sample(&self) -> Result<VarianceSample> {
        Ok(VarianceSample {
            branch: self.branch,
            class: self.class,
            variance: pixel_variance(&self.image)?,
        })
    }
}

/// A crop reduced to its variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceSample {
    pub branch: ShapeClass,
    pub class: ComponentClass,
    pub variance: f64,
}

/// Histogram and weights for one shape branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchModel {
    pub branch: ShapeClass,
    /// Ascending bin edges in intensity² units; `edges.len() == bins + 1`.
    pub edges: Vec<f64>,
    /// `counts[class][bin]`, classes in canonical order.
    pub counts: [Vec<u64>; 4],
    pub weights: [f64; 4],
}

impl BranchModel {
    pub fn bins(&self) -> usize {
        self.edges.len() - 1
    }

    /// Bin holding `variance`. Bins are half-open `[e_i, e_{i+1})`; values at
    /// or past the top edge fall in the last bin.
    pub fn bin_of(&self, variance: f64) -> usize {
        self.edges[1..self.bins()].partition_point(|e| *e <= variance)
    }

    pub fn bin_counts(&self, bin: usize) -> [u64; 4] {
        std::array::from_fn(|c| self.counts[c][bin])
    }

    pub fn validate(&self) -> Result<()> {
        let name = self.branch.name();
        let bad = |m: String| Err(Error::InvalidConfig(format!("{name} branch: {m}")));
        if self.edges.len() < 2 {
            return bad("needs at least two bin edges".into());
        }
        if self.edges.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("bin edges must be strictly ascending".into());
        }
        if self.counts.iter().any(|c| c.len() != self.bins()) {
            return bad("count rows must have one entry per bin".into());
        }
        if self.counts.iter().flatten().all(|&c| c == 0) {
            return bad("histogram is empty".into());
        }
        validate_weights(&self.weights).or_else(|e| bad(e.to_string()))
    }
}

pub fn validate_weights(w: &[f64; 4]) -> Result<()> {
    if w.iter().any(|v| !v.is_finite() || *v < 0.0) || w.iter().all(|v| *v == 0.0) {
        return Err(Error::InvalidConfig(format!(
            "weights {w:?} must be non-negative and not all zero"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelProvenance {
    /// Crops used per class, canonical order, across both branches.
    pub crop_counts: [u64; 4],
    pub seed: Option<u64>,
    pub weight_search: Option<WeightSearch>,
}

/// Both branch histograms plus weights: the persisted classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceModel {
    pub version: u32,
    /// Add-one smoothing of bin counts; without it an empty bin is an error.
    pub smoothing: bool,
    pub circle: BranchModel,
    pub rectangle: BranchModel,
    pub provenance: ModelProvenance,
}

impl VarianceModel {
    pub fn branch(&self, b: ShapeClass) -> &BranchModel {
        match b {
            ShapeClass::Circle => &self.circle,
            ShapeClass::Rectangle => &self.rectangle,
        }
    }

    pub fn branch_mut(&mut self, b: ShapeClass) -> &mut BranchModel {
        match b {
            ShapeClass::Circle => &mut self.circle,
            ShapeClass::Rectangle => &mut self.rectangle,
        }
    }

    pub fn set_weights(&mut self, b: ShapeClass, weights: [f64; 4]) -> Result<()> {
        validate_weights(&weights)?;
        self.branch_mut(b).weights = weights;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != MODEL_VERSION {
            return Err(Error::ModelVersion(self.version));
        }
        if self.circle.branch != ShapeClass::Circle || self.rectangle.branch != ShapeClass::Rectangle {
            return Err(Error::InvalidConfig("branch models are swapped".into()));
        }
        self.circle.validate()?;
        self.rectangle.validate()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text)?;
        m.validate()?;
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BuildConfig {
    pub bins: usize,
    pub smoothing: bool,
    pub circle_weights: [f64; 4],
    pub rectangle_weights: [f64; 4],
    /// Recorded in the model's provenance.
    pub seed: Option<u64>,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            smoothing: true,
            circle_weights: CIRCLE_WEIGHTS,
            rectangle_weights: RECTANGLE_WEIGHTS,
            seed: None,
        }
    }
}

fn build_branch(branch: ShapeClass, samples: &[VarianceSample], bins: usize, weights: [f64; 4]) -> Result<BranchModel> {
    let own: Vec<&VarianceSample> = samples.iter().filter(|s| s.branch == branch).collect();
    if own.is_empty() {
        return Err(Error::EmptyBranch(branch.name()));
    }
    let max = own.iter().map(|s| s.variance).fold(0.0f64, f64::max);
    let top = if max > 0.0 { max * 1.05 } else { 1.0 };
    let edges: Vec<f64> = (0..=bins).map(|i| top * i as f64 / bins as f64).collect();
    let mut model = BranchModel {
        branch,
        edges,
        counts: std::array::from_fn(|_| vec![0; bins]),
        weights,
    };
    for s in own {
        let bin = model.bin_of(s.variance);
        model.counts[s.class.index()][bin] += 1;
    }
    Ok(model)
}

/// Builds both branch histograms from precomputed variances. Bins span
/// `[0, 1.05 * max variance]` uniformly per branch.
pub fn build_from_variances(samples: &[VarianceSample], cfg: &BuildConfig) -> Result<VarianceModel> {
    if cfg.bins < 2 {
        return Err(Error::InvalidConfig(format!("need at least 2 bins, got {}", cfg.bins)));
    }
    if let Some(s) = samples.iter().find(|s| !s.variance.is_finite() || s.variance < 0.0) {
        return Err(Error::InvalidConfig(format!("invalid variance {}", s.variance)));
    }
    validate_weights(&cfg.circle_weights)?;
    validate_weights(&cfg.rectangle_weights)?;
    let mut crop_counts = [0u64; 4];
    for s in samples {
        crop_counts[s.class.index()] += 1;
    }
    Ok(VarianceModel {
        version: MODEL_VERSION,
        smoothing: cfg.smoothing,
        circle: build_branch(ShapeClass::Circle, samples, cfg.bins, cfg.circle_weights)?,
        rectangle: build_branch(ShapeClass::Rectangle, samples, cfg.bins, cfg.rectangle_weights)?,
        provenance: ModelProvenance {
            crop_counts,
            seed: cfg.seed,
            weight_search: None,
        },
    })
}

pub fn build_variance_model(crops: &[LabeledCrop], cfg: &BuildConfig) -> Result<VarianceModel> {
    let samples: Vec<VarianceSample> = crops.iter().map(LabeledCrop::sample).collect::<Result<_>>()?;
    build_from_variances(&samples, cfg)
}

/// Class probabilities of one bin as exact fractions over a shared denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassProbabilities {
    pub numerators: [u64; 4],
    pub denominator: u64,
}

impl ClassProbabilities {
    /// `f_n / sum f`, or `(f_n + 1) / (sum f + 4)` with smoothing. `None` when
    /// unsmoothed counts are all zero.
    pub fn from_counts(counts: [u64; 4], smoothing: bool) -> Option<Self> {
        let numerators = if smoothing { counts.map(|c| c + 1) } else { counts };
        let denominator: u64 = numerators.iter().sum();
        (denominator > 0).then_some(Self {
            numerators,
            denominator,
        })
    }

    pub fn values(&self) -> [f64; 4] {
        self.numerators.map(|n| n as f64 / self.denominator as f64)
    }
}

pub fn class_fractions(model: &VarianceModel, branch: ShapeClass, variance: f64) -> Result<ClassProbabilities> {
    let b = model.branch(branch);
    let bin = b.bin_of(variance.max(0.0));
    ClassProbabilities::from_counts(b.bin_counts(bin), model.smoothing).ok_or(Error::EmptyBin {
        branch: branch.name(),
        bin,
    })
}

pub fn class_probabilities(model: &VarianceModel, branch: ShapeClass, variance: f64) -> Result<[f64; 4]> {
    Ok(class_fractions(model, branch, variance)?.values())
}

/// Index of the largest `w_n * p_n`; ties go to the lowest class index.
pub fn weighted_argmax(p: &[f64; 4], w: &[f64; 4]) -> ComponentClass {
    let mut best = 0;
    let mut best_score = w[0] * p[0];
    for i in 1..4 {
        let s = w[i] * p[i];
        if s > best_score {
            best = i;
            best_score = s;
        }
    }
    ComponentClass::ALL[best]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub branch: ShapeClass,
    pub variance: f64,
    pub probabilities: [f64; 4],
    /// `weights[n] * probabilities[n]`.
    pub weighted: [f64; 4],
    pub predicted: ComponentClass,
}

impl ClassScores {
    pub fn from_probabilities(branch: ShapeClass, variance: f64, p: [f64; 4], w: &[f64; 4]) -> Self {
        Self {
            branch,
            variance,
            probabilities: p,
            weighted: std::array::from_fn(|i| w[i] * p[i]),
            predicted: weighted_argmax(&p, w),
        }
    }

    pub fn predicted_score(&self) -> f64 {
        self.weighted[self.predicted.index()]
    }

    /// Weighted scores rescaled to sum to one.
    pub fn normalized(&self) -> [f64; 4] {
        let total: f64 = self.weighted.iter().sum();
        if total > 0.0 {
            self.weighted.map(|s| s / total)
        } else {
            [0.0; 4]
        }
    }
}

pub fn classify_variance(model: &VarianceModel, branch: ShapeClass, variance: f64) -> Result<ClassScores> {
    let p = class_probabilities(model, branch, variance)?;
    Ok(ClassScores::from_probabilities(
        branch,
        variance,
        p,
        &model.branch(branch).weights,
    ))
}

/// Grayscale crop in, weighted class scores out.
pub fn classify(model: &VarianceModel, branch: ShapeClass, crop: &GrayImage) -> Result<ClassScores> {
    classify_variance(model, branch, pixel_variance(crop)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{Luma, Rgb};
    use proptest::prelude::*;

    fn sample(branch: ShapeClass, class: ComponentClass, variance: f64) -> VarianceSample {
        VarianceSample {
            branch,
            class,
            variance,
        }
    }

    fn both_branches(extra: Vec<VarianceSample>) -> Vec<VarianceSample> {
        let mut v = extra;
        if !v.iter().any(|s| s.branch == ShapeClass::Circle) {
            v.push(sample(ShapeClass::Circle, ComponentClass::Antenna, 5.0));
        }
        if !v.iter().any(|s| s.branch == ShapeClass::Rectangle) {
            v.push(sample(ShapeClass::Rectangle, ComponentClass::Body, 5.0));
        }
        v
    }

    #[test]
    fn grayscale_conversion() {
        let white = RgbImage::from_pixel(3, 2, Rgb([255, 255, 255]));
        assert!(to_grayscale(&white).pixels().all(|p| p.0[0] == 255));
        for v in [0u8, 1, 77, 128, 254] {
            let g = to_grayscale(&RgbImage::from_pixel(1, 1, Rgb([v, v, v])));
            assert_eq!(g.get_pixel(0, 0).0[0], v);
        }
        let red = to_grayscale(&RgbImage::from_pixel(1, 1, Rgb([255, 0, 0])));
        assert_eq!(red.get_pixel(0, 0).0[0], 76);
    }

    #[test]
    fn variance_cases() {
        assert_eq!(variance_of(&[9; 10]).unwrap(), 0.0);
        assert_eq!(variance_of(&[0, 255]).unwrap(), 16256.25);
        assert!(matches!(variance_of(&[3]), Err(Error::TooFewPixels(1))));
        let img = GrayImage::from_fn(7, 5, |x, y| Luma([((x * 37 + y * 11) % 256) as u8]));
        let inv = GrayImage::from_fn(7, 5, |x, y| Luma([255 - img.get_pixel(x, y).0[0]]));
        assert_eq!(pixel_variance(&img).unwrap(), pixel_variance(&inv).unwrap());
    }

    #[test]
    fn single_antenna_crop_fills_one_cell() {
        let m = build_from_variances(
            &[
                sample(ShapeClass::Circle, ComponentClass::Antenna, 12.0),
                sample(ShapeClass::Rectangle, ComponentClass::Body, 3.0),
            ],
            &BuildConfig::default(),
        )
        .unwrap();
        let nonzero: Vec<(usize, usize)> = (0..4)
            .flat_map(|c| (0..m.circle.bins()).map(move |b| (c, b)))
            .filter(|&(c, b)| m.circle.counts[c][b] > 0)
            .collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(nonzero[0].0, ComponentClass::Antenna.index());
    }

    #[test]
    fn duplicate_crop_counts_twice() {
        let s = sample(ShapeClass::Circle, ComponentClass::Thruster, 40.0);
        let m = build_from_variances(&both_branches(vec![s, s]), &BuildConfig::default()).unwrap();
        let bin = m.circle.bin_of(40.0);
        assert_eq!(m.circle.counts[ComponentClass::Thruster.index()][bin], 2);
    }

    #[test]
    fn hand_binning_example() {
        let cfg = BuildConfig {
            bins: 2,
            ..BuildConfig::default()
        };
        let samples: Vec<VarianceSample> = [10.0, 20.0, 90.0]
            .iter()
            .map(|&v| sample(ShapeClass::Rectangle, ComponentClass::Body, v))
            .collect();
        let m = build_from_variances(&both_branches(samples), &cfg).unwrap();
        assert_eq!(m.rectangle.edges, vec![0.0, 47.25, 94.5]);
        assert_eq!(m.rectangle.counts[ComponentClass::Body.index()], vec![2, 1]);
        // above the top edge clamps into the last bin
        assert_eq!(m.rectangle.bin_of(1e9), 1);
        assert_eq!(m.rectangle.bin_of(47.25), 1);
    }

    #[test]
    fn empty_branch_and_bad_bins_rejected() {
        let only_circle = [sample(ShapeClass::Circle, ComponentClass::Antenna, 1.0)];
        assert!(matches!(
            build_from_variances(&only_circle, &BuildConfig::default()),
            Err(Error::EmptyBranch("rectangle"))
        ));
        let cfg = BuildConfig {
            bins: 1,
            ..BuildConfig::default()
        };
        assert!(build_from_variances(&both_branches(vec![]), &cfg).is_err());
    }

    #[test]
    fn probabilities_from_counts() {
        let p = ClassProbabilities::from_counts([6, 2, 1, 1], false).unwrap().values();
        assert_eq!(p, [0.6, 0.2, 0.1, 0.1]);
        let u = ClassProbabilities::from_counts([0; 4], true).unwrap().values();
        assert_eq!(u, [0.25; 4]);
        assert!(ClassProbabilities::from_counts([0; 4], false).is_none());
        let mut last = 0.0;
        for k in [1, 2, 5, 10, 100, 1000, 100000] {
            let p = ClassProbabilities::from_counts([k, 0, 0, 0], true).unwrap().values()[0];
            assert!(p > last);
            last = p;
        }
        assert!(last > 0.9999);
    }

    #[test]
    fn empty_bin_without_smoothing_errors() {
        let mut m = build_from_variances(&both_branches(vec![]), &BuildConfig::default()).unwrap();
        m.smoothing = false;
        // everything sits in bin 31 (variance 5 is the max); bin 0 is empty
        assert!(matches!(
            class_probabilities(&m, ShapeClass::Circle, 0.0),
            Err(Error::EmptyBin { branch: "circle", bin: 0 })
        ));
    }

    #[test]
    fn reference_weights_on_uniform_probabilities() {
        let s = ClassScores::from_probabilities(ShapeClass::Circle, 0.0, [0.25; 4], &CIRCLE_WEIGHTS);
        assert_eq!(s.weighted, [0.1125, 0.01125, 0.1125, 0.01125]);
        assert_eq!(s.predicted, ComponentClass::Antenna);
        let s = ClassScores::from_probabilities(ShapeClass::Rectangle, 0.0, [0.25; 4], &RECTANGLE_WEIGHTS);
        assert_eq!(s.predicted, ComponentClass::SolarPanel);
        assert_eq!(s.predicted_score(), 0.1);
        let s = ClassScores::from_probabilities(ShapeClass::Rectangle, 0.0, [1.0, 0.0, 0.0, 0.0], &RECTANGLE_WEIGHTS);
        assert_eq!(s.predicted, ComponentClass::Antenna);
        let n = s.normalized();
        assert!((n.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classify_crop_end_to_end() {
        let samples = both_branches(vec![
            sample(ShapeClass::Circle, ComponentClass::Antenna, 0.0),
            sample(ShapeClass::Circle, ComponentClass::Thruster, 4000.0),
        ]);
        let m = build_from_variances(&samples, &BuildConfig::default()).unwrap();
        let flat = GrayImage::from_pixel(4, 4, Luma([90]));
        let s = classify(&m, ShapeClass::Circle, &flat).unwrap();
        assert_eq!(s.predicted, ComponentClass::Antenna);
        assert_eq!(s.branch, ShapeClass::Circle);
        let busy = GrayImage::from_fn(4, 4, |x, y| Luma([if (x + y) % 2 == 0 { 0 } else { 126 }]));
        assert_eq!(pixel_variance(&busy).unwrap(), 3969.0);
        assert_eq!(classify(&m, ShapeClass::Circle, &busy).unwrap().predicted, ComponentClass::Thruster);
        assert!(classify(&m, ShapeClass::Circle, &GrayImage::new(1, 1)).is_err());
    }

    #[test]
    fn model_json_round_trip_is_exact() {
        let samples: Vec<VarianceSample> = (0..50)
            .map(|i| {
                sample(
                    ShapeClass::ALL[i % 2],
                    ComponentClass::ALL[i % 4],
                    (i as f64).sqrt() * 123.456789,
                )
            })
            .collect();
        let m = build_from_variances(&samples, &BuildConfig::default()).unwrap();
        let text = m.to_json().unwrap();
        let back = VarianceModel::from_json(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_json().unwrap(), text);
    }

    #[test]
    fn load_rejects_invalid_models() {
        let m = build_from_variances(&both_branches(vec![]), &BuildConfig::default()).unwrap();
        let mut bad = m.clone();
        bad.circle.weights = [0.0; 4];
        assert!(VarianceModel::from_json(&bad.to_json().unwrap()).is_err());
        let mut bad = m.clone();
        bad.version = 99;
        assert!(matches!(
            VarianceModel::from_json(&bad.to_json().unwrap()),
            Err(Error::ModelVersion(99))
        ));
        let mut bad = m;
        bad.rectangle.edges[3] = bad.rectangle.edges[2];
        assert!(VarianceModel::from_json(&bad.to_json().unwrap()).is_err());
    }

    proptest! {
        #[test]
        fn variance_is_shift_invariant(values in proptest::collection::vec(0u8..=155, 2..64), shift in 0u8..=100) {
            let shifted: Vec<u8> = values.iter().map(|v| v + shift).collect();
            prop_assert_eq!(variance_of(&values).unwrap(), variance_of(&shifted).unwrap());
        }

        #[test]
        fn variance_matches_two_pass_definition(values in proptest::collection::vec(any::<u8>(), 2..64)) {
            let n = values.len() as f64;
            let mean = values.iter().map(|&v| v as f64).sum::<f64>() / n;
            let direct = values.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n;
            let v = variance_of(&values).unwrap();
            prop_assert!((v - direct).abs() <= 1e-9 * direct.max(1.0));
        }

        #[test]
        fn scaling_weights_keeps_argmax(
            p in proptest::array::uniform4(0.0..1.0f64),
            w in proptest::array::uniform4(0.001..1.0f64),
            k in 0.01..100.0f64,
        ) {
            let scaled = w.map(|x| x * k);
            prop_assert_eq!(weighted_argmax(&p, &w), weighted_argmax(&p, &scaled));
        }
    }
}
