//! Synthetic shape datasets: base scenes, augmented variants, YOLO labels and
//! a manifest that is enough to regenerate everything.
//!
//! Every image draws from its own sub-seed of the master seed, so output is
//! identical however the work is scheduled.

pub mod augment;
pub mod components;
pub mod heatmap;
pub mod render;

use std::fs;
use std::path::{Path, PathBuf};

use image::GrayImage;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use components::{
    build_component_dataset, generate_component_scene, ComponentManifest, ComponentObject, ComponentScene,
    ComponentSceneConfig, Texture,
};
pub use augment::{augment, AugConfig, AugParams, AugRecord, Augmented, NoiseRecord};
pub use heatmap::{label_heatmap, Heatmap};
pub use render::{generate_base_image, Label, Scene, SceneConfig, ShapeGeometry, ShapeKind, ShapeSpec};

use crate::error::{Error, Result};
use crate::labels::{write_labels, ClassMap, YoloLabel};
use crate::seed::{derive_seed, rng_from_seed};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

/// Extra augmented images per base image under the default plan: 30 base
/// images grow to 53.
pub const DEFAULT_EXTRA_FRACTION: f64 = 23.0 / 30.0;

/// How many augmented images to add on top of the base set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AugPlan {
    /// `multiplier` augmented copies of every base image.
    PerImage { multiplier: usize },
    /// Exactly `count` augmented images.
    Extra { count: usize },
    /// `round(base * fraction)` augmented images.
    Fraction { fraction: f64 },
}

impl Default for AugPlan {
    fn default() -> Self {
        AugPlan::Fraction {
            fraction: DEFAULT_EXTRA_FRACTION,
        }
    }
}

impl AugPlan {
    pub fn extra_count(&self, base: usize) -> usize {
        match *self {
            AugPlan::PerImage { multiplier } => base * multiplier,
            AugPlan::Extra { count } => count,
            AugPlan::Fraction { fraction } => (base as f64 * fraction).round() as usize,
        }
    }

    /// Base image id for each augmented image. Per-image plans walk the base
    /// set in order; the others draw base ids without replacement until the
    /// set is exhausted, then with replacement.
    pub fn assign(&self, base: usize, rng: &mut impl Rng) -> Vec<usize> {
        let n = self.extra_count(base);
        if base == 0 {
            return Vec::new();
        }
        if let AugPlan::PerImage { multiplier } = *self {
            return (0..base).flat_map(|b| std::iter::repeat_n(b, multiplier)).collect();
        }
        let mut order: Vec<usize> = (0..base).collect();
        order.shuffle(rng);
        let mut out: Vec<usize> = order.into_iter().take(n).collect();
        while out.len() < n {
            out.push(rng.gen_range(0..base));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetConfig {
    pub base_count: usize,
    pub scene: SceneConfig,
    pub aug: AugConfig,
    pub plan: AugPlan,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            base_count: 30,
            scene: SceneConfig::default(),
            aug: AugConfig::default(),
            plan: AugPlan::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Base { seed: u64 },
    Augmented { base_id: usize, seed: u64, params: AugParams, noise_pixels: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetItem {
    pub id: usize,
    pub image: GrayImage,
    pub labels: Vec<Label>,
    pub provenance: Provenance,
    /// Present for augmented items.
    pub record: Option<AugRecord>,
}

impl DatasetItem {
    pub fn name(&self) -> String {
        format!("img_{:04}", self.id)
    }

    pub fn yolo_labels(&self) -> Vec<YoloLabel> {
        let (w, h) = self.image.dimensions();
        self.labels
            .iter()
            .map(|l| YoloLabel::from_bbox(l.class.id(), &l.bbox, w, h))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub config: DatasetConfig,
    pub seed: u64,
    pub items: Vec<DatasetItem>,
}

/// Generates base scenes then their augmented variants, in memory.
pub fn generate_dataset(cfg: &DatasetConfig, seed: u64) -> Result<Dataset> {
    if cfg.base_count == 0 {
        return Err(Error::InvalidConfig("base count must be at least 1".into()));
    }
    cfg.scene.validate()?;
    cfg.aug.validate()?;
    let base = cfg.base_count;
    let scenes: Vec<Scene> = (0..base)
        .into_par_iter()
        .map(|i| generate_base_image(&cfg.scene, derive_seed(seed, i as u64)))
        .collect::<Result<_>>()?;

    let assignment = cfg.plan.assign(base, &mut rng_from_seed(derive_seed(seed, u64::MAX)));
    let augmented: Vec<DatasetItem> = assignment
        .par_iter()
        .enumerate()
        .map(|(k, &base_id)| {
            let id = base + k;
            let sub = derive_seed(seed, id as u64);
            let src = &scenes[base_id];
            let out = augment(&src.image, &src.labels, &cfg.aug, sub);
            DatasetItem {
                id,
                image: out.image,
                labels: out.labels,
                provenance: Provenance::Augmented {
                    base_id,
                    seed: sub,
                    params: out.record.params,
                    noise_pixels: out.record.noise.pixels.len(),
                },
                record: Some(out.record),
            }
        })
        .collect();

    let mut items: Vec<DatasetItem> = scenes
        .into_iter()
        .enumerate()
        .map(|(id, s)| DatasetItem {
            id,
            image: s.image,
            labels: s.labels,
            provenance: Provenance::Base {
                seed: derive_seed(seed, id as u64),
            },
            record: None,
        })
        .collect();
    items.extend(augmented);
    Ok(Dataset {
        config: cfg.clone(),
        seed,
        items,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub image: PathBuf,
    pub labels: PathBuf,
    pub label_count: usize,
    pub provenance: Provenance,
}

/// Versioned description of a written dataset. Paths are relative to the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub seed: u64,
    pub canvas: (u32, u32),
    pub classes: Vec<String>,
    pub config: DatasetConfig,
    pub entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Self = serde_json::from_str(&text)?;
        if m.version != MANIFEST_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported manifest version {}",
                m.version
            )));
        }
        Ok(m)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Writes `images/*.png`, `labels/*.txt`, `classes.txt` and the manifest under
/// `dir`.
pub fn write_dataset(dataset: &Dataset, dir: &Path) -> Result<DatasetManifest> {
    let images = dir.join("images");
    let labels = dir.join("labels");
    create_dir(&images)?;
    create_dir(&labels)?;
    ClassMap::shapes().write(&dir.join("classes.txt"))?;

    let entries = dataset
        .items
        .par_iter()
        .map(|item| {
            let name = item.name();
            let image_rel = PathBuf::from("images").join(format!("{name}.png"));
            let label_rel = PathBuf::from("labels").join(format!("{name}.txt"));
            let image_path = dir.join(&image_rel);
            item.image
                .save(&image_path)
                .map_err(|e| Error::image(&image_path, e))?;
            write_labels(&dir.join(&label_rel), &item.yolo_labels())?;
            Ok(ManifestEntry {
                name,
                image: image_rel,
                labels: label_rel,
                label_count: item.labels.len(),
                provenance: item.provenance.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let manifest = DatasetManifest {
        version: MANIFEST_VERSION,
        seed: dataset.seed,
        canvas: (dataset.config.scene.width, dataset.config.scene.height),
        classes: ClassMap::shapes().names,
        config: dataset.config.clone(),
        entries,
    };
    manifest.write(&dir.join(MANIFEST_FILE))?;
    Ok(manifest)
}

/// Generates and writes a dataset in one step.
pub fn build_dataset(cfg: &DatasetConfig, seed: u64, dir: &Path) -> Result<DatasetManifest> {
    let dataset = generate_dataset(cfg, seed)?;
    write_dataset(&dataset, dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> DatasetConfig {
        DatasetConfig {
            base_count: 6,
            scene: SceneConfig {
                width: 96,
                height: 96,
                min_shapes: 1,
                max_shapes: 3,
                min_size: 12,
                max_size: 30,
                ..SceneConfig::default()
            },
            ..DatasetConfig::default()
        }
    }

    #[test]
    fn default_plan_turns_30_into_53() {
        assert_eq!(30 + AugPlan::default().extra_count(30), 53);
        let ids = AugPlan::default().assign(30, &mut rng_from_seed(1));
        assert_eq!(ids.len(), 23);
        let mut uniq = ids.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), 23, "first pass draws without replacement");
    }

    #[test]
    fn extra_beyond_base_reuses_images() {
        let ids = AugPlan::Extra { count: 9 }.assign(4, &mut rng_from_seed(2));
        assert_eq!(ids.len(), 9);
        let mut first: Vec<usize> = ids[..4].to_vec();
        first.sort();
        assert_eq!(first, vec![0, 1, 2, 3]);
        assert!(ids.iter().all(|&i| i < 4));
    }

    #[test]
    fn multiplier_zero_keeps_only_base() {
        let cfg = DatasetConfig {
            plan: AugPlan::PerImage { multiplier: 0 },
            ..small()
        };
        let ds = generate_dataset(&cfg, 3).unwrap();
        assert_eq!(ds.items.len(), 6);
        assert!(ds.items.iter().all(|i| matches!(i.provenance, Provenance::Base { .. })));
    }

    #[test]
    fn per_image_multiplier_counts() {
        let cfg = DatasetConfig {
            plan: AugPlan::PerImage { multiplier: 2 },
            ..small()
        };
        let ds = generate_dataset(&cfg, 3).unwrap();
        assert_eq!(ds.items.len(), 18);
    }

    #[test]
    fn zero_base_count_is_rejected() {
        let cfg = DatasetConfig {
            base_count: 0,
            ..small()
        };
        assert!(generate_dataset(&cfg, 0).is_err());
    }

    #[test]
    fn written_dataset_is_reproducible() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let ma = build_dataset(&small(), 11, a.path()).unwrap();
        let mb = build_dataset(&small(), 11, b.path()).unwrap();
        assert_eq!(ma, mb);
        for e in &ma.entries {
            for rel in [&e.image, &e.labels] {
                assert_eq!(
                    fs::read(a.path().join(rel)).unwrap(),
                    fs::read(b.path().join(rel)).unwrap()
                );
            }
        }
        assert_eq!(
            fs::read(a.path().join(MANIFEST_FILE)).unwrap(),
            fs::read(b.path().join(MANIFEST_FILE)).unwrap()
        );
        let back = DatasetManifest::read(&a.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(back, ma);
        for e in &ma.entries {
            if let Provenance::Augmented { base_id, .. } = e.provenance {
                assert!(matches!(ma.entries[base_id].provenance, Provenance::Base { .. }));
            }
        }
    }

    #[test]
    fn parallelism_does_not_change_output() {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let seq = pool.install(|| generate_dataset(&small(), 5).unwrap());
        let par = generate_dataset(&small(), 5).unwrap();
        assert_eq!(seq, par);
    }
}
