//! Component scenes: the shape scenes of [`generate_base_image`] with every
//! circle and rectangle repainted as one of its branch's component classes,
//! each class carrying its own stripe texture. They give the variance
//! classifier something to learn and the full pipeline labeled frames to be
//! scored against.

use std::fs;
use std::path::{Path, PathBuf};

use image::{GrayImage, Luma};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::render::{generate_base_image, SceneConfig, ShapeSpec};
use super::{MANIFEST_FILE, MANIFEST_VERSION};
use crate::error::{Error, Result};
use crate::geometry::{BBox, ComponentClass, ShapeClass};
use crate::labels::{write_labels, ClassMap, YoloLabel};
use crate::pipeline::crop;
use crate::seed::{derive_seed, rng_from_seed};

/// Stripes alternating between `low` and `high` every `period` pixels,
/// measured from the shape's box corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Texture {
    pub low: u8,
    pub high: u8,
    pub period: u32,
    pub vertical: bool,
}

impl Texture {
    pub const fn flat(v: u8) -> Self {
        Self {
            low: v,
            high: v,
            period: 1,
            vertical: false,
        }
    }

    pub fn value(&self, dx: u32, dy: u32) -> u8 {
        let t = if self.vertical { dx } else { dy };
        if (t / self.period.max(1)).is_multiple_of(2) {
            self.low
        } else {
            self.high
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComponentSceneConfig {
    pub scene: SceneConfig,
    /// Indexed like [`ComponentClass::ALL`].
    pub textures: [Texture; 4],
}

impl Default for ComponentSceneConfig {
    fn default() -> Self {
        Self {
            scene: SceneConfig {
                kind_weights: [1.0, 1.0, 0.0],
                ..SceneConfig::default()
            },
            textures: [
                Texture::flat(20),
                Texture {
                    low: 90,
                    high: 110,
                    period: 3,
                    vertical: false,
                },
                Texture {
                    low: 50,
                    high: 110,
                    period: 4,
                    vertical: false,
                },
                Texture {
                    low: 10,
                    high: 110,
                    period: 4,
                    vertical: true,
                },
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentObject {
    pub class: ComponentClass,
    pub bbox: BBox,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentScene {
    pub image: GrayImage,
    pub objects: Vec<ComponentObject>,
}

fn paint(canvas: &mut GrayImage, shape: &ShapeSpec, texture: &Texture) {
    let b = shape.bbox().clip(canvas.width() as f64, canvas.height() as f64);
    let (x0, y0) = (b.x_min.floor() as u32, b.y_min.floor() as u32);
    let (x1, y1) = (b.x_max.ceil() as u32, b.y_max.ceil() as u32);
    for y in y0..y1 {
        for x in x0..x1 {
            if shape.covers(x as f64 + 0.5, y as f64 + 0.5) {
                canvas.put_pixel(x, y, Luma([texture.value(x - x0, y - y0)]));
            }
        }
    }
}

/// A shape scene whose circles become antennas or thrusters and whose
/// rectangles become bodies or solar panels, chosen uniformly.
pub fn generate_component_scene(cfg: &ComponentSceneConfig, seed: u64) -> Result<ComponentScene> {
    let base = generate_base_image(&cfg.scene, derive_seed(seed, 0))?;
    let mut rng = rng_from_seed(derive_seed(seed, 1));
    let mut image = GrayImage::from_pixel(cfg.scene.width, cfg.scene.height, Luma([cfg.scene.background]));
    let mut objects = Vec::new();
    for shape in &base.shapes {
        match shape.shape_class() {
            Some(branch) => {
                let class = branch.components()[rng.gen_range(0..2)];
                paint(&mut image, shape, &cfg.textures[class.index()]);
                objects.push(ComponentObject {
                    class,
                    bbox: shape.bbox(),
                });
            }
            None => shape.render(&mut image),
        }
    }
    Ok(ComponentScene { image, objects })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentEntry {
    pub name: String,
    pub image: PathBuf,
    pub labels: PathBuf,
    pub seed: u64,
    pub objects: Vec<ComponentObject>,
    /// Crop files, one per object, relative to the manifest.
    pub crops: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentManifest {
    pub version: u32,
    pub seed: u64,
    pub canvas: (u32, u32),
    pub classes: Vec<String>,
    pub config: ComponentSceneConfig,
    pub entries: Vec<ComponentEntry>,
}

/// Writes `count` component scenes under `dir`: `images/`, `labels/` in the
/// component taxonomy, `classes.txt`, the crop tree
/// `crops/<branch>/<class>/` and `manifest.json`.
pub fn build_component_dataset(cfg: &ComponentSceneConfig, count: usize, seed: u64, dir: &Path) -> Result<ComponentManifest> {
    if count == 0 {
        return Err(Error::InvalidConfig("count must be at least 1".into()));
    }
    cfg.scene.validate()?;
    for sub in ["images", "labels"] {
        fs::create_dir_all(dir.join(sub)).map_err(|e| Error::io(dir.join(sub), e))?;
    }
    for class in ComponentClass::ALL {
        let d = dir.join("crops").join(class.branch().name()).join(class.name());
        fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }
    ClassMap::components().write(&dir.join("classes.txt"))?;

    let entries = (0..count)
        .into_par_iter()
        .map(|i| {
            let sub = derive_seed(seed, i as u64);
            let scene = generate_component_scene(cfg, sub)?;
            let name = format!("img_{i:04}");
            let image_rel = PathBuf::from("images").join(format!("{name}.png"));
            let label_rel = PathBuf::from("labels").join(format!("{name}.txt"));
            let image_path = dir.join(&image_rel);
            scene.image.save(&image_path).map_err(|e| Error::image(&image_path, e))?;
            let (w, h) = scene.image.dimensions();
            let labels: Vec<YoloLabel> = scene
                .objects
                .iter()
                .map(|o| YoloLabel::from_bbox(o.class.index(), &o.bbox, w, h))
                .collect();
            write_labels(&dir.join(&label_rel), &labels)?;
            let mut crops = Vec::new();
            for (k, o) in scene.objects.iter().enumerate() {
                let branch: ShapeClass = o.class.branch();
                let rel = PathBuf::from("crops")
                    .join(branch.name())
                    .join(o.class.name())
                    .join(format!("{name}_{k:02}.png"));
                let path = dir.join(&rel);
                crop(&scene.image, &o.bbox, 0.0)?
                    .save(&path)
                    .map_err(|e| Error::image(&path, e))?;
                crops.push(rel);
            }
            Ok(ComponentEntry {
                name,
                image: image_rel,
                labels: label_rel,
                seed: sub,
                objects: scene.objects,
                crops,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let manifest = ComponentManifest {
        version: MANIFEST_VERSION,
        seed,
        canvas: (cfg.scene.width, cfg.scene.height),
        classes: ClassMap::components().names,
        config: cfg.clone(),
        entries,
    };
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}
