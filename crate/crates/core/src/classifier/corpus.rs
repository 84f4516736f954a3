//! Loading labeled crops from disk.
//!
//! Two layouts are accepted:
//! - a directory tree `<branch>/<class>/*.png`, e.g. `circle/antenna/0001.png`;
//! - a JSON manifest listing full images with a box, class and branch each,
//!   cropped on load. Image paths are relative to the manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::LabeledCrop;
use crate::error::{Error, Result};
use crate::geometry::{BBox, ComponentClass, ShapeClass};
use crate::imageio::load_gray;
use crate::pipeline::crop;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CropManifestEntry {
    pub image: PathBuf,
    #[serde(rename = "box")]
    pub bbox: BBox,
    pub class: ComponentClass,
    pub branch: ShapeClass,
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<_>>()?;
    out.sort();
    Ok(out)
}

/// Reads `<root>/<branch>/<class>/*.png`. Unknown directory names are an error;
/// missing branch or class directories are skipped.
pub fn load_crop_dir(root: &Path) -> Result<Vec<LabeledCrop>> {
    let mut crops = Vec::new();
    for branch_dir in sorted_entries(root)? {
        if !branch_dir.is_dir() {
            continue;
        }
        let branch: ShapeClass = dir_name(&branch_dir).parse()?;
        for class_dir in sorted_entries(&branch_dir)? {
            if !class_dir.is_dir() {
                continue;
            }
            let class: ComponentClass = dir_name(&class_dir).parse()?;
            for file in sorted_entries(&class_dir)? {
                let is_png = file
                    .extension()
                    .is_some_and(|e| e.eq_ignore_ascii_case("png"));
                if is_png {
                    crops.push(LabeledCrop::new(load_gray(&file)?, class, branch)?);
                }
            }
        }
    }
    Ok(crops)
}

fn dir_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

pub fn load_crop_manifest(path: &Path) -> Result<Vec<LabeledCrop>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let entries: Vec<CropManifestEntry> = serde_json::from_str(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    entries
        .iter()
        .map(|e| {
            let img = load_gray(&base.join(&e.image))?;
            LabeledCrop::new(crop(&img, &e.bbox, 0.0)?, e.class, e.branch)
        })
        .collect()
}

/// Directory tree or manifest file, whichever `path` is.
pub fn load_crops(path: &Path) -> Result<Vec<LabeledCrop>> {
    if path.is_dir() {
        load_crop_dir(path)
    } else {
        load_crop_manifest(path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::{GrayImage, Luma};

    #[test]
    fn reads_directory_tree_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("crops");
        for (branch, class, v) in [("circle", "antenna", 10u8), ("rectangle", "solar_panel", 200)] {
            let d = root.join(branch).join(class);
            fs::create_dir_all(&d).unwrap();
            GrayImage::from_pixel(3, 3, Luma([v])).save(d.join("a.png")).unwrap();
            GrayImage::from_pixel(4, 2, Luma([v])).save(d.join("b.png")).unwrap();
            fs::write(d.join("notes.txt"), "ignored").unwrap();
        }
        let crops = load_crop_dir(&root).unwrap();
        assert_eq!(crops.len(), 4);
        assert_eq!(crops[0].branch, ShapeClass::Circle);
        assert_eq!(crops[3].class, ComponentClass::SolarPanel);

        let frame = GrayImage::from_fn(20, 20, |x, _| Luma([x as u8 * 10]));
        frame.save(dir.path().join("frame.png")).unwrap();
        let manifest = serde_json::json!([
            {"image": "frame.png", "box": {"x_min": 2.0, "y_min": 2.0, "x_max": 6.0, "y_max": 5.0},
             "class": "body", "branch": "rectangle"}
        ]);
        let mpath = dir.path().join("crops.json");
        fs::write(&mpath, manifest.to_string()).unwrap();
        let crops = load_crops(&mpath).unwrap();
        assert_eq!(crops[0].image.dimensions(), (4, 3));
        assert_eq!(crops[0].image.get_pixel(0, 0).0[0], 20);
    }

    #[test]
    fn unknown_class_directory_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir_all(dir.path().join("circle").join("wheel")).unwrap();
        assert!(load_crop_dir(dir.path()).is_err());
    }
}
