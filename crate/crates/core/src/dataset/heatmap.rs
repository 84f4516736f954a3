//! Label-placement heatmaps for checking that boxes cover the canvas.

use std::collections::BTreeMap;

use image::{GrayImage, Luma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::YoloLabel;

/// Per-cell counts of label boxes, row-major. `per_class` is keyed by class id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Heatmap {
    pub rows: usize,
    pub cols: usize,
    pub combined: Vec<Vec<u64>>,
    pub per_class: BTreeMap<usize, Vec<Vec<u64>>>,
}

impl Heatmap {
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            combined: vec![vec![0; cols]; rows],
            per_class: BTreeMap::new(),
        }
    }

    pub fn total(&self) -> u64 {
        self.combined.iter().flatten().sum()
    }

    pub fn nonzero_fraction(&self) -> f64 {
        let nz = self.combined.iter().flatten().filter(|&&c| c > 0).count();
        nz as f64 / (self.rows * self.cols) as f64
    }

    /// Grayscale rendering, darker for more labels, `cell` pixels per cell.
    pub fn render(&self, class: Option<usize>, cell: u32) -> GrayImage {
        let empty = vec![vec![0; self.cols]; self.rows];
        let grid = match class {
            Some(c) => self.per_class.get(&c).unwrap_or(&empty),
            None => &self.combined,
        };
        let max = grid.iter().flatten().copied().max().unwrap_or(0).max(1) as f64;
        GrayImage::from_fn(self.cols as u32 * cell, self.rows as u32 * cell, |x, y| {
            let v = grid[(y / cell) as usize][(x / cell) as usize] as f64;
            Luma([(255.0 - 255.0 * v / max).round() as u8])
        })
    }
}

/// Cells of a `rows x cols` grid over the unit square that the box overlaps
/// with positive area.
fn covered_cells(l: &YoloLabel, rows: usize, cols: usize) -> impl Iterator<Item = (usize, usize)> {
    let b = l.unit_box();
    let col_hit = move |c: usize| b.x_min < (c + 1) as f64 / cols as f64 && b.x_max > c as f64 / cols as f64;
    let row_hit = move |r: usize| b.y_min < (r + 1) as f64 / rows as f64 && b.y_max > r as f64 / rows as f64;
    (0..rows)
        .filter(move |&r| row_hit(r))
        .flat_map(move |r| (0..cols).filter(move |&c| col_hit(c)).map(move |c| (r, c)))
}

/// Accumulates every label box into the grid cells it overlaps.
pub fn label_heatmap<'a>(labels: impl IntoIterator<Item = &'a YoloLabel>, rows: usize, cols: usize) -> Result<Heatmap> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidConfig(format!("heatmap grid must be at least 1x1, got {rows}x{cols}")));
    }
    let mut map = Heatmap::empty(rows, cols);
    for l in labels {
        let per = map
            .per_class
            .entry(l.class_id)
            .or_insert_with(|| vec![vec![0; cols]; rows]);
        for (r, c) in covered_cells(l, rows, cols) {
            map.combined[r][c] += 1;
            per[r][c] += 1;
        }
    }
    Ok(map)
}
