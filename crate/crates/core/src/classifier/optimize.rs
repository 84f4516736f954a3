//! Exhaustive search for branch weight vectors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{class_probabilities, weighted_argmax, LabeledCrop, VarianceModel, VarianceSample};
use crate::error::{Error, Result};
use crate::geometry::{ComponentClass, ShapeClass};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Fraction of validation crops classified correctly.
    #[default]
    Accuracy,
    /// Mean recall over the classes present in the validation set.
    MacroRecall,
}

/// Outcome of a weight search, kept in the model's provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSearch {
    pub step: f64,
    pub objective: Objective,
    pub circle: [f64; 4],
    pub rectangle: [f64; 4],
    pub circle_score: f64,
    pub rectangle_score: f64,
    pub candidates: usize,
}

impl WeightSearch {
    pub fn weights(&self, b: ShapeClass) -> [f64; 4] {
        match b {
            ShapeClass::Circle => self.circle,
            ShapeClass::Rectangle => self.rectangle,
        }
    }
}

fn grid_divisions(step: f64) -> Result<u32> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidConfig(format!("grid step {step} must lie in (0, 1]")));
    }
    let n = (1.0 / step).round();
    if (n * step - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!("grid step {step} does not divide 1")));
    }
    Ok(n as u32)
}

/// Every 4-vector of non-negative multiples of `step` summing to one, in
/// lexicographic order.
pub fn weight_grid(step: f64) -> Result<Vec<[f64; 4]>> {
    let n = grid_divisions(step)?;
    let d = n as f64;
    let mut out = Vec::new();
    for a in 0..=n {
        for b in 0..=n - a {
            for c in 0..=n - a - b {
                let e = n - a - b - c;
                out.push([a as f64 / d, b as f64 / d, c as f64 / d, e as f64 / d]);
            }
        }
    }
    Ok(out)
}

fn score(objective: Objective, truth: &[ComponentClass], probs: &[[f64; 4]], w: &[f64; 4]) -> f64 {
    let mut correct = [0usize; 4];
    let mut total = [0usize; 4];
    for (t, p) in truth.iter().zip(probs) {
        total[t.index()] += 1;
        if weighted_argmax(p, w) == *t {
            correct[t.index()] += 1;
        }
    }
    match objective {
        Objective::Accuracy => correct.iter().sum::<usize>() as f64 / truth.len() as f64,
        Objective::MacroRecall => {
            let present: Vec<f64> = (0..4)
                .filter(|&i| total[i] > 0)
                .map(|i| correct[i] as f64 / total[i] as f64)
                .collect();
            present.iter().sum::<f64>() / present.len() as f64
        }
    }
}

/// Objective value of `weights` on the validation samples of one branch.
pub fn evaluate_weights(
    model: &VarianceModel,
    branch: ShapeClass,
    samples: &[VarianceSample],
    weights: &[f64; 4],
    objective: Objective,
) -> Result<f64> {
    let (truth, probs) = branch_inputs(model, branch, samples)?;
    Ok(score(objective, &truth, &probs, weights))
}

type BranchInputs = (Vec<ComponentClass>, Vec<[f64; 4]>);

fn branch_inputs(model: &VarianceModel, branch: ShapeClass, samples: &[VarianceSample]) -> Result<BranchInputs> {
    let own: Vec<&VarianceSample> = samples.iter().filter(|s| s.branch == branch).collect();
    if own.is_empty() {
        return Err(Error::EmptyBranch(branch.name()));
    }
    let probs = own
        .iter()
        .map(|s| class_probabilities(model, branch, s.variance))
        .collect::<Result<Vec<_>>>()?;
    Ok((own.iter().map(|s| s.class).collect(), probs))
}

/// Best grid vector for one branch; ties go to the lexicographically smallest.
fn search_branch(
    model: &VarianceModel,
    branch: ShapeClass,
    samples: &[VarianceSample],
    grid: &[[f64; 4]],
    objective: Objective,
) -> Result<([f64; 4], f64)> {
    let (truth, probs) = branch_inputs(model, branch, samples)?;
    let scores: Vec<f64> = grid
        .par_iter()
        .map(|w| score(objective, &truth, &probs, w))
        .collect();
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    Ok((grid[best], scores[best]))
}

pub fn optimize_weights_for_samples(
    model: &VarianceModel,
    validation: &[VarianceSample],
    step: f64,
    objective: Objective,
) -> Result<WeightSearch> {
    let grid = weight_grid(step)?;
    let (circle, circle_score) = search_branch(model, ShapeClass::Circle, validation, &grid, objective)?;
    let (rectangle, rectangle_score) = search_branch(model, ShapeClass::Rectangle, validation, &grid, objective)?;
    Ok(WeightSearch {
        step,
        objective,
        circle,
        rectangle,
        circle_score,
        rectangle_score,
        candidates: grid.len(),
    })
}

/// Exhaustive search over the discretized simplex, one vector per branch,
/// maximizing `objective` of the classifier on the validation crops.
pub fn optimize_weights(
    model: &VarianceModel,
    validation: &[LabeledCrop],
    step: f64,
    objective: Objective,
) -> Result<WeightSearch> {
    let samples: Vec<VarianceSample> = validation
        .iter()
        .map(LabeledCrop::sample)
        .collect::<Result<_>>()?;
    optimize_weights_for_samples(model, &samples, step, objective)
}
