//! Two-stage component detection on grayscale frames.
//!
//! Stage one proposes circles and rectangles; stage two crops each proposal
//! and assigns a component class (antenna, body, thruster, solar panel) from
//! the crop's pixel-intensity variance, using class histograms kept per shape
//! branch and a weight vector per branch. Around that sit a synthetic shape
//! dataset generator, detection metrics and a command-line front end.

pub mod classifier;
pub mod cli;
pub mod dataset;
pub mod eval;
pub mod error;
pub mod geometry;
pub mod imageio;
pub mod labels;
pub mod pipeline;
pub mod proposer;
pub mod seed;

pub use classifier::{classify, ClassScores, LabeledCrop, VarianceModel};
pub use error::{Error, Result};
pub use geometry::{BBox, ComponentClass, ShapeClass};
pub use pipeline::{crop, detect_components, ComponentDetection, FrameResult};
pub use proposer::{propose_shapes, ProposerParams, ShapeDetection};
