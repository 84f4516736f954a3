//! Python bindings: variance model, proposer, detector and metrics.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use shapevar::classifier::{build_variance_model, load_crops, BuildConfig};
use shapevar::dataset::{build_component_dataset, build_dataset, AugPlan, ComponentSceneConfig, DatasetConfig};
use shapevar::eval::{evaluate as run_evaluate, ConfusionMatrix, EvalSet, Interpolation};
use shapevar::imageio::load_gray;
use shapevar::labels::ClassMap;
use shapevar::pipeline::{detect_components, DetectOptions, ProposalSource};
use shapevar::{BBox, ComponentDetection, ShapeClass, ShapeDetection};
use image::GrayImage;

create_exception!(shapevar, ShapevarError, PyException);

fn err(e: shapevar::Error) -> PyErr {
    ShapevarError::new_err(e.to_string())
}

fn branch(name: &str) -> PyResult<ShapeClass> {
    name.parse().map_err(|_| PyValueError::new_err(format!("unknown branch '{name}'")))
}

/// Loads an image path, or wraps row-major 8-bit `pixels` of the given size.
fn image_arg(path: Option<PathBuf>, pixels: Option<Vec<u8>>, size: Option<(u32, u32)>) -> PyResult<GrayImage> {
    match (path, pixels, size) {
        (Some(p), None, None) => load_gray(&p).map_err(err),
        (None, Some(px), Some((w, h))) => GrayImage::from_raw(w, h, px)
            .ok_or_else(|| PyValueError::new_err(format!("pixel buffer does not match {w}x{h}"))),
        _ => Err(PyValueError::new_err("pass either path or pixels with size=(width, height)")),
    }
}

fn bbox_tuple(b: &BBox) -> (f64, f64, f64, f64) {
    (b.x_min, b.y_min, b.x_max, b.y_max)
}

fn shape_dict<'py>(py: Python<'py>, d: &ShapeDetection) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("shape", d.shape.name())?;
    out.set_item("bbox", bbox_tuple(&d.bbox))?;
    out.set_item("objectness", d.objectness)?;
    Ok(out)
}

fn component_dict<'py>(py: Python<'py>, d: &ComponentDetection) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("component", d.component.name())?;
    out.set_item("bbox", bbox_tuple(&d.bbox))?;
    out.set_item("score", d.score())?;
    out.set_item("shape", d.source_shape.name())?;
    out.set_item("objectness", d.source_objectness)?;
    out.set_item("probabilities", d.scores.probabilities.to_vec())?;
    Ok(out)
}

fn from_json<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// Per-branch variance histograms and weights.
#[pyclass(name = "VarianceModel", module = "shapevar")]
pub struct PyVarianceModel {
    inner: shapevar::VarianceModel,
}

#[pymethods]
impl PyVarianceModel {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        shapevar::VarianceModel::load(&path).map(|inner| Self { inner }).map_err(err)
    }

    /// Builds from a crop tree or crop manifest.
    #[staticmethod]
    #[pyo3(signature = (crops, bins = 32, smoothing = true, seed = None))]
    fn build(crops: PathBuf, bins: usize, smoothing: bool, seed: Option<u64>) -> PyResult<Self> {
        let crops = load_crops(&crops).map_err(err)?;
        let cfg = BuildConfig {
            bins,
            smoothing,
            seed,
            ..BuildConfig::default()
        };
        build_variance_model(&crops, &cfg).map(|inner| Self { inner }).map_err(err)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save(&path).map_err(err)
    }

    #[getter]
    fn smoothing(&self) -> bool {
        self.inner.smoothing
    }

    fn bins(&self, branch_name: &str) -> PyResult<usize> {
        Ok(self.inner.branch(branch(branch_name)?).bins())
    }

    fn weights(&self, branch_name: &str) -> PyResult<Vec<f64>> {
        Ok(self.inner.branch(branch(branch_name)?).weights.to_vec())
    }

    fn set_weights(&mut self, branch_name: &str, weights: [f64; 4]) -> PyResult<()> {
        self.inner.set_weights(branch(branch_name)?, weights).map_err(err)
    }

    /// Scores one crop against a branch.
    #[pyo3(signature = (branch_name, path = None, pixels = None, size = None))]
    fn classify<'py>(
        &self,
        py: Python<'py>,
        branch_name: &str,
        path: Option<PathBuf>,
        pixels: Option<Vec<u8>>,
        size: Option<(u32, u32)>,
    ) -> PyResult<Bound<'py, PyDict>> {
        let img = image_arg(path, pixels, size)?;
        let s = shapevar::classify(&self.inner, branch(branch_name)?, &img).map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("predicted", s.predicted.name())?;
        out.set_item("variance", s.variance)?;
        out.set_item("probabilities", s.probabilities.to_vec())?;
        out.set_item("weighted", s.weighted.to_vec())?;
        Ok(out)
    }

    /// Runs both stages over one image.
    #[pyo3(signature = (path = None, pixels = None, size = None, pad = 0.0, min_objectness = 0.0))]
    fn detect<'py>(
        &self,
        py: Python<'py>,
        path: Option<PathBuf>,
        pixels: Option<Vec<u8>>,
        size: Option<(u32, u32)>,
        pad: f64,
        min_objectness: f64,
    ) -> PyResult<Bound<'py, PyList>> {
        let img = image_arg(path, pixels, size)?;
        let opts = DetectOptions { pad, min_objectness };
        opts.validate().map_err(err)?;
        let params = shapevar::ProposerParams::default();
        let dets = detect_components(&img, &self.inner, ProposalSource::Proposer(&params), &opts).map_err(err)?;
        let items = dets.iter().map(|d| component_dict(py, d)).collect::<PyResult<Vec<_>>>()?;
        PyList::new(py, items)
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "VarianceModel(bins={}, smoothing={})",
            self.inner.circle.bins(),
            self.inner.smoothing
        )
    }
}

/// Circle and rectangle proposals with default parameters.
#[pyfunction]
#[pyo3(signature = (path = None, pixels = None, size = None))]
fn propose<'py>(
    py: Python<'py>,
    path: Option<PathBuf>,
    pixels: Option<Vec<u8>>,
    size: Option<(u32, u32)>,
) -> PyResult<Bound<'py, PyList>> {
    let img = image_arg(path, pixels, size)?;
    let dets = shapevar::propose_shapes(&img, &shapevar::ProposerParams::default()).map_err(err)?;
    let items = dets.iter().map(|d| shape_dict(py, d)).collect::<PyResult<Vec<_>>>()?;
    PyList::new(py, items)
}

/// Writes a synthetic dataset and returns the number of images.
#[pyfunction]
#[pyo3(signature = (out, count = 30, seed = 0, components = false, extra = None))]
fn generate(out: PathBuf, count: usize, seed: u64, components: bool, extra: Option<usize>) -> PyResult<usize> {
    if components {
        let m = build_component_dataset(&ComponentSceneConfig::default(), count, seed, &out).map_err(err)?;
        return Ok(m.entries.len());
    }
    let mut cfg = DatasetConfig {
        base_count: count,
        ..DatasetConfig::default()
    };
    if let Some(k) = extra {
        cfg.plan = AugPlan::Extra { count: k };
    }
    Ok(build_dataset(&cfg, seed, &out).map_err(err)?.entries.len())
}

/// Scores a detection directory against a label directory; returns the report
/// as a dict.
#[pyfunction]
#[pyo3(signature = (dets, gt, classes, iou = 0.5, interpolation = "all"))]
fn evaluate<'py>(
    py: Python<'py>,
    dets: PathBuf,
    gt: PathBuf,
    classes: PathBuf,
    iou: f64,
    interpolation: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let interp = match interpolation {
        "all" => Interpolation::AllPoint,
        "101" => Interpolation::Point101,
        other => return Err(PyValueError::new_err(format!("interpolation must be 'all' or '101', got '{other}'"))),
    };
    let names = ClassMap::read(&classes).map_err(err)?.names;
    let set = EvalSet::from_dirs(&dets, &gt).map_err(err)?;
    let report = run_evaluate(&set, &names, iou, interp).map_err(err)?;
    from_json(py, &report.to_json().map_err(err)?)
}

/// Precision per predicted row and recall per actual column of a square count
/// matrix; `None` where undefined.
#[pyfunction]
#[pyo3(signature = (counts, classes = None))]
fn confusion<'py>(
    py: Python<'py>,
    counts: Vec<Vec<u64>>,
    classes: Option<Vec<String>>,
) -> PyResult<Bound<'py, PyDict>> {
    let classes = classes.unwrap_or_else(|| ClassMap::components().names);
    let m = ConfusionMatrix::from_counts(classes, counts).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("precision", m.precisions())?;
    out.set_item("recall", m.recalls())?;
    out.set_item("accuracy", m.accuracy())?;
    out.set_item("table", m.to_string())?;
    Ok(out)
}

#[pymodule(name = "shapevar")]
pub fn shapevar_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ShapevarError", m.py().get_type::<ShapevarError>())?;
    m.add_class::<PyVarianceModel>()?;
    m.add_function(wrap_pyfunction!(propose, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(confusion, m)?)?;
    Ok(())
}
