//! The `shapevar` command line: one binary, one subcommand per stage.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 unknown subcommand, 3 missing
//! or invalid flag, 4 unreadable input path. Failures print one line on
//! stderr.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::classifier::{
    build_variance_model, classify, load_crops, optimize_weights, BuildConfig, Objective, VarianceModel,
};
use crate::dataset::{
    build_component_dataset, build_dataset, label_heatmap, AugPlan, ComponentSceneConfig, DatasetConfig,
};
use crate::error::{Error, Result};
use crate::eval::{
    detection_counts, evaluate, parse_pairs, ConfusionMatrix, EvalSet, Interpolation, ReportFormat,
};
use crate::geometry::ShapeClass;
use crate::imageio::load_gray;
use crate::labels::{write_detections, ClassMap, YoloDetection};
use crate::pipeline::{process_sequence, DetectOptions, FrameInput, LatencySummary};
use crate::proposer::{ingest_external_detections, propose_shapes, ProposerParams, ShapeDetection};

/// Default output root when `--out` is omitted.
pub const OUT_DIR_ENV: &str = "SHAPEVAR_OUT_DIR";

pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const UNKNOWN_COMMAND: i32 = 2;
    pub const BAD_FLAG: i32 = 3;
    pub const UNREADABLE: i32 = 4;
}

#[derive(Debug, Parser)]
#[command(name = "shapevar", version, about = "Shape proposals, variance classification and detection metrics")]
pub struct Cli {
    /// Master seed for randomized steps.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 1 runs sequentially. Defaults to all cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic shape dataset with augmentations.
    GenShapes(GenShapesArgs),
    /// Label-placement heatmap of a label directory.
    Heatmap(HeatmapArgs),
    /// Propose circles and rectangles in one image.
    Propose(ProposeArgs),
    /// Build a variance model from labeled crops.
    BuildModel(BuildModelArgs),
    /// Search branch weights on validation crops.
    OptimizeWeights(OptimizeArgs),
    /// Classify one crop.
    Classify(ClassifyArgs),
    /// Run the two-stage detector over frames.
    Detect(DetectArgs),
    /// Score detections against ground truth.
    Evaluate(EvaluateArgs),
    /// Confusion matrix from predicted/actual pairs.
    Confusion(ConfusionArgs),
    /// Per-class detection counts of several runs.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct GenShapesArgs {
    /// Base images.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Augmented copies per base image instead of the default 30-to-53 plan.
    #[arg(long, conflicts_with = "extra")]
    pub multiplier: Option<usize>,
    /// Exact number of augmented images.
    #[arg(long)]
    pub extra: Option<usize>,
    /// Component scenes (textured, component labels, crop tree) instead.
    #[arg(long)]
    pub components: bool,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    #[arg(long)]
    pub labels: PathBuf,
    /// Grid as ROWSxCOLS.
    #[arg(long, default_value = "10x10", value_parser = parse_grid)]
    pub grid: (usize, usize),
    /// `.png` renders an image; anything else gets JSON counts.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Only this class id (PNG output).
    #[arg(long)]
    pub class: Option<usize>,
    /// Pixels per cell in PNG output.
    #[arg(long, default_value_t = 32)]
    pub cell: u32,
}

#[derive(Debug, Args)]
pub struct ProposeArgs {
    #[arg(long)]
    pub image: PathBuf,
    /// Proposer parameters as JSON.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Ingest this detection file instead of running the proposer.
    #[arg(long)]
    pub from_detections: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BuildModelArgs {
    /// Crop tree `<branch>/<class>/*.png` or a JSON crop manifest.
    #[arg(long)]
    pub crops: PathBuf,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Plain bin fractions; empty bins become errors at scoring time.
    #[arg(long)]
    pub no_smoothing: bool,
    #[arg(long, value_parser = parse_weights)]
    pub circle_weights: Option<[f64; 4]>,
    #[arg(long, value_parser = parse_weights)]
    pub rectangle_weights: Option<[f64; 4]>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Validation crops, same layouts as build-model.
    #[arg(long)]
    pub val: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    #[arg(long, value_enum, default_value_t = Objective::Accuracy)]
    pub objective: Objective,
    /// Model with the new weights.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub crop: PathBuf,
    /// Branch to score against; inferred from the crop's shape when omitted.
    #[arg(long)]
    pub branch: Option<ShapeClass>,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, conflicts_with = "image", required_unless_present = "image")]
    pub images: Option<PathBuf>,
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// External shape detections, one `<frame>.txt` per image.
    #[arg(long)]
    pub detections: Option<PathBuf>,
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Crop padding fraction; negative shrinks.
    #[arg(long, allow_hyphen_values = true)]
    pub pad: Option<f64>,
    #[arg(long)]
    pub min_objectness: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub dets: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub classes: PathBuf,
    #[arg(long)]
    pub iou: Option<f64>,
    #[arg(long, value_enum)]
    pub interp: Option<Interpolation>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Defaults to JSON for `.json` outputs, text otherwise.
    #[arg(long, value_enum)]
    pub format: Option<ReportFormat>,
}

#[derive(Debug, Args)]
pub struct ConfusionArgs {
    /// `predicted actual` per line, names or ids.
    #[arg(long)]
    pub pairs: PathBuf,
    /// Class map; the four component classes by default.
    #[arg(long)]
    pub classes: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<ReportFormat>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Detection directories, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub runs: Vec<PathBuf>,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub classes: Option<PathBuf>,
    /// Column names for the runs; directory names by default.
    #[arg(long, value_delimiter = ',')]
    pub names: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<ReportFormat>,
}

/// Contents of `--config`. Every section is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub dataset: Option<DatasetConfig>,
    pub components: Option<ComponentSceneConfig>,
    pub proposer: Option<ProposerParams>,
    pub detect: Option<DetectOptions>,
    pub build: Option<BuildConfig>,
    pub eval: Option<EvalConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub iou: f64,
    pub interpolation: Interpolation,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            iou: 0.5,
            interpolation: Interpolation::AllPoint,
        }
    }
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let (r, c) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("grid '{s}' is not ROWSxCOLS"))?;
    let r: usize = r.trim().parse().map_err(|_| format!("bad row count in '{s}'"))?;
    let c: usize = c.trim().parse().map_err(|_| format!("bad column count in '{s}'"))?;
    if r == 0 || c == 0 {
        return Err("grid dimensions must be at least 1".into());
    }
    Ok((r, c))
}

fn parse_weights(s: &str) -> std::result::Result<[f64; 4], String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad weight '{t}'")))
        .collect::<std::result::Result<_, _>>()?;
    v.try_into().map_err(|_| "expected four comma-separated weights".to_string())
}

/// A failure that maps to a specific exit code.
#[derive(Debug)]
enum CliError {
    Flag(String),
    Unreadable(String),
    Run(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_unreadable_path() {
            CliError::Unreadable(e.to_string())
        } else {
            CliError::Run(e)
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn need(path: &Path, what: &str) -> CliResult<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(CliError::Unreadable(format!("{what} {} does not exist", path.display())))
    }
}

fn need_dir(path: &Path, what: &str) -> CliResult<()> {
    need(path, what)?;
    if path.is_dir() {
        Ok(())
    } else {
        Err(CliError::Unreadable(format!("{what} {} is not a directory", path.display())))
    }
}

fn out_path(out: Option<PathBuf>, default_name: &str) -> PathBuf {
    out.unwrap_or_else(|| {
        let root = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("shapevar-out"));
        root.join(default_name)
    })
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => fs::create_dir_all(p).map_err(|e| Error::io(p, e)),
        _ => Ok(()),
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    ensure_parent(path)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    need(path, "file")?;
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Flag(format!("{}: {e}", path.display())))
}

struct Ctx {
    seed: u64,
    config: RunConfig,
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => return clap_exit(e),
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();

    let outcome = (|| {
        let config: RunConfig = match &cli.config {
            Some(p) => read_json(p)?,
            None => RunConfig::default(),
        };
        let jobs = cli.jobs.or(config.jobs);
        if jobs == Some(0) {
            return Err(CliError::Flag("--jobs must be at least 1".into()));
        }
        let ctx = Ctx {
            seed: cli.seed.or(config.seed).unwrap_or(0),
            config,
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.unwrap_or(0))
            .build()
            .map_err(|e| CliError::Run(Error::InvalidConfig(e.to_string())))?;
        pool.install(|| dispatch(&cli.command, &ctx))
    })();
    match outcome {
        Ok(()) => exit::OK,
        Err(e) => {
            let (code, msg) = match e {
                CliError::Flag(m) => (exit::BAD_FLAG, m),
                CliError::Unreadable(m) => (exit::UNREADABLE, m),
                CliError::Run(Error::InvalidConfig(m)) => (exit::BAD_FLAG, format!("invalid configuration: {m}")),
                CliError::Run(e) => (exit::FAILURE, e.to_string()),
            };
            eprintln!("error: {}", one_line(&msg));
            code
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn clap_exit(e: clap::Error) -> i32 {
    if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
        let _ = e.print();
        return exit::OK;
    }
    let code = match e.kind() {
        ErrorKind::InvalidSubcommand | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => exit::UNKNOWN_COMMAND,
        _ => exit::BAD_FLAG,
    };
    let rendered = e.render().to_string();
    let first = rendered.lines().next().unwrap_or("invalid arguments").trim();
    let first = first.strip_prefix("error: ").unwrap_or(first);
    eprintln!("error: {first} (see 'shapevar --help')");
    code
}

fn dispatch(cmd: &Command, ctx: &Ctx) -> CliResult<()> {
    match cmd {
        Command::GenShapes(a) => gen_shapes(a, ctx),
        Command::Heatmap(a) => heatmap(a),
        Command::Propose(a) => propose(a, ctx),
        Command::BuildModel(a) => build_model(a, ctx),
        Command::OptimizeWeights(a) => optimize(a),
        Command::Classify(a) => classify_crop(a),
        Command::Detect(a) => detect(a, ctx),
        Command::Evaluate(a) => evaluate_cmd(a, ctx),
        Command::Confusion(a) => confusion(a),
        Command::Compare(a) => compare(a),
    }
}

fn gen_shapes(a: &GenShapesArgs, ctx: &Ctx) -> CliResult<()> {
    let out = out_path(a.out.clone(), "dataset");
    if a.components {
        let cfg = ctx.config.components.clone().unwrap_or_default();
        let count = a.count.unwrap_or(30);
        let m = build_component_dataset(&cfg, count, ctx.seed, &out)?;
        let objects: usize = m.entries.iter().map(|e| e.objects.len()).sum();
        println!("wrote {} component images ({objects} objects) to {}", m.entries.len(), out.display());
        return Ok(());
    }
    let mut cfg = ctx.config.dataset.clone().unwrap_or_default();
    if let Some(n) = a.count {
        cfg.base_count = n;
    }
    if let Some(m) = a.multiplier {
        cfg.plan = AugPlan::PerImage { multiplier: m };
    }
    if let Some(k) = a.extra {
        cfg.plan = AugPlan::Extra { count: k };
    }
    let m = build_dataset(&cfg, ctx.seed, &out)?;
    println!("wrote {} images to {}", m.entries.len(), out.display());
    Ok(())
}

fn heatmap(a: &HeatmapArgs) -> CliResult<()> {
    need_dir(&a.labels, "label directory")?;
    let labels = crate::eval::load_label_dir(&a.labels)?;
    let hm = label_heatmap(labels.values().flatten(), a.grid.0, a.grid.1)?;
    let out = out_path(a.out.clone(), "heatmap.json");
    ensure_parent(&out)?;
    if out.extension().is_some_and(|e| e.eq_ignore_ascii_case("png")) {
        if a.cell == 0 {
            return Err(CliError::Flag("--cell must be at least 1".into()));
        }
        let img = hm.render(a.class, a.cell);
        img.save(&out).map_err(|e| Error::image(&out, e))?;
    } else {
        write_text(&out, &(serde_json::to_string_pretty(&hm).map_err(Error::from)? + "\n"))?;
    }
    println!(
        "{} labels, {:.1}% of cells covered",
        labels.values().map(Vec::len).sum::<usize>(),
        100.0 * hm.nonzero_fraction()
    );
    Ok(())
}

fn proposer_params(path: &Option<PathBuf>, ctx: &Ctx) -> CliResult<ProposerParams> {
    let p = match path {
        Some(p) => read_json(p)?,
        None => ctx.config.proposer.clone().unwrap_or_default(),
    };
    p.validate()?;
    Ok(p)
}

fn shape_lines(dets: &[ShapeDetection], w: u32, h: u32) -> Vec<YoloDetection> {
    dets.iter()
        .map(|d| {
            let (cx, cy, bw, bh) = d.bbox.to_normalized(w as f64, h as f64);
            YoloDetection {
                class_id: d.shape.id(),
                cx,
                cy,
                w: bw,
                h: bh,
                confidence: d.objectness,
            }
        })
        .collect()
}

fn propose(a: &ProposeArgs, ctx: &Ctx) -> CliResult<()> {
    need(&a.image, "image")?;
    if let Some(d) = &a.from_detections {
        need(d, "detection file")?;
    }
    let params = proposer_params(&a.params, ctx)?;
    let img = load_gray(&a.image)?;
    let (w, h) = img.dimensions();
    let dets = match &a.from_detections {
        Some(d) => ingest_external_detections(d, w, h)?,
        None => propose_shapes(&img, &params)?,
    };
    let out = out_path(a.out.clone(), "proposals.txt");
    ensure_parent(&out)?;
    write_detections(&out, &shape_lines(&dets, w, h))?;
    println!("{} proposals", dets.len());
    Ok(())
}

fn build_model(a: &BuildModelArgs, ctx: &Ctx) -> CliResult<()> {
    need(&a.crops, "crop corpus")?;
    let mut cfg = ctx.config.build.clone().unwrap_or_default();
    if let Some(b) = a.bins {
        cfg.bins = b;
    }
    if a.no_smoothing {
        cfg.smoothing = false;
    }
    if let Some(w) = a.circle_weights {
        cfg.circle_weights = w;
    }
    if let Some(w) = a.rectangle_weights {
        cfg.rectangle_weights = w;
    }
    cfg.seed = Some(ctx.seed);
    let crops = load_crops(&a.crops)?;
    let model = build_variance_model(&crops, &cfg)?;
    let out = out_path(a.out.clone(), "model.json");
    ensure_parent(&out)?;
    model.save(&out)?;
    println!("model from {} crops written to {}", crops.len(), out.display());
    Ok(())
}

fn optimize(a: &OptimizeArgs) -> CliResult<()> {
    need(&a.model, "model")?;
    need(&a.val, "validation corpus")?;
    let mut model = VarianceModel::load(&a.model)?;
    let val = load_crops(&a.val)?;
    let search = optimize_weights(&model, &val, a.step, a.objective)?;
    for b in ShapeClass::ALL {
        model.set_weights(b, search.weights(b))?;
    }
    println!(
        "circle {:?} ({:.4}), rectangle {:?} ({:.4}) over {} candidates",
        search.circle, search.circle_score, search.rectangle, search.rectangle_score, search.candidates
    );
    model.provenance.weight_search = Some(search);
    let out = out_path(a.out.clone(), "model.json");
    ensure_parent(&out)?;
    model.save(&out)?;
    Ok(())
}

fn classify_crop(a: &ClassifyArgs) -> CliResult<()> {
    need(&a.model, "model")?;
    need(&a.crop, "crop")?;
    let model = VarianceModel::load(&a.model)?;
    let img = load_gray(&a.crop)?;
    let branch = match a.branch {
        Some(b) => b,
        None => propose_shapes(&img, &ProposerParams::default())?
            .first()
            .map_or(ShapeClass::Rectangle, |d| d.shape),
    };
    let scores = classify(&model, branch, &img)?;
    println!("{}", serde_json::to_string(&scores).map_err(Error::from)?);
    Ok(())
}

fn is_image(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| ["png", "jpg", "jpeg", "bmp", "tif", "tiff"].contains(&e.to_ascii_lowercase().as_str()))
}

fn frame_inputs(a: &DetectArgs) -> CliResult<Vec<FrameInput>> {
    let images: Vec<PathBuf> = match (&a.images, &a.image) {
        (Some(dir), _) => {
            need_dir(dir, "image directory")?;
            let mut v: Vec<PathBuf> = fs::read_dir(dir)
                .map_err(|e| Error::io(dir, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| is_image(p))
                .collect();
            v.sort();
            v
        }
        (None, Some(f)) => {
            need(f, "image")?;
            vec![f.clone()]
        }
        (None, None) => return Err(CliError::Flag("one of --images or --image is required".into())),
    };
    if images.is_empty() {
        return Err(CliError::Flag("no images found".into()));
    }
    if let Some(d) = &a.detections {
        need_dir(d, "detection directory")?;
    }
    Ok(images
        .into_iter()
        .map(|p| {
            let id = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let detections = a.detections.as_ref().map(|d| d.join(format!("{id}.txt")));
            FrameInput {
                id,
                image: p,
                detections,
            }
        })
        .collect())
}

#[derive(Serialize)]
struct FrameSummary<'a> {
    id: &'a str,
    detections: usize,
    latency: crate::pipeline::StageLatency,
    error: &'a Option<String>,
}

#[derive(Serialize)]
struct DetectSummary<'a> {
    seed: u64,
    model: &'a Path,
    proposer: &'a ProposerParams,
    options: &'a DetectOptions,
    external_detections: bool,
    summary: LatencySummary,
    frames: Vec<FrameSummary<'a>>,
}

/// Latency statistics of a detect run, next to the detection files.
pub const SUMMARY_FILE: &str = "summary.json";

fn detect(a: &DetectArgs, ctx: &Ctx) -> CliResult<()> {
    need(&a.model, "model")?;
    let frames = frame_inputs(a)?;
    let params = proposer_params(&a.params, ctx)?;
    let mut opts = ctx.config.detect.unwrap_or_default();
    if let Some(p) = a.pad {
        opts.pad = p;
    }
    if let Some(m) = a.min_objectness {
        opts.min_objectness = m;
    }
    opts.validate()?;
    let model = VarianceModel::load(&a.model)?;
    let result = process_sequence(&frames, &model, &params, &opts)?;
    let out = out_path(a.out.clone(), "detections");
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    for f in &result.frames {
        if !f.failed() {
            write_detections(&out.join(format!("{}.txt", f.id)), &f.yolo_detections())?;
        }
    }
    let summary = DetectSummary {
        seed: ctx.seed,
        model: &a.model,
        proposer: &params,
        options: &opts,
        external_detections: a.detections.is_some(),
        summary: result.summary,
        frames: result
            .frames
            .iter()
            .map(|f| FrameSummary {
                id: &f.id,
                detections: f.detections.len(),
                latency: f.latency,
                error: &f.error,
            })
            .collect(),
    };
    write_text(&out.join(SUMMARY_FILE), &(serde_json::to_string_pretty(&summary).map_err(Error::from)? + "\n"))?;
    let s = result.summary;
    println!(
        "{} frames ({} failed), {} detections; mean {:.2} ms, median {:.2} ms, {:.1} FPS",
        s.frames,
        s.failed,
        result.frames.iter().map(|f| f.detections.len()).sum::<usize>(),
        s.mean_ms,
        s.median_ms,
        s.fps
    );
    Ok(())
}

fn class_names(path: &Option<PathBuf>) -> CliResult<ClassMap> {
    match path {
        Some(p) => {
            need(p, "class map")?;
            Ok(ClassMap::read(p)?)
        }
        None => Ok(ClassMap::components()),
    }
}

fn evaluate_cmd(a: &EvaluateArgs, ctx: &Ctx) -> CliResult<()> {
    need_dir(&a.dets, "detection directory")?;
    need_dir(&a.gt, "ground-truth directory")?;
    need(&a.classes, "class map")?;
    let classes = ClassMap::read(&a.classes)?;
    let cfg = ctx.config.eval.unwrap_or_default();
    let iou = a.iou.unwrap_or(cfg.iou);
    let interp = a.interp.unwrap_or(cfg.interpolation);
    let set = EvalSet::from_dirs(&a.dets, &a.gt)?;
    let report = evaluate(&set, &classes.names, iou, interp)?;
    let out = out_path(a.out.clone(), "report.json");
    let format = a.format.unwrap_or_else(|| ReportFormat::from_path(&out));
    ensure_parent(&out)?;
    report.write(&out, format)?;
    println!(
        "mAP@0.5 {}  mAP@0.5:0.95 {}  ({})",
        report.map50.map_or("N/A".into(), |v| format!("{v:.4}")),
        report.map50_95.map_or("N/A".into(), |v| format!("{v:.4}")),
        report.empty_frames_line()
    );
    Ok(())
}

fn confusion(a: &ConfusionArgs) -> CliResult<()> {
    need(&a.pairs, "pairs file")?;
    let classes = class_names(&a.classes)?;
    let text = fs::read_to_string(&a.pairs).map_err(|e| Error::io(&a.pairs, e))?;
    let pairs = parse_pairs(&text, &a.pairs.display().to_string(), &classes)?;
    let mut m = ConfusionMatrix::new(classes.names.clone());
    for (p, t) in pairs {
        m.add(p, t)?;
    }
    let out = out_path(a.out.clone(), "confusion.txt");
    let body = match a.format.unwrap_or_else(|| ReportFormat::from_path(&out)) {
        ReportFormat::Json => serde_json::to_string_pretty(&m).map_err(Error::from)? + "\n",
        ReportFormat::Text => m.to_string(),
    };
    write_text(&out, &body)?;
    let _ = std::io::stdout().write_all(m.to_string().as_bytes());
    Ok(())
}

fn compare(a: &CompareArgs) -> CliResult<()> {
    need_dir(&a.gt, "ground-truth directory")?;
    for r in &a.runs {
        need_dir(r, "run directory")?;
    }
    if !a.names.is_empty() && a.names.len() != a.runs.len() {
        return Err(CliError::Flag("--names needs one name per run".into()));
    }
    let classes = class_names(&a.classes)?;
    let labels = crate::eval::load_label_dir(&a.gt)?;
    let gt = EvalSet::new(&labels, &Default::default()).gts;
    let mut runs = Vec::new();
    for (i, dir) in a.runs.iter().enumerate() {
        let name = a.names.get(i).cloned().unwrap_or_else(|| {
            dir.file_name().map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned())
        });
        let dets = EvalSet::new(&labels, &crate::eval::load_detection_dir(dir)?).dets;
        runs.push((name, dets));
    }
    let table = detection_counts(&runs, &gt, &classes.names);
    let out = out_path(a.out.clone(), "compare.txt");
    let format = a.format.unwrap_or_else(|| ReportFormat::from_path(&out));
    write_text(&out, &table.render(format)?)?;
    print!("{}", table.to_text());
    Ok(())
}
