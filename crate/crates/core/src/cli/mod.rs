//! The `featlearn` command-line pipeline.
//!
//! ```text
//! featlearn <synth|train|classify|baseline|rank|render> --config <path> [--seed N] [--out DIR]
//! ```
//!
//! Every subcommand reads one [`PipelineConfig`]. Relative paths in the
//! config resolve against the working directory: `--out` when given,
//! otherwise the directory holding the config file. Results go to files
//! and a one-line JSON summary goes to stdout. Failures print one JSON
//! object on stderr and exit with 2 (configuration), 3 (data) or 4
//! (numeric failure).

mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use serde_json::json;

pub use config::{
    ArchitectureConfig, BaselineConfig, ClassifierConfig, Command, DatasetConfig, OutputConfig, PipelineConfig,
    RankConfig, SplitConfig,
};

use crate::baselines::{kpca_fit_subsampled, kpca_transform, omp1_encode, omp1_fit, pca_fit, pca_transform};
use crate::classify::{cv_select_c, knn1_predict, svm_predict, svm_train, LabeledFeatures};
use crate::error::ensure;
use crate::imageio::{
    encode_feature_ppm, read_labels, read_raster, render_map, synth_dataset, tile_scenes, write_labels,
    write_raster, FeatureMap, LabelMap,
};
use crate::metrics::{confusion, rank_features, EvaluationReport, FeatureScore, REPORT_VERSION};
use crate::model::{load_model, save_model, NetworkModel, SavedModel};
use crate::network::{extract_features, layer_output_dims, quadrant_sum_pool, Mode};
use crate::trainer::pretrain_network;
use crate::util::{derive_seed, rng, write_atomic};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

/// Exit status for an error: configuration problems 2, numeric failures
/// 4, everything about the data (missing or malformed files, shapes) 3.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => EXIT_CONFIG,
        Error::Numeric(_) => EXIT_NUMERIC,
        _ => EXIT_DATA,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CommandArg {
    Synth,
    Train,
    Classify,
    Baseline,
    Rank,
    Render,
}

impl From<CommandArg> for Command {
    fn from(c: CommandArg) -> Self {
        match c {
            CommandArg::Synth => Command::Synth,
            CommandArg::Train => Command::Train,
            CommandArg::Classify => Command::Classify,
            CommandArg::Baseline => Command::Baseline,
            CommandArg::Rank => Command::Rank,
            CommandArg::Render => Command::Render,
        }
    }
}

/// Unsupervised sparse feature learning for multi-band rasters.
#[derive(Debug, Parser)]
#[command(name = "featlearn", version)]
struct Args {
    #[arg(value_enum)]
    command: CommandArg,
    /// Pipeline configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the root seed of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for outputs and relative inputs.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

#[derive(Debug, Serialize)]
struct ErrorReport<'a> {
    spec_version: &'a str,
    command: Option<&'a str>,
    exit_code: i32,
    error: ErrorBody<'a>,
}

fn report_error(command: Option<Command>, kind: &str, message: String, code: i32) {
    let report = ErrorReport {
        spec_version: REPORT_VERSION,
        command: command.map(Command::name),
        exit_code: code,
        error: ErrorBody { kind, message },
    };
    eprintln!("{}", serde_json::to_string(&report).expect("plain struct"));
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return EXIT_OK;
        }
        Err(e) => {
            report_error(None, "usage", e.kind().to_string() + ": " + e.to_string().trim(), EXIT_CONFIG);
            return EXIT_CONFIG;
        }
    };
    let command = Command::from(args.command);
    let outcome = Invocation::from_args(&args.config, args.seed, args.out.as_deref())
        .and_then(|inv| inv.execute(command));
    match outcome {
        Ok(summary) => {
            println!("{}", serde_json::to_string(&summary).expect("json value"));
            EXIT_OK
        }
        Err(e) => {
            let code = exit_code(&e);
            report_error(Some(command), e.kind(), e.to_string(), code);
            code
        }
    }
}

/// A parsed configuration bound to its working directory.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub config: PipelineConfig,
    pub dir: PathBuf,
}

impl Invocation {
    pub fn new(config: PipelineConfig, dir: impl Into<PathBuf>) -> Self {
        Self { config, dir: dir.into() }
    }

    pub fn from_args(config_path: &Path, seed: Option<u64>, out: Option<&Path>) -> Result<Self> {
        let mut config = PipelineConfig::load(config_path)?;
        if let Some(s) = seed {
            config.seed = s;
        }
        let dir = match out {
            Some(d) => d.to_path_buf(),
            None => config_path
                .parent()
                .filter(|p| !p.as_os_str().is_empty())
                .map_or_else(|| PathBuf::from("."), Path::to_path_buf),
        };
        Ok(Self { config, dir })
    }

    fn path(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.dir.join(p)
        }
    }

    /// Validates the config for `command`, then runs it. Nothing is
    /// written when validation fails.
    pub fn execute(&self, command: Command) -> Result<serde_json::Value> {
        self.config.validate(command)?;
        match command {
            Command::Synth => self.cmd_synth(),
            Command::Train => self.cmd_train(),
            Command::Classify => self.cmd_classify_evaluate().map(|r| to_value(&r)),
            Command::Baseline => self.cmd_baseline().map(|r| to_value(&r)),
            Command::Rank => self.cmd_rank_features().map(|r| to_value(&r)),
            Command::Render => self.cmd_render(),
        }
    }

    fn write(&self, rel: &Path, bytes: &[u8]) -> Result<()> {
        let path = self.path(rel);
        ensure_parent(&path)?;
        write_atomic(&path, bytes)
    }

    fn write_json<T: Serialize>(&self, rel: &Path, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    /// The configured image, with labels when available.
    pub fn load_dataset(&self) -> Result<(FeatureMap, Option<LabelMap>)> {
        let d = &self.config.dataset;
        if let Some(spec) = &d.synth {
            let (img, labels) = synth_dataset(spec, self.config.synth_seed())?;
            return Ok((img, Some(labels)));
        }
        let image_path = d
            .image
            .as_ref()
            .ok_or_else(|| Error::Config("dataset needs `image` or `synth`".into()))?;
        let image = read_raster(self.path(image_path))?;
        let labels = match &d.labels {
            Some(p) => {
                let l = read_labels(self.path(p))?;
                ensure!(
                    l.rows() == image.rows() && l.cols() == image.cols(),
                    ShapeMismatch,
                    "labels are {}x{}, image is {}x{}",
                    l.rows(),
                    l.cols(),
                    image.rows(),
                    image.cols()
                );
                Some(l)
            }
            None => None,
        };
        Ok((image, labels))
    }

    fn load_labeled(&self) -> Result<(FeatureMap, LabelMap)> {
        let (image, labels) = self.load_dataset()?;
        let labels = labels.ok_or_else(|| Error::Config("dataset has no labels".into()))?;
        Ok((image, labels))
    }

    fn load_network(&self) -> Result<NetworkModel> {
        match load_model(self.path(&self.config.outputs.model))? {
            SavedModel::Epls(net) => Ok(net),
            other => Err(Error::InvalidInput(format!(
                "model file holds a {} model, expected epls",
                other.kind()
            ))),
        }
    }

    fn scene_tile(&self) -> Result<usize> {
        self.config
            .dataset
            .scene_tile
            .ok_or_else(|| Error::Config("scene mode needs `dataset.scene_tile`".into()))
    }

    /// Generates the synthetic scene and writes the image and label rasters.
    pub fn cmd_synth(&self) -> Result<serde_json::Value> {
        let spec = self
            .config
            .dataset
            .synth
            .as_ref()
            .ok_or_else(|| Error::Config("synth needs a `dataset.synth` section".into()))?;
        let (image, labels) = synth_dataset(spec, self.config.synth_seed())?;
        let out = &self.config.outputs;
        for p in [&out.image, &out.labels] {
            ensure_parent(&self.path(p))?;
        }
        write_raster(&image, self.path(&out.image))?;
        write_labels(&labels, self.path(&out.labels))?;
        Ok(json!({
            "spec_version": REPORT_VERSION,
            "command": "synth",
            "image": out.image,
            "labels": out.labels,
            "rows": image.rows(),
            "cols": image.cols(),
            "channels": image.channels(),
            "regions": spec.regions(),
        }))
    }

    /// Greedy layer-wise pre-training; writes the model and a JSONL log
    /// with one line per layer epoch.
    pub fn cmd_train(&self) -> Result<serde_json::Value> {
        let arch_cfg = self
            .config
            .architecture
            .as_ref()
            .ok_or_else(|| Error::Config("train needs an `architecture` section".into()))?;
        let schedules = self.config.layer_schedules()?;
        let (image, _) = self.load_dataset()?;
        let arch = arch_cfg.spec(image.channels());
        let (mut rows, mut cols) = (image.rows(), image.cols());
        for (l, layer) in arch.layers.iter().enumerate() {
            (rows, cols) = layer_output_dims(rows, cols, layer).ok_or_else(|| {
                Error::ShapeMismatch(format!(
                    "layer {}: receptive field {} exceeds its {rows}x{cols} input map",
                    l + 1,
                    layer.receptive_field
                ))
            })?;
        }
        let trained = pretrain_network(std::slice::from_ref(&image), &arch, &schedules)?;

        let mut log = String::new();
        let mut layers = Vec::new();
        for (l, trace) in trained.reports.iter().enumerate() {
            for epoch in trace {
                let mut line = serde_json::to_value(epoch)?;
                line["layer"] = json!(l + 1);
                log.push_str(&serde_json::to_string(&line)?);
                log.push('\n');
            }
            layers.push(json!({
                "layer": l + 1,
                "epochs": trace.len(),
                "first_error": trace.first().map(|e| e.mean_error),
                "final_error": trace.last().map(|e| e.mean_error),
            }));
        }
        let model = SavedModel::Epls(NetworkModel::new(arch, trained.filters)?);
        let out = &self.config.outputs;
        ensure_parent(&self.path(&out.model))?;
        save_model(&model, self.path(&out.model))?;
        self.write(&out.log, log.as_bytes())?;
        Ok(json!({
            "spec_version": REPORT_VERSION,
            "command": "train",
            "model": out.model,
            "log": out.log,
            "layers": layers,
        }))
    }

    /// Network features for the configured mode.
    pub fn network_features(&self, net: &NetworkModel, image: &FeatureMap, labels: &LabelMap) -> Result<FeatureSet> {
        match self.config.mode {
            Mode::Pixel => {
                let map = extract_features(image, &net.arch, &net.filters, Mode::Pixel)?
                    .into_map()
                    .expect("pixel mode yields a map");
                Ok(FeatureSet::from_pixels(map, labels))
            }
            Mode::Scene => {
                let scenes = tile_scenes(image, labels, self.scene_tile()?)?;
                let vectors = scenes
                    .iter()
                    .map(|(tile, _)| {
                        extract_features(tile, &net.arch, &net.filters, Mode::Scene)
                            .map(|f| f.into_vector().expect("scene mode yields a vector"))
                    })
                    .collect::<Result<Vec<_>>>()?;
                FeatureSet::from_scenes(vectors, scenes.iter().map(|s| s.1).collect())
            }
        }
    }

    /// Per-pixel baseline features reshaped into a map, then handled like
    /// a network's top layer.
    fn map_features(&self, map: FeatureMap, labels: &LabelMap) -> Result<FeatureSet> {
        match self.config.mode {
            Mode::Pixel => Ok(FeatureSet::from_pixels(map, labels)),
            Mode::Scene => {
                let scenes = tile_scenes(&map, labels, self.scene_tile()?)?;
                let vectors = scenes
                    .iter()
                    .map(|(tile, _)| quadrant_sum_pool(tile))
                    .collect::<Result<Vec<_>>>()?;
                FeatureSet::from_scenes(vectors, scenes.iter().map(|s| s.1).collect())
            }
        }
    }

    fn classify_set(&self, set: &FeatureSet, command: &str) -> Result<(ClassifyReport, Vec<u16>)> {
        let eval = evaluate_features(
            set.x.view(),
            &set.y,
            &self.config.classifier,
            self.config.split.labeled_fraction,
            self.config.split_seed(),
        )?;
        let report = ClassifyReport {
            evaluation: eval.evaluation,
            command: command.to_string(),
            mode: self.config.mode,
            classifier: self.config.classifier.name().to_string(),
            labeled_fraction: self.config.split.labeled_fraction,
            train_samples: eval.train.len(),
            test_samples: eval.test.len(),
            feature_dim: set.x.ncols(),
            selected_c: eval.selected_c,
            cv_scores: eval.cv_scores,
            features: None,
        };
        Ok((report, eval.predictions))
    }

    fn write_classification(&self, report: &ClassifyReport, set: &FeatureSet, predictions: Vec<u16>) -> Result<()> {
        let out = &self.config.outputs;
        if let Some((rows, cols)) = set.pixel_shape {
            let predicted = LabelMap::new(rows, cols, predictions)?;
            if let Some(p) = &out.map {
                let path = self.path(p);
                ensure_parent(&path)?;
                render_map(&predicted, path)?;
            }
            if let Some(p) = &out.prediction {
                let path = self.path(p);
                ensure_parent(&path)?;
                write_labels(&predicted, path)?;
            }
        }
        self.write_json(&out.report, report)
    }

    /// Extracts network features, trains the classifier on a stratified
    /// labeled split and evaluates on the rest.
    pub fn cmd_classify_evaluate(&self) -> Result<ClassifyReport> {
        let net = self.load_network()?;
        let (image, labels) = self.load_labeled()?;
        let set = self.network_features(&net, &image, &labels)?;
        let (report, predictions) = self.classify_set(&set, "classify")?;
        self.write_classification(&report, &set, predictions)?;
        Ok(report)
    }

    /// Fits the configured baseline on the image pixels and runs the same
    /// classification path on its features.
    pub fn cmd_baseline(&self) -> Result<ClassifyReport> {
        let (image, labels) = self.load_labeled()?;
        let pixels = image.pixel_matrix();
        let seed = self.config.baseline_seed();
        let (features, summary, model) = match &self.config.baseline {
            BaselineConfig::None => return Err(Error::Config("no baseline selected".into())),
            BaselineConfig::Pca { features } => {
                let m = pca_fit(pixels, *features)?;
                let f = pca_transform(&m, pixels)?;
                (f, BaselineSummary::new("pca", *features), SavedModel::Pca(m))
            }
            BaselineConfig::Kpca {
                features,
                lengthscale,
                samples,
            } => {
                let m = kpca_fit_subsampled(pixels, *features, *lengthscale, *samples, seed)?;
                let f = kpca_transform(&m, pixels)?;
                let mut s = BaselineSummary::new("kpca", m.n_components());
                s.lengthscale = Some(m.lengthscale);
                (f, s, SavedModel::Kpca(m))
            }
            BaselineConfig::Omp1 { atoms, epochs } => {
                let fit = omp1_fit(pixels, *atoms, *epochs, seed)?;
                let f = omp1_encode(&fit.model, pixels)?;
                let mut s = BaselineSummary::new("omp1", *atoms);
                s.dead_fraction = Some(fit.final_dead_fraction());
                s.dead_before_reseed = Some(fit.dead_before_reseed.clone());
                (f, s, SavedModel::Omp1(fit.model))
            }
        };
        let map = FeatureMap::from_vec(
            image.rows(),
            image.cols(),
            features.ncols(),
            features.as_standard_layout().iter().copied().collect(),
        )?;
        let set = self.map_features(map, &labels)?;
        let (mut report, predictions) = self.classify_set(&set, "baseline")?;
        report.features = Some(summary);
        if let Some(p) = &self.config.outputs.baseline_model {
            let path = self.path(p);
            ensure_parent(&path)?;
            save_model(&model, path)?;
        }
        self.write_classification(&report, &set, predictions)?;
        Ok(report)
    }

    /// Mutual information of every network feature with the labels.
    pub fn cmd_rank_features(&self) -> Result<RankingReport> {
        let net = self.load_network()?;
        let (image, labels) = self.load_labeled()?;
        let set = self.network_features(&net, &image, &labels)?;
        let labeled: Vec<usize> = (0..set.y.len()).filter(|&i| set.y[i] != 0).collect();
        ensure!(!labeled.is_empty(), InvalidInput, "no labeled samples to rank against");
        let x = set.x.select(Axis(0), &labeled);
        let y: Vec<u16> = labeled.iter().map(|&i| set.y[i]).collect();
        let rank = &self.config.rank;
        let scores = rank_features(x.view(), &y, rank.bins)?;
        let top: Vec<usize> = scores.iter().take(rank.top_k).map(|s| s.index).collect();
        let mut renders = Vec::new();
        if rank.render {
            if let Some((rows, cols)) = set.pixel_shape {
                let map = FeatureMap::from_vec(rows, cols, set.x.ncols(), set.x.iter().copied().collect())?;
                for &k in &top {
                    let name = PathBuf::from(format!("feature_{k}.ppm"));
                    self.write(&name, &encode_feature_ppm(&map, k)?)?;
                    renders.push(name);
                }
            }
        }
        let report = RankingReport {
            spec_version: REPORT_VERSION.to_string(),
            command: "rank".into(),
            mode: self.config.mode,
            bins: rank.bins,
            samples: y.len(),
            top,
            scores,
            renders,
        };
        self.write_json(&self.config.outputs.ranking, &report)?;
        Ok(report)
    }

    /// Renders a label raster (the dataset labels unless
    /// `outputs.render_source` is set) as a PPM map.
    pub fn cmd_render(&self) -> Result<serde_json::Value> {
        let labels = match &self.config.outputs.render_source {
            Some(p) => read_labels(self.path(p))?,
            None => self.load_labeled()?.1,
        };
        let target = self.config.outputs.map.clone().unwrap_or_else(|| "map.ppm".into());
        let path = self.path(&target);
        ensure_parent(&path)?;
        render_map(&labels, path)?;
        Ok(json!({
            "spec_version": REPORT_VERSION,
            "command": "render",
            "map": target,
            "rows": labels.rows(),
            "cols": labels.cols(),
            "classes": labels.num_classes(),
        }))
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => std::fs::create_dir_all(p).map_err(|e| Error::io(p, e)),
        _ => Ok(()),
    }
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("report serializes")
}

/// Feature rows with labels. Pixel mode keeps every pixel (label 0 for
/// unlabeled ones) so predictions can be drawn as a map.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub x: Array2<f64>,
    pub y: Vec<u16>,
    pub pixel_shape: Option<(usize, usize)>,
}

impl FeatureSet {
    pub fn from_pixels(map: FeatureMap, labels: &LabelMap) -> Self {
        let (rows, cols) = (map.rows(), map.cols());
        Self {
            x: map.pixel_matrix().to_owned(),
            y: labels.labels().to_vec(),
            pixel_shape: Some((rows, cols)),
        }
    }

    pub fn from_scenes(vectors: Vec<Vec<f64>>, labels: Vec<u16>) -> Result<Self> {
        ensure!(!vectors.is_empty(), InvalidInput, "no single-class scenes found at this tile size");
        let dim = vectors[0].len();
        let flat: Vec<f64> = vectors.into_iter().flatten().collect();
        let x = Array2::from_shape_vec((labels.len(), dim), flat)
            .map_err(|e| Error::ShapeMismatch(e.to_string()))?;
        Ok(Self {
            x,
            y: labels,
            pixel_shape: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSummary {
    pub kind: String,
    pub count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengthscale: Option<f64>,
    /// OMP-1: share of atoms left without samples in the final epoch,
    /// before re-seeding.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dead_fraction: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dead_before_reseed: Option<Vec<usize>>,
}

impl BaselineSummary {
    fn new(kind: &str, count: usize) -> Self {
        Self {
            kind: kind.into(),
            count,
            lengthscale: None,
            dead_fraction: None,
            dead_before_reseed: None,
        }
    }
}

/// Report written by `classify` and `baseline`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    #[serde(flatten)]
    pub evaluation: EvaluationReport,
    pub command: String,
    pub mode: Mode,
    pub classifier: String,
    pub labeled_fraction: f64,
    pub train_samples: usize,
    pub test_samples: usize,
    pub feature_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selected_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cv_scores: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<BaselineSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub spec_version: String,
    pub command: String,
    pub mode: Mode,
    pub bins: usize,
    pub samples: usize,
    pub top: Vec<usize>,
    pub scores: Vec<FeatureScore>,
    pub renders: Vec<PathBuf>,
}

/// Stratified split of the labeled rows (`y != 0`): in each class,
/// `round(fraction · n)` samples (at least one, at most `n − 1`) go to
/// training. Classes are drawn in ascending order from one seeded stream.
pub fn stratified_split(y: &[u16], fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    ensure!(
        fraction > 0.0 && fraction < 1.0,
        InvalidInput,
        "labeled fraction must lie in (0, 1), got {fraction}"
    );
    let mut classes: Vec<u16> = y.iter().copied().filter(|&l| l != 0).collect();
    classes.sort_unstable();
    classes.dedup();
    ensure!(classes.len() >= 2, InvalidInput, "need at least two labeled classes, found {}", classes.len());
    let mut g = rng(derive_seed(seed, 0x57a7));
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for c in classes {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
        ensure!(
            idx.len() >= 2,
            InvalidInput,
            "class {c} has {} labeled sample(s); cannot split it into train and test",
            idx.len()
        );
        idx.shuffle(&mut g);
        let k = ((idx.len() as f64 * fraction).round() as usize).clamp(1, idx.len() - 1);
        train.extend_from_slice(&idx[..k]);
        test.extend_from_slice(&idx[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Outcome of one train/evaluate round on a feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub evaluation: EvaluationReport,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// A prediction for every row, labeled or not.
    pub predictions: Vec<u16>,
    pub selected_c: Option<f64>,
    pub cv_scores: Option<Vec<(f64, f64)>>,
}

/// Splits, trains the classifier and scores the held-out rows. This is
/// the classification core of `classify` and `baseline`, usable with any
/// feature matrix.
pub fn evaluate_features(
    x: ArrayView2<'_, f64>,
    y: &[u16],
    classifier: &ClassifierConfig,
    fraction: f64,
    seed: u64,
) -> Result<Evaluation> {
    ensure!(
        x.nrows() == y.len(),
        ShapeMismatch,
        "{} feature rows vs {} labels",
        x.nrows(),
        y.len()
    );
    let (train, test) = stratified_split(y, fraction, seed)?;
    let data = LabeledFeatures::new(x.select(Axis(0), &train), train.iter().map(|&i| y[i]).collect())?;
    let (predictions, selected_c, cv_scores) = match classifier {
        ClassifierConfig::Knn1 => (knn1_predict(&data, x)?, None, None),
        ClassifierConfig::Svm { grid, folds } => {
            let cv = cv_select_c(&data, grid, *folds, seed)?;
            let model = svm_train(&data, cv.best_c, seed)?;
            (svm_predict(&model, x)?, Some(cv.best_c), Some(cv.scores))
        }
    };
    let k = y.iter().copied().max().unwrap_or(0) as usize;
    let truth: Vec<u16> = test.iter().map(|&i| y[i]).collect();
    let pred: Vec<u16> = test.iter().map(|&i| predictions[i]).collect();
    let m = confusion(&truth, &pred, k)?;
    Ok(Evaluation {
        evaluation: EvaluationReport::from_confusion(&m)?,
        train,
        test,
        predictions,
        selected_c,
        cv_scores,
    })
}
