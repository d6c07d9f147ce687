//! Pipeline configuration.
//!
//! One JSON document drives every subcommand. Unknown keys are rejected at
//! every level, and [`PipelineConfig::validate`] checks everything a
//! command needs before any file is read or written.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classify::DEFAULT_C_GRID;
use crate::error::ensure;
use crate::imageio::{SynthSpec, DEFAULT_NORMALIZATION_EPS};
use crate::metrics::DEFAULT_MI_BINS;
use crate::network::{ArchitectureSpec, LayerSpec, Mode};
use crate::trainer::TrainSchedule;
use crate::util::derive_seed;
use crate::{Error, Result};

const SEED_SPLIT: u64 = 0x5171;
const SEED_LAYER: u64 = 0x1a7e;
const SEED_BASELINE: u64 = 0xba5e;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Root seed. Every random draw in the pipeline derives from it unless a
    /// section pins its own seed.
    #[serde(default)]
    pub seed: u64,
    pub dataset: DatasetConfig,
    #[serde(default)]
    pub architecture: Option<ArchitectureConfig>,
    /// One schedule per layer, or a single schedule shared by all layers.
    #[serde(default)]
    pub schedule: Vec<TrainSchedule>,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    #[serde(default)]
    pub classifier: ClassifierConfig,
    #[serde(default)]
    pub baseline: BaselineConfig,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub rank: RankConfig,
    #[serde(default)]
    pub outputs: OutputConfig,
}

fn default_mode() -> Mode {
    Mode::Pixel
}

/// Either a raster on disk or a synthetic scene generated in memory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    #[serde(default)]
    pub image: Option<PathBuf>,
    #[serde(default)]
    pub labels: Option<PathBuf>,
    #[serde(default)]
    pub synth: Option<SynthSpec>,
    /// Generator seed; defaults to the root seed.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Scene mode cuts the labeled image into `scene_tile × scene_tile`
    /// single-class scenes.
    #[serde(default)]
    pub scene_tile: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArchitectureConfig {
    pub layers: Vec<LayerSpec>,
    #[serde(default = "default_normalization")]
    pub input_normalization: Option<f64>,
}

fn default_normalization() -> Option<f64> {
    Some(DEFAULT_NORMALIZATION_EPS)
}

impl ArchitectureConfig {
    pub fn spec(&self, input_channels: usize) -> ArchitectureSpec {
        ArchitectureSpec {
            input_channels,
            layers: self.layers.clone(),
            input_normalization: self.input_normalization,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClassifierConfig {
    #[default]
    Knn1,
    Svm {
        #[serde(default = "default_grid")]
        grid: Vec<f64>,
        #[serde(default = "default_folds")]
        folds: usize,
    },
}

fn default_grid() -> Vec<f64> {
    DEFAULT_C_GRID.to_vec()
}

fn default_folds() -> usize {
    5
}

impl ClassifierConfig {
    pub fn name(&self) -> &'static str {
        match self {
            ClassifierConfig::Knn1 => "knn1",
            ClassifierConfig::Svm { .. } => "svm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BaselineConfig {
    #[default]
    None,
    Pca {
        features: usize,
    },
    Kpca {
        features: usize,
        /// RBF lengthscale; defaults to the mean pairwise distance of the
        /// fitting sample.
        #[serde(default)]
        lengthscale: Option<f64>,
        #[serde(default = "default_kpca_samples")]
        samples: usize,
    },
    Omp1 {
        atoms: usize,
        #[serde(default = "default_omp_epochs")]
        epochs: usize,
    },
}

fn default_kpca_samples() -> usize {
    crate::baselines::DEFAULT_KPCA_SAMPLES
}

fn default_omp_epochs() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    /// Share of each class's labeled samples used for training.
    #[serde(default = "default_fraction")]
    pub labeled_fraction: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_fraction() -> f64 {
    0.05
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self {
            labeled_fraction: default_fraction(),
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankConfig {
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    /// Also write a grayscale PPM of each top-ranked feature (pixel mode).
    #[serde(default)]
    pub render: bool,
}

fn default_bins() -> usize {
    DEFAULT_MI_BINS
}

fn default_top_k() -> usize {
    3
}

impl Default for RankConfig {
    fn default() -> Self {
        Self {
            bins: default_bins(),
            top_k: default_top_k(),
            render: false,
        }
    }
}

/// Output file names. Relative paths resolve against the output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_image")]
    pub image: PathBuf,
    #[serde(default = "default_labels")]
    pub labels: PathBuf,
    #[serde(default = "default_model")]
    pub model: PathBuf,
    #[serde(default = "default_log")]
    pub log: PathBuf,
    #[serde(default = "default_report")]
    pub report: PathBuf,
    #[serde(default = "default_ranking")]
    pub ranking: PathBuf,
    /// Classification map (PPM). `classify` writes it only when set;
    /// `render` falls back to `map.ppm`.
    #[serde(default)]
    pub map: Option<PathBuf>,
    /// Predicted label raster written by `classify` in pixel mode.
    #[serde(default)]
    pub prediction: Option<PathBuf>,
    /// Fitted baseline model written by `baseline`.
    #[serde(default)]
    pub baseline_model: Option<PathBuf>,
    /// Label raster rendered by `render`; defaults to the dataset labels.
    #[serde(default)]
    pub render_source: Option<PathBuf>,
}

fn default_image() -> PathBuf {
    "image.ersf".into()
}
fn default_labels() -> PathBuf {
    "labels.ersl".into()
}
fn default_model() -> PathBuf {
    "model.json".into()
}
fn default_log() -> PathBuf {
    "train_log.jsonl".into()
}
fn default_report() -> PathBuf {
    "report.json".into()
}
fn default_ranking() -> PathBuf {
    "ranking.json".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            image: default_image(),
            labels: default_labels(),
            model: default_model(),
            log: default_log(),
            report: default_report(),
            ranking: default_ranking(),
            map: None,
            prediction: None,
            baseline_model: None,
            render_source: None,
        }
    }
}

/// The six subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Synth,
    Train,
    Classify,
    Baseline,
    Rank,
    Render,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Synth => "synth",
            Command::Train => "train",
            Command::Classify => "classify",
            Command::Baseline => "baseline",
            Command::Rank => "rank",
            Command::Render => "render",
        }
    }
}

fn config_err(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = crate::util::read_file(path).map_err(|e| match e {
            Error::MissingFile(p) => Error::Config(format!("config file not found: {}", p.display())),
            other => other,
        })?;
        let text = std::str::from_utf8(&bytes).map_err(|_| Error::Config("config is not UTF-8".into()))?;
        Self::from_json(text)
    }

    pub fn synth_seed(&self) -> u64 {
        self.dataset.seed.unwrap_or(self.seed)
    }

    pub fn split_seed(&self) -> u64 {
        self.split.seed.unwrap_or_else(|| derive_seed(self.seed, SEED_SPLIT))
    }

    pub fn baseline_seed(&self) -> u64 {
        derive_seed(self.seed, SEED_BASELINE)
    }

    /// Schedules expanded to one per layer, each seeded from the root seed
    /// mixed with its own `seed` field.
    pub fn layer_schedules(&self) -> Result<Vec<TrainSchedule>> {
        let layers = self.architecture.as_ref().map_or(0, |a| a.layers.len());
        let base: Vec<TrainSchedule> = match self.schedule.len() {
            1 => vec![self.schedule[0].clone(); layers],
            n if n == layers => self.schedule.clone(),
            n => {
                return Err(Error::Config(format!(
                    "{n} schedules for {layers} layers; give one per layer or a single shared one"
                )))
            }
        };
        Ok(base
            .into_iter()
            .enumerate()
            .map(|(l, mut s)| {
                s.seed ^= derive_seed(self.seed, SEED_LAYER + l as u64);
                s
            })
            .collect())
    }

    /// Checks everything `command` relies on, reporting failures as
    /// configuration errors.
    pub fn validate(&self, command: Command) -> Result<()> {
        self.validate_inner(command).map_err(config_err)
    }

    fn validate_inner(&self, command: Command) -> Result<()> {
        let d = &self.dataset;
        if let Some(spec) = &d.synth {
            spec.validate()?;
        }
        ensure!(
            !(d.synth.is_some() && d.image.is_some()),
            Config,
            "dataset: give either `image` or `synth`, not both"
        );
        if d.image.is_none() {
            ensure!(d.labels.is_none(), Config, "dataset: `labels` without `image`");
        }
        if let Some(t) = d.scene_tile {
            ensure!(t >= 1, Config, "dataset: scene_tile must be positive");
        }
        match command {
            Command::Synth => {
                ensure!(d.synth.is_some(), Config, "synth needs a `dataset.synth` section");
            }
            Command::Render => {
                if self.outputs.render_source.is_none() {
                    self.require_labels()?;
                }
            }
            Command::Train => {
                self.require_image()?;
                self.validate_architecture()?;
            }
            Command::Classify | Command::Rank | Command::Baseline => {
                self.require_labels()?;
                if self.mode == Mode::Scene {
                    ensure!(d.scene_tile.is_some(), Config, "scene mode needs `dataset.scene_tile`");
                }
            }
        }
        if matches!(command, Command::Classify | Command::Baseline) {
            let f = self.split.labeled_fraction;
            ensure!(
                f > 0.0 && f < 1.0,
                Config,
                "split.labeled_fraction must lie in (0, 1), got {f}"
            );
            if let ClassifierConfig::Svm { grid, folds } = &self.classifier {
                ensure!(!grid.is_empty(), Config, "classifier.grid is empty");
                ensure!(
                    grid.iter().all(|c| c.is_finite() && *c > 0.0),
                    Config,
                    "classifier.grid values must be positive"
                );
                ensure!(*folds >= 2, Config, "classifier.folds must be at least 2");
            }
        }
        if command == Command::Baseline {
            match &self.baseline {
                BaselineConfig::None => {
                    return Err(Error::Config("baseline needs `baseline.kind` other than none".into()))
                }
                BaselineConfig::Pca { features } => ensure!(*features >= 1, Config, "baseline.features must be positive"),
                BaselineConfig::Kpca {
                    features,
                    lengthscale,
                    samples,
                } => {
                    ensure!(*features >= 1, Config, "baseline.features must be positive");
                    ensure!(*samples >= 2, Config, "baseline.samples must be at least 2");
                    if let Some(l) = lengthscale {
                        ensure!(l.is_finite() && *l > 0.0, Config, "baseline.lengthscale must be positive");
                    }
                }
                BaselineConfig::Omp1 { atoms, epochs } => {
                    ensure!(*atoms >= 1, Config, "baseline.atoms must be positive");
                    ensure!(*epochs >= 1, Config, "baseline.epochs must be positive");
                }
            }
        }
        if command == Command::Rank {
            ensure!(self.rank.bins >= 2, Config, "rank.bins must be at least 2");
        }
        Ok(())
    }

    fn require_image(&self) -> Result<()> {
        ensure!(
            self.dataset.image.is_some() || self.dataset.synth.is_some(),
            Config,
            "dataset needs `image` or `synth`"
        );
        Ok(())
    }

    fn require_labels(&self) -> Result<()> {
        self.require_image()?;
        ensure!(
            self.dataset.synth.is_some() || self.dataset.labels.is_some(),
            Config,
            "dataset needs `labels` (or `synth`)"
        );
        Ok(())
    }

    fn validate_architecture(&self) -> Result<()> {
        let arch = self
            .architecture
            .as_ref()
            .ok_or_else(|| Error::Config("train needs an `architecture` section".into()))?;
        let channels = self.dataset.synth.as_ref().map_or(1, |s| s.channels);
        let spec = arch.spec(channels);
        spec.validate()?;
        if let Some(eps) = arch.input_normalization {
            ensure!(eps.is_finite() && eps >= 0.0, Config, "input_normalization must be non-negative");
        }
        ensure!(!self.schedule.is_empty(), Config, "train needs a `schedule`");
        for (layer, s) in arch.layers.iter().zip(self.layer_schedules()?) {
            s.validate(layer.outputs)?;
        }
        Ok(())
    }
}
