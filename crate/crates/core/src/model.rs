//! JSON model files.
//!
//! Every model shares one envelope, `{"version": 1, "kind": ..., ...}`.
//! Network models (`kind: "epls"`) store the architecture as a list of
//! layer specs and each filter bank as `{"W": [...], "b": [...]}` with `W`
//! flattened row-major (one filter per row, patch vectorization order).
//! Floats are written in shortest round-trip form, so a reload is lossless.

use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::baselines::{KpcaModel, Omp1Model, PcaModel};
use crate::classify::SvmModel;
use crate::error::ensure;
use crate::network::{ArchitectureSpec, FilterBank, LayerSpec};
use crate::util::{read_file, write_atomic};
use crate::{Error, Result};

pub const MODEL_VERSION: u32 = 1;

/// A trained feature-extraction network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkRecord", into = "NetworkRecord")]
pub struct NetworkModel {
    pub arch: ArchitectureSpec,
    pub filters: Vec<FilterBank>,
}

impl NetworkModel {
    pub fn new(arch: ArchitectureSpec, filters: Vec<FilterBank>) -> Result<Self> {
        arch.validate()?;
        ensure!(
            filters.len() == arch.len(),
            ShapeMismatch,
            "{} filter banks for {} layers",
            filters.len(),
            arch.len()
        );
        for (i, (bank, layer)) in filters.iter().zip(&arch.layers).enumerate() {
            ensure!(
                bank.outputs() == layer.outputs
                    && bank.receptive_field() == layer.receptive_field
                    && bank.input_channels() == arch.input_channels_of(i),
                ShapeMismatch,
                "layer {}: filter bank does not match the layer spec",
                i + 1
            );
        }
        Ok(Self { arch, filters })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FilterRecord {
    #[serde(rename = "W")]
    w: Vec<f64>,
    b: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkRecord {
    input_channels: usize,
    #[serde(default)]
    input_normalization: Option<f64>,
    arch: Vec<LayerSpec>,
    filters: Vec<FilterRecord>,
}

impl From<NetworkModel> for NetworkRecord {
    fn from(m: NetworkModel) -> Self {
        Self {
            input_channels: m.arch.input_channels,
            input_normalization: m.arch.input_normalization,
            arch: m.arch.layers,
            filters: m
                .filters
                .into_iter()
                .map(|f| FilterRecord {
                    w: f.weights().iter().copied().collect(),
                    b: f.biases().to_vec(),
                })
                .collect(),
        }
    }
}

impl TryFrom<NetworkRecord> for NetworkModel {
    type Error = Error;

    fn try_from(rec: NetworkRecord) -> Result<Self> {
        let arch = ArchitectureSpec {
            input_channels: rec.input_channels,
            layers: rec.arch,
            input_normalization: rec.input_normalization,
        };
        arch.validate()?;
        ensure!(
            rec.filters.len() == arch.len(),
            ShapeMismatch,
            "{} filter records for {} layers",
            rec.filters.len(),
            arch.len()
        );
        let filters = rec
            .filters
            .into_iter()
            .enumerate()
            .map(|(i, f)| {
                let layer = &arch.layers[i];
                let d = arch.input_dim_of(i);
                let w = Array2::from_shape_vec((layer.outputs, d), f.w).map_err(|_| {
                    Error::ShapeMismatch(format!("layer {}: W must hold {}x{d} values", i + 1, layer.outputs))
                })?;
                FilterBank::new(w, Array1::from(f.b), layer.receptive_field, arch.input_channels_of(i))
            })
            .collect::<Result<Vec<_>>>()?;
        NetworkModel::new(arch, filters)
    }
}

impl std::fmt::Display for NetworkModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-layer network over {} bands", self.arch.len(), self.arch.input_channels)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SavedModel {
    Epls(NetworkModel),
    Pca(PcaModel),
    Kpca(KpcaModel),
    Omp1(Omp1Model),
    Svm(SvmModel),
}

impl SavedModel {
    pub fn kind(&self) -> &'static str {
        match self {
            SavedModel::Epls(_) => "epls",
            SavedModel::Pca(_) => "pca",
            SavedModel::Kpca(_) => "kpca",
            SavedModel::Omp1(_) => "omp1",
            SavedModel::Svm(_) => "svm",
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    version: u32,
    #[serde(flatten)]
    model: SavedModel,
}

pub fn to_json(model: &SavedModel) -> Result<String> {
    #[derive(Serialize)]
    struct EnvelopeRef<'a> {
        version: u32,
        #[serde(flatten)]
        model: &'a SavedModel,
    }
    Ok(serde_json::to_string_pretty(&EnvelopeRef {
        version: MODEL_VERSION,
        model,
    })?)
}

pub fn from_json(text: &str) -> Result<SavedModel> {
    let env: Envelope = serde_json::from_str(text)?;
    ensure!(
        env.version == MODEL_VERSION,
        InvalidInput,
        "unsupported model version {}",
        env.version
    );
    Ok(env.model)
}

pub fn save_model(model: &SavedModel, path: impl AsRef<Path>) -> Result<()> {
    let mut text = to_json(model)?;
    text.push('\n');
    write_atomic(path.as_ref(), text.as_bytes())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<SavedModel> {
    let path = path.as_ref();
    let bytes = read_file(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|_| Error::InvalidInput(format!("{} is not UTF-8", path.display())))?;
    from_json(text)
}
