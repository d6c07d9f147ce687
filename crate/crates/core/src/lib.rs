//! Unsupervised sparse feature learning for multi-band raster images.
//!
//! Convolutional layers are trained one at a time on random patches with
//! EPLS (enforcing lifetime and population sparsity), then stacked into a
//! feature extractor. The crate also ships the usual comparison points
//! (PCA, RBF kernel PCA, OMP-1), two simple classifiers (1-NN and a
//! one-vs-rest linear SVM) and the remote-sensing accuracy metrics used to
//! score classification maps.
//!
//! The module layout follows the processing chain:
//!
//! - [`imageio`]: raster/label files, map rendering, patch sampling and a
//!   synthetic scene generator.
//! - [`network`]: forward computation of convolutional layers.
//! - [`epls`]: sparse target construction and its loss/gradient.
//! - [`trainer`]: greedy layer-wise pre-training with adaptive SGD.
//! - [`baselines`]: PCA, kernel PCA and OMP-1.
//! - [`classify`]: 1-NN and linear SVM with cross-validated `C`.
//! - [`metrics`]: confusion matrices, kappa, per-class accuracies and
//!   mutual-information feature ranking.
//! - [`cli`]: config-driven pipeline commands used by the `featlearn` binary.
//!
//! Runnable walkthroughs of every capability live in `examples/`.

pub mod baselines;
pub mod classify;
pub mod cli;
pub mod epls;
mod error;
pub mod imageio;
pub mod metrics;
pub mod model;
pub mod network;
pub mod trainer;
pub(crate) mod util;

pub use error::{Error, Result};
pub use imageio::{FeatureMap, LabelMap, PatchMatrix};
pub use network::{ArchitectureSpec, FilterBank, LayerSpec, Nonlinearity, Pooling};
