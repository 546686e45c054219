//! Dense log-polar contour descriptors for label rasters, hybrid semantic
//! embeddings built from them, and exact reference implementations of the
//! losses and evaluation metrics used to train and score semantic image
//! synthesis models.
//!
//! The crate is organised bottom-up:
//!
//! - [`raster`] and [`container`]: label/instance rasters, tensors, and the
//!   GSDT binary container
//! - [`contour`] and [`components`]: instance pixel sets, boundary pixels,
//!   and instance synthesis from class labels
//! - [`gsd`]: per-pixel log-polar descriptors and their standardisation
//! - [`embed`]: one-hot plus descriptor concatenation and pyramids
//! - [`metrics`]: Fréchet distance, segmentation scores, diversity
//! - [`loss`]: forward values of the adversarial, matching, perceptual and
//!   refinement objectives
//! - [`cli`] and [`selftest`]: the command-line front end

pub mod cli;
pub mod components;
pub mod container;
pub mod contour;
pub mod embed;
pub mod error;
pub mod gsd;
pub mod loss;
pub mod metrics;
pub mod raster;
pub mod selftest;

pub use error::{Error, Result};
pub use gsd::{compute_batch, DescriptorTensor, GsdConfig};
pub use raster::{InstanceMap, LabelMap, Tensor};
