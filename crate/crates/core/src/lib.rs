//! Core library for `pcos-screen`: a binary ultrasound classification
//! pipeline with MixUp/CutMix regularization, transfer-learning style CNN
//! backbones, confusion-matrix evaluation, and visual attribution
//! (Grad-CAM, LIME, exact Shapley values).
//!
//! The numeric core is generic over the scalar type (see [`Scalar`]):
//! production code runs on `f32`, while high-precision checks instantiate
//! the same code with `f64`. Metric arithmetic on confusion-matrix counts
//! is exact rational arithmetic (see [`eval`]).

pub mod augment;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod explain;
pub mod model;
pub mod nn;
pub mod scalar;
pub mod util;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Preprocessed image tensor, height x width x 3 channels, values in [0, 1].
pub type Image = ndarray::Array3<f32>;

/// A labeled, preprocessed sample at the default precision.
pub type Sample = dataset::Sample<f32>;

/// Classifier model at the default precision.
pub type Model = model::ModelHandle<f32>;

/// Mixed training sample at the default precision.
pub type MixedSample = augment::MixedSample<f32>;

/// Attribution heatmap at the default precision.
pub type Heatmap = explain::Heatmap<f32>;
