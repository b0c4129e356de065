//! `evaluate`: score a checkpoint on one split of a manifest.

use pcos_screen_core::dataset::{load_split_samples, read_manifest, PreprocessConfig, Split};
use pcos_screen_core::error::{Error, Result};
use pcos_screen_core::eval::{confusion, metrics};
use pcos_screen_core::model::{load_checkpoint, predict};
use std::path::Path;

pub fn run(checkpoint: &Path, manifest_path: &Path, split: Split, out: &Path) -> Result<()> {
    let (model, _meta) = load_checkpoint::<f32>(checkpoint)?;
    let manifest = read_manifest(manifest_path)?;
    let preprocess = PreprocessConfig {
        target_size: model.spec.input_size,
        ..Default::default()
    };
    let samples = load_split_samples::<f32>(&manifest, split, &preprocess)?;
    if samples.is_empty() {
        return Err(Error::Config(format!(
            "split {} of {} is empty",
            split.as_str(),
            manifest_path.display()
        )));
    }

    let images: Vec<_> = samples.iter().map(|s| s.image.clone()).collect();
    let probs = predict(&model, &images)?;
    let y_true = super::labels_of(&samples);
    let cm = confusion(&y_true, &probs, 0.5)?;
    let report = metrics(&cm)?;
    super::write_metrics_outputs(&cm, &report, out)?;
    super::print_metrics(&report);
    Ok(())
}
