//! `train`: the full split / augment / train / evaluate pass.

use crate::config::RunConfig;
use pcos_screen_core::dataset::{write_manifest, Split};
use pcos_screen_core::error::Result;
use pcos_screen_core::eval::curves::export_curves;
use pcos_screen_core::eval::{confusion, metrics};
use pcos_screen_core::model::{build_model, predict, train};
use std::path::{Path, PathBuf};

pub fn run(config_path: &Path, deterministic: bool) -> Result<PathBuf> {
    let cfg = RunConfig::load(config_path)?.resolve()?;
    let run_dir = cfg.out_root.join(format!("train-{}", cfg.hash8()));
    super::write_snapshot(&cfg, &run_dir)?;

    let manifest = super::build_manifest(&cfg, deterministic)?;
    write_manifest(&manifest, &run_dir.join("manifest.jsonl"))?;

    let train_samples = super::load_split(&cfg, &manifest, Split::Train)?;
    let val_samples = super::load_split(&cfg, &manifest, Split::Val)?;
    let test_samples = super::load_split(&cfg, &manifest, Split::Test)?;

    let mut model = build_model::<f32>(&cfg.backbone, cfg.train.seed)?;
    let (history, checkpoint) =
        train(&mut model, &train_samples, &val_samples, &cfg.train, &run_dir)?;
    export_curves(&history, &run_dir.join("plots"))?;

    // evaluate the best checkpoint on the held-out test split
    let (best_model, meta) = pcos_screen_core::model::load_checkpoint::<f32>(&checkpoint)?;
    let probs = predict(&best_model, &test_samples.iter().map(|s| s.image.clone()).collect::<Vec<_>>())?;
    let y_true = super::labels_of(&test_samples);
    let cm = confusion(&y_true, &probs, 0.5)?;
    let report = metrics(&cm)?;
    super::write_metrics_outputs(&cm, &report, &run_dir)?;

    println!("run_dir: {}", run_dir.display());
    println!(
        "epochs: {} (best {} at val_loss {:.6}{})",
        history.epochs.len(),
        history.best_epoch,
        meta.val_loss,
        if history.stopped_early { ", stopped early" } else { "" }
    );
    super::print_metrics(&report);
    Ok(run_dir)
}
