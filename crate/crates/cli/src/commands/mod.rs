//! Subcommand implementations.

pub mod evaluate;
pub mod explain;
pub mod ingest;
pub mod preview;
pub mod sweep;
pub mod train;

use crate::config::Resolved;
use pcos_screen_core::dataset::{self, DatasetManifest, Label, Sample, Split};
use pcos_screen_core::error::{Error, Result};
use pcos_screen_core::eval::{self, ConfusionMatrix, MetricsReport};
use std::path::Path;

/// Scan, deduplicate, and split according to the resolved configuration.
pub fn build_manifest(cfg: &Resolved, deterministic: bool) -> Result<DatasetManifest> {
    let scanned = dataset::scan_dataset_with(&cfg.data_root, !deterministic)?;
    let deduped = dataset::dedup(&scanned)?;
    dataset::split(&deduped.manifest, &cfg.split)
}

pub fn load_split(
    cfg: &Resolved,
    manifest: &DatasetManifest,
    split: Split,
) -> Result<Vec<Sample<f32>>> {
    dataset::load_split_samples::<f32>(manifest, split, &cfg.preprocess)
}

/// Write the config snapshot before any other artifact of a run.
pub fn write_snapshot(cfg: &Resolved, run_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(run_dir).map_err(|e| Error::io(run_dir, e))?;
    let path = run_dir.join("config.toml");
    std::fs::write(&path, cfg.snapshot_toml()).map_err(|e| Error::io(&path, e))
}

pub fn labels_of(samples: &[Sample<f32>]) -> Vec<Label> {
    samples
        .iter()
        .map(|s| if s.label >= 0.5 { Label::Infected } else { Label::Notinfected })
        .collect()
}

/// Write `metrics.txt`, `metrics.csv`, and `confusion.png` into `dir`.
pub fn write_metrics_outputs(
    cm: &ConfusionMatrix,
    report: &MetricsReport,
    dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let txt = dir.join("metrics.txt");
    std::fs::write(&txt, report.to_text()).map_err(|e| Error::io(&txt, e))?;
    let csv = dir.join("metrics.csv");
    std::fs::write(&csv, report.to_table()).map_err(|e| Error::io(&csv, e))?;
    eval::render_confusion_png(cm, &dir.join("confusion.png"))
}

pub fn print_metrics(report: &MetricsReport) {
    let f = eval::exact_to_f64;
    println!("accuracy: {:.6}", f(report.accuracy));
    println!(
        "infected precision/recall/f1: {:.6} {:.6} {:.6}",
        f(report.infected.precision),
        f(report.infected.recall),
        f(report.infected.f1)
    );
    println!(
        "notinfected precision/recall/f1: {:.6} {:.6} {:.6}",
        f(report.notinfected.precision),
        f(report.notinfected.recall),
        f(report.notinfected.f1)
    );
    println!("macro_f1: {:.6}", f(report.macro_f1));
    for note in &report.annotations {
        println!("note: {note}");
    }
}
