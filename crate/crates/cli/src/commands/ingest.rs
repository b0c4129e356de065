//! `ingest`: scan the dataset, deduplicate, and persist the manifest.

use crate::config::RunConfig;
use pcos_screen_core::dataset::{dedup, manifest_to_jsonl, scan_dataset_with};
use pcos_screen_core::error::{Error, Result};
use std::path::Path;

pub fn run(config_path: &Path, deterministic: bool) -> Result<()> {
    let cfg = RunConfig::load(config_path)?.resolve()?;
    let scanned = scan_dataset_with(&cfg.data_root, !deterministic)?;
    let outcome = dedup(&scanned)?;
    let manifest = outcome.manifest;

    let out_dir = cfg.out_root.join("ingest");
    super::write_snapshot(&cfg, &out_dir)?;

    let manifest_path = out_dir.join("manifest.jsonl");
    std::fs::write(&manifest_path, manifest_to_jsonl(&manifest))
        .map_err(|e| Error::io(&manifest_path, e))?;

    let skipped_path = out_dir.join("skipped.jsonl");
    let mut skipped_text = String::new();
    for s in &manifest.skipped {
        skipped_text.push_str(&serde_json::to_string(s).expect("skip entry serializes"));
        skipped_text.push('\n');
    }
    std::fs::write(&skipped_path, skipped_text).map_err(|e| Error::io(&skipped_path, e))?;

    for (label, count) in manifest.class_counts() {
        println!("class {label}: {count}");
    }
    println!("duplicates removed: {}", outcome.removed);
    println!("skipped: {}", manifest.skipped.len());
    for s in &manifest.skipped {
        println!("  {}: {}", s.path.display(), s.reason);
    }
    println!("manifest: {}", manifest_path.display());
    Ok(())
}
