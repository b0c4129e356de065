//! `sweep`: one training run per alpha pair from a grid file.

use crate::config::RunConfig;
use pcos_screen_core::dataset::Split;
use pcos_screen_core::error::{Error, Result};
use pcos_screen_core::eval::sweep::sweep;
use std::path::Path;

/// Grid file format: one `mixup_alpha cutmix_alpha` pair per line
/// (whitespace- or comma-separated); `#` starts a comment.
pub fn parse_grid(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut grid = Vec::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .collect();
        let parse = |s: &str| -> Result<f64> {
            s.parse().map_err(|_| {
                Error::Config(format!("grid line {}: {raw_line:?} is not an alpha pair", idx + 1))
            })
        };
        match fields.as_slice() {
            [a, b] => grid.push((parse(a)?, parse(b)?)),
            _ => {
                return Err(Error::Config(format!(
                    "grid line {}: expected two values, got {raw_line:?}",
                    idx + 1
                )))
            }
        }
    }
    if grid.is_empty() {
        return Err(Error::Config("grid file contains no alpha pairs".into()));
    }
    Ok(grid)
}

/// Returns false when at least one row failed (the caller exits nonzero).
pub fn run(config_path: &Path, grid_path: &Path, deterministic: bool) -> Result<bool> {
    let cfg = RunConfig::load(config_path)?.resolve()?;
    let grid_text = std::fs::read_to_string(grid_path).map_err(|e| Error::io(grid_path, e))?;
    let grid = parse_grid(&grid_text)?;

    let out_dir = cfg.out_root.join(format!("sweep-{}", cfg.hash8()));
    super::write_snapshot(&cfg, &out_dir)?;

    let manifest = super::build_manifest(&cfg, deterministic)?;
    let train_samples = super::load_split(&cfg, &manifest, Split::Train)?;
    let val_samples = super::load_split(&cfg, &manifest, Split::Val)?;

    let outcome = sweep::<f32>(
        &grid,
        &cfg.train,
        &cfg.backbone,
        &train_samples,
        &val_samples,
        &out_dir,
    )?;

    print!("{}", outcome.report_csv());
    for (row, msg) in &outcome.failures {
        eprintln!("row {row} failed: {msg}");
    }
    println!("report: {}", out_dir.join("sweep_report.csv").display());
    Ok(outcome.all_succeeded())
}
