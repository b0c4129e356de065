//! `augment-preview`: before/after image pairs showing the configured
//! MixUp/CutMix settings, with a sidecar recording lambda, method, and
//! partner ids.

use crate::config::RunConfig;
use pcos_screen_core::augment::augment_batch;
use pcos_screen_core::dataset::{dedup, load_split_samples, scan_dataset_with, split, Split};
use pcos_screen_core::error::{Error, Result};
use pcos_screen_core::util::{save_png, tensor_to_rgb};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub fn run(
    config_path: &Path,
    out_override: Option<&Path>,
    count: usize,
    deterministic: bool,
) -> Result<PathBuf> {
    if count < 2 {
        return Err(Error::Config("augment-preview needs a count of at least 2".into()));
    }
    let cfg = RunConfig::load(config_path)?.resolve()?;
    let out_dir = out_override
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| cfg.out_root.join("augment-preview"));
    super::write_snapshot(&cfg, &out_dir)?;

    // everything ends up in the train split here; splitting is unnecessary
    let scanned = scan_dataset_with(&cfg.data_root, !deterministic)?;
    let manifest = split(
        &dedup(&scanned)?.manifest,
        &pcos_screen_core::dataset::SplitSpec {
            train_fraction: 1.0,
            val_fraction: 0.0,
            test_fraction: 0.0,
            seed: cfg.split.seed,
            stratified: false,
        },
    )?;
    let mut samples = load_split_samples::<f32>(&manifest, Split::Train, &cfg.preprocess)?;
    samples.truncate(count);
    if samples.len() < 2 {
        return Err(Error::Config(format!(
            "need at least 2 images for a preview batch, found {}",
            samples.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.train.seed);
    let mixed = augment_batch::<f32>(
        &samples,
        cfg.train.mixup_alpha,
        cfg.train.cutmix_alpha,
        &mut rng,
    )?;

    let mut sidecar = String::from("index\tid\tmethod\tlambda\tsoft_label\tpartner\n");
    for (i, (before, after)) in samples.iter().zip(&mixed).enumerate() {
        let short = &before.id[..before.id.len().min(8)];
        save_png(
            &tensor_to_rgb(&before.image),
            &out_dir.join(format!("{i:02}_{short}.before.png")),
        )?;
        save_png(
            &tensor_to_rgb(&after.image),
            &out_dir.join(format!("{i:02}_{short}.after.png")),
        )?;
        writeln!(
            sidecar,
            "{i}\t{}\t{}\t{}\t{}\t{}",
            before.id,
            after.method.as_str(),
            after.lambda_effective,
            after.soft_label,
            after.partner_id
        )
        .unwrap();
    }
    let sidecar_path = out_dir.join("preview.txt");
    std::fs::write(&sidecar_path, sidecar).map_err(|e| Error::io(&sidecar_path, e))?;

    println!("preview: {}", out_dir.display());
    Ok(out_dir)
}
