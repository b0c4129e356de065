//! Alpha-grid sweep: one full training run per (mixup_alpha, cutmix_alpha)
//! pair with identical seed and data, so only the alphas vary between rows.

use crate::dataset::Sample;
use crate::error::{Error, Result};
use crate::model::{build_model, train, BackboneSpec, TrainConfig};
use crate::Scalar;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// The default five-point grid exercised by the sweep harness.
pub const DEFAULT_ALPHA_GRID: [(f64, f64); 5] =
    [(0.0, 0.0), (0.2, 0.3), (0.25, 0.4), (0.3, 0.5), (0.35, 0.6)];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub mixup_alpha: f64,
    pub cutmix_alpha: f64,
    /// Validation metrics at that run's best epoch; NaN when the run failed.
    pub val_accuracy: f64,
    pub val_loss: f64,
    pub run_dir: PathBuf,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    /// One row per grid point, in grid order.
    pub results: Vec<SweepResult>,
    /// (row index, error message) for rows whose run failed.
    pub failures: Vec<(usize, String)>,
}

impl SweepOutcome {
    pub fn all_succeeded(&self) -> bool {
        self.failures.is_empty()
    }

    /// Delimited report with the fixed schema
    /// `mixup_alpha,cutmix_alpha,val_accuracy,val_loss,run_dir`.
    pub fn report_csv(&self) -> String {
        let mut out = String::from("mixup_alpha,cutmix_alpha,val_accuracy,val_loss,run_dir\n");
        for r in &self.results {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.mixup_alpha,
                r.cutmix_alpha,
                r.val_accuracy,
                r.val_loss,
                r.run_dir.display()
            )
            .unwrap();
        }
        out
    }
}

/// Run the grid sequentially. Rows run even when earlier rows fail; the
/// caller decides how to surface failures (the CLI exits nonzero).
pub fn sweep<F: Scalar>(
    grid: &[(f64, f64)],
    base_config: &TrainConfig,
    spec: &BackboneSpec,
    train_samples: &[Sample<F>],
    val_samples: &[Sample<F>],
    out_root: &Path,
) -> Result<SweepOutcome> {
    if grid.is_empty() {
        return Err(Error::Config("sweep grid must be non-empty".into()));
    }
    std::fs::create_dir_all(out_root).map_err(|e| Error::io(out_root, e))?;

    let mut outcome = SweepOutcome {
        results: Vec::with_capacity(grid.len()),
        failures: Vec::new(),
    };

    for (idx, &(mixup_alpha, cutmix_alpha)) in grid.iter().enumerate() {
        let run_dir = out_root.join(format!("row{idx:02}_mu{mixup_alpha}_cm{cutmix_alpha}"));
        let config = TrainConfig {
            mixup_alpha,
            cutmix_alpha,
            ..base_config.clone()
        };

        let run = || -> Result<(f64, f64)> {
            let mut model = build_model::<F>(spec, config.seed)?;
            let (history, _ckpt) = train(&mut model, train_samples, val_samples, &config, &run_dir)?;
            let best = history
                .epochs
                .iter()
                .find(|r| r.epoch == history.best_epoch)
                .expect("best epoch recorded");
            Ok((best.val_accuracy, best.val_loss))
        };

        match run() {
            Ok((val_accuracy, val_loss)) => outcome.results.push(SweepResult {
                mixup_alpha,
                cutmix_alpha,
                val_accuracy,
                val_loss,
                run_dir,
            }),
            Err(e) => {
                outcome.failures.push((idx, e.to_string()));
                outcome.results.push(SweepResult {
                    mixup_alpha,
                    cutmix_alpha,
                    val_accuracy: f64::NAN,
                    val_loss: f64::NAN,
                    run_dir,
                });
            }
        }
    }

    let report_path = out_root.join("sweep_report.csv");
    std::fs::write(&report_path, outcome.report_csv())
        .map_err(|e| Error::io(&report_path, e))?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthetic::separable_samples;

    fn quick_config() -> TrainConfig {
        TrainConfig {
            batch_size: 8,
            learning_rate: 0.01,
            max_epochs: 2,
            patience: 2,
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn five_row_grid_reports_in_order() {
        let samples = separable_samples::<f32>(24, 8, 1);
        let (train_set, val_set) = samples.split_at(16);
        let dir = tempfile::tempdir().unwrap();
        let outcome = sweep(
            &DEFAULT_ALPHA_GRID,
            &quick_config(),
            &BackboneSpec::tiny(8),
            train_set,
            val_set,
            dir.path(),
        )
        .unwrap();
        assert!(outcome.all_succeeded());
        assert_eq!(outcome.results.len(), 5);
        for (r, &(ma, ca)) in outcome.results.iter().zip(&DEFAULT_ALPHA_GRID) {
            assert_eq!((r.mixup_alpha, r.cutmix_alpha), (ma, ca));
            assert!(r.val_accuracy.is_finite());
            assert!(r.run_dir.join("history.csv").is_file());
        }

        let report = std::fs::read_to_string(dir.path().join("sweep_report.csv")).unwrap();
        assert_eq!(
            report.lines().next().unwrap(),
            "mixup_alpha,cutmix_alpha,val_accuracy,val_loss,run_dir"
        );
        assert_eq!(report.lines().count(), 6);
    }

    #[test]
    fn single_zero_point_matches_plain_training() {
        let samples = separable_samples::<f32>(20, 8, 2);
        let (train_set, val_set) = samples.split_at(14);
        let config = quick_config();

        let dir = tempfile::tempdir().unwrap();
        let outcome = sweep(
            &[(0.0, 0.0)],
            &config,
            &BackboneSpec::tiny(8),
            train_set,
            val_set,
            dir.path(),
        )
        .unwrap();

        let mut model = build_model::<f32>(&BackboneSpec::tiny(8), config.seed).unwrap();
        let dir2 = tempfile::tempdir().unwrap();
        let (history, _) =
            train(&mut model, train_set, val_set, &config, dir2.path()).unwrap();
        let best = history
            .epochs
            .iter()
            .find(|r| r.epoch == history.best_epoch)
            .unwrap();
        assert_eq!(outcome.results[0].val_accuracy, best.val_accuracy);
        assert_eq!(outcome.results[0].val_loss, best.val_loss);
    }

    #[test]
    fn repeated_sweeps_are_identical() {
        let samples = separable_samples::<f32>(16, 8, 5);
        let (train_set, val_set) = samples.split_at(12);
        let grid = [(0.0, 0.0), (0.25, 0.4)];
        let run = || {
            let dir = tempfile::tempdir().unwrap();
            sweep(
                &grid,
                &quick_config(),
                &BackboneSpec::tiny(8),
                train_set,
                val_set,
                dir.path(),
            )
            .unwrap()
            .results
            .iter()
            .map(|r| (r.val_accuracy, r.val_loss))
            .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn empty_grid_is_rejected() {
        let samples = separable_samples::<f32>(8, 8, 0);
        let dir = tempfile::tempdir().unwrap();
        assert!(sweep(
            &[],
            &quick_config(),
            &BackboneSpec::tiny(8),
            &samples,
            &samples,
            dir.path()
        )
        .is_err());
    }

    #[test]
    fn failed_rows_are_marked_and_the_sweep_continues() {
        let samples = separable_samples::<f32>(12, 8, 4);
        let (train_set, val_set) = samples.split_at(8);
        // negative alpha rejected inside training -> row fails
        let grid = [(-1.0, 0.0), (0.0, 0.0)];
        let dir = tempfile::tempdir().unwrap();
        let outcome = sweep(
            &grid,
            &quick_config(),
            &BackboneSpec::tiny(8),
            train_set,
            val_set,
            dir.path(),
        )
        .unwrap();
        assert!(!outcome.all_succeeded());
        assert_eq!(outcome.failures.len(), 1);
        assert_eq!(outcome.failures[0].0, 0);
        assert!(outcome.results[0].val_loss.is_nan());
        assert!(outcome.results[1].val_loss.is_finite());
    }
}
