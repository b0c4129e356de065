//! Training loop: Adam on binary cross-entropy with per-epoch validation,
//! best-checkpoint saving, and early stopping on validation loss.

use super::{bce, save_checkpoint, sigmoid, CheckpointMeta, ModelHandle};
use crate::augment;
use crate::dataset::Sample;
use crate::error::{Error, Result};
use crate::nn::{Adam, GradStore};
use crate::Scalar;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    BinaryCrossEntropy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonitorKind {
    ValLoss,
}

/// Hyperparameter contract for one training run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub loss: LossKind,
    pub max_epochs: usize,
    pub patience: usize,
    pub monitor: MonitorKind,
    pub mixup_alpha: f64,
    pub cutmix_alpha: f64,
    pub seed: u64,
    /// Keep backbone weights fixed; only the head trains.
    pub freeze_backbone: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 32,
            learning_rate: 1e-4,
            optimizer: OptimizerKind::Adam,
            loss: LossKind::BinaryCrossEntropy,
            max_epochs: 98,
            patience: 15,
            monitor: MonitorKind::ValLoss,
            mixup_alpha: 0.0,
            cutmix_alpha: 0.0,
            seed: 0,
            freeze_backbone: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if self.patience > self.max_epochs {
            return Err(Error::Config(format!(
                "patience {} exceeds max_epochs {}",
                self.patience, self.max_epochs
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be at least 1".into()));
        }
        if self.mixup_alpha < 0.0 || self.cutmix_alpha < 0.0 {
            return Err(Error::Config("mixing alphas must be >= 0".into()));
        }
        Ok(())
    }

    /// Stable hash of the resolved configuration, recorded in checkpoints.
    pub fn config_hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))[..16].to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingHistory {
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch with the minimum validation loss.
    pub best_epoch: usize,
    pub stopped_early: bool,
}

pub const HISTORY_HEADER: &str = "epoch,train_loss,train_accuracy,val_loss,val_accuracy";

impl TrainingHistory {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(HISTORY_HEADER);
        out.push('\n');
        for r in &self.epochs {
            out.push_str(&epoch_csv_line(r));
            out.push('\n');
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<TrainingHistory> {
        let mut epochs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if i == 0 {
                if line.trim() != HISTORY_HEADER {
                    return Err(Error::Input(format!("unexpected history header {line:?}")));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 5 {
                return Err(Error::Input(format!("history line {} malformed: {line:?}", i + 1)));
            }
            let parse = |s: &str| -> Result<f64> {
                s.parse()
                    .map_err(|e| Error::Input(format!("history line {}: {e}", i + 1)))
            };
            epochs.push(EpochRecord {
                epoch: fields[0]
                    .parse()
                    .map_err(|e| Error::Input(format!("history line {}: {e}", i + 1)))?,
                train_loss: parse(fields[1])?,
                train_accuracy: parse(fields[2])?,
                val_loss: parse(fields[3])?,
                val_accuracy: parse(fields[4])?,
            });
        }
        let best_epoch = epochs
            .iter()
            .min_by(|a, b| a.val_loss.partial_cmp(&b.val_loss).expect("finite"))
            .map(|r| r.epoch)
            .unwrap_or(0);
        Ok(TrainingHistory {
            epochs,
            best_epoch,
            stopped_early: false,
        })
    }
}

fn epoch_csv_line(r: &EpochRecord) -> String {
    format!(
        "{},{},{},{},{}",
        r.epoch, r.train_loss, r.train_accuracy, r.val_loss, r.val_accuracy
    )
}

/// Train in place. Writes `history.csv` (flushed per epoch) and the best
/// checkpoint under `<run_dir>/checkpoints/best.ckpt`; returns the history
/// and the checkpoint path.
///
/// A checkpoint is saved exactly when validation loss strictly improves, so
/// the sequence of saved checkpoints has strictly decreasing loss. Training
/// stops once `patience` consecutive epochs fail to improve.
pub fn train<F: Scalar>(
    model: &mut ModelHandle<F>,
    train_samples: &[Sample<F>],
    val_samples: &[Sample<F>],
    config: &TrainConfig,
    run_dir: &Path,
) -> Result<(TrainingHistory, PathBuf)> {
    config.validate()?;
    if train_samples.is_empty() || val_samples.is_empty() {
        return Err(Error::Config("train and val splits must be non-empty".into()));
    }

    std::fs::create_dir_all(run_dir.join("checkpoints"))
        .map_err(|e| Error::io(run_dir.join("checkpoints"), e))?;
    let history_path = run_dir.join("history.csv");
    let mut history_file =
        std::fs::File::create(&history_path).map_err(|e| Error::io(&history_path, e))?;
    writeln!(history_file, "{HISTORY_HEADER}").map_err(|e| Error::io(&history_path, e))?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut adam = Adam::<F>::new(config.learning_rate);
    let trainable = |name: &str| !config.freeze_backbone || name.starts_with("head.");
    let checkpoint_path = run_dir.join("checkpoints/best.ckpt");
    let config_hash = config.config_hash();

    let mut history = TrainingHistory {
        epochs: Vec::new(),
        best_epoch: 0,
        stopped_early: false,
    };
    let mut best_val_loss = f64::INFINITY;
    let mut epochs_without_improvement = 0usize;

    for epoch in 1..=config.max_epochs {
        let mut order: Vec<usize> = (0..train_samples.len()).collect();
        order.shuffle(&mut rng);

        let mut train_loss_sum = 0.0;
        let mut train_correct = 0usize;

        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<Sample<F>> = chunk.iter().map(|&i| train_samples[i].clone()).collect();
            // a trailing singleton batch cannot be mixed; it trains unaugmented
            let (mixup_alpha, cutmix_alpha) = if batch.len() < 2 {
                (0.0, 0.0)
            } else {
                (config.mixup_alpha, config.cutmix_alpha)
            };
            let mixed = augment::augment_batch(&batch, mixup_alpha, cutmix_alpha, &mut rng)?;

            let mut grads = GradStore::<F>::default();
            for m in &mixed {
                let fp = model.graph.forward(&m.image, true, Some(&mut rng))?;
                let logit = fp.logit().as_f64();
                let p = sigmoid(logit);
                let y = m.soft_label.as_f64();
                train_loss_sum += bce(p, y);
                if (p >= 0.5) == (y >= 0.5) {
                    train_correct += 1;
                }
                let bp = model.graph.backward(&fp, F::cast(p - y), true);
                grads.accumulate(&bp.grads);
            }
            grads.scale(F::cast(1.0 / mixed.len() as f64));
            adam.step(&mut model.graph, &grads, &trainable);
        }

        let train_loss = train_loss_sum / train_samples.len() as f64;
        let train_accuracy = train_correct as f64 / train_samples.len() as f64;
        let (val_loss, val_accuracy) = model.evaluate(val_samples)?;

        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(Error::TrainingDiverged {
                epoch,
                msg: format!("train_loss {train_loss}, val_loss {val_loss}"),
            });
        }

        let record = EpochRecord {
            epoch,
            train_loss,
            train_accuracy,
            val_loss,
            val_accuracy,
        };
        history.epochs.push(record);
        writeln!(history_file, "{}", epoch_csv_line(&record))
            .map_err(|e| Error::io(&history_path, e))?;
        history_file.flush().map_err(|e| Error::io(&history_path, e))?;

        if val_loss < best_val_loss {
            best_val_loss = val_loss;
            history.best_epoch = epoch;
            epochs_without_improvement = 0;
            save_checkpoint(
                model,
                &CheckpointMeta {
                    epoch,
                    val_loss,
                    val_accuracy,
                    config_hash: config_hash.clone(),
                },
                &checkpoint_path,
            )?;
        } else {
            epochs_without_improvement += 1;
            if epochs_without_improvement >= config.patience {
                history.stopped_early = true;
                break;
            }
        }
    }

    Ok((history, checkpoint_path))
}
