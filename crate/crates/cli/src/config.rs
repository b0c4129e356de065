//! Run configuration: a TOML file resolved to a fully explicit snapshot
//! before any work starts. Unknown keys are rejected, per-backbone defaults
//! are filled in during resolution, and every run directory stores the
//! resolved snapshot it can be reproduced from.

use pcos_screen_core::dataset::SplitSpec;
use pcos_screen_core::error::{Error, Result};
use pcos_screen_core::model::train::{LossKind, MonitorKind, OptimizerKind};
use pcos_screen_core::model::{BackboneKind, BackboneSpec, TrainConfig};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data_root: PathBuf,
    pub out_root: PathBuf,
    pub backbone: BackboneSpec,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub split: SplitSpec,
    #[serde(default)]
    pub preprocess: PreprocessSection,
    #[serde(default)]
    pub explain: ExplainSection,
    /// Mirrored from the environment at resolution time, for the record.
    #[serde(default)]
    pub weights_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub optimizer: Option<OptimizerKind>,
    pub loss: Option<LossKind>,
    pub max_epochs: Option<usize>,
    pub patience: Option<usize>,
    pub monitor: Option<MonitorKind>,
    pub mixup_alpha: Option<f64>,
    pub cutmix_alpha: Option<f64>,
    pub seed: Option<u64>,
    pub freeze_backbone: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PreprocessSection {
    /// Defaults to the backbone input size.
    pub target_size: Option<usize>,
    pub rescale: f64,
    pub standardize: bool,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        PreprocessSection {
            target_size: None,
            rescale: 255.0,
            standardize: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExplainSection {
    pub method: String,
    pub n_segments: usize,
    pub lime_samples: usize,
    pub seed: u64,
}

impl Default for ExplainSection {
    fn default() -> Self {
        ExplainSection {
            method: "gradcam".into(),
            n_segments: 9,
            lime_samples: 1000,
            seed: 0,
        }
    }
}

/// Fully explicit configuration: serializing this and loading it back
/// resolves to itself.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub data_root: PathBuf,
    pub out_root: PathBuf,
    pub backbone: BackboneSpec,
    pub train: TrainConfig,
    pub split: SplitSpec,
    pub preprocess: pcos_screen_core::dataset::PreprocessConfig,
    pub explain: ExplainSection,
    pub weights_dir: PathBuf,
}

/// Table-derived per-backbone epoch budgets and patience.
fn backbone_defaults(kind: BackboneKind) -> (usize, usize) {
    match kind {
        BackboneKind::Densenet201 => (98, 15),
        BackboneKind::Resnet50 => (67, 10),
        BackboneKind::TinyTest => (30, 10),
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn resolve(&self) -> Result<Resolved> {
        self.backbone.validate()?;
        let (default_epochs, default_patience) = backbone_defaults(self.backbone.kind);
        let defaults = TrainConfig::default();
        let train = TrainConfig {
            batch_size: self.train.batch_size.unwrap_or(defaults.batch_size),
            learning_rate: self.train.learning_rate.unwrap_or(defaults.learning_rate),
            optimizer: self.train.optimizer.unwrap_or(OptimizerKind::Adam),
            loss: self.train.loss.unwrap_or(LossKind::BinaryCrossEntropy),
            max_epochs: self.train.max_epochs.unwrap_or(default_epochs),
            patience: self.train.patience.unwrap_or(default_patience),
            monitor: self.train.monitor.unwrap_or(MonitorKind::ValLoss),
            mixup_alpha: self.train.mixup_alpha.unwrap_or(0.0),
            cutmix_alpha: self.train.cutmix_alpha.unwrap_or(0.0),
            seed: self.train.seed.unwrap_or(0),
            freeze_backbone: self.train.freeze_backbone.unwrap_or(false),
        };
        train.validate()?;
        self.split.validate()?;

        let target_size = self.preprocess.target_size.unwrap_or(self.backbone.input_size);
        if target_size != self.backbone.input_size {
            return Err(Error::Config(format!(
                "preprocess.target_size {} must match backbone.input_size {}",
                target_size, self.backbone.input_size
            )));
        }
        let preprocess = pcos_screen_core::dataset::PreprocessConfig {
            target_size,
            rescale: self.preprocess.rescale,
            standardize: self.preprocess.standardize,
            ..Default::default()
        };
        preprocess.validate()?;

        if !["gradcam", "lime", "shapley"].contains(&self.explain.method.as_str()) {
            return Err(Error::Config(format!(
                "explain.method {:?} must be one of gradcam, lime, shapley",
                self.explain.method
            )));
        }

        Ok(Resolved {
            data_root: self.data_root.clone(),
            out_root: self.out_root.clone(),
            backbone: self.backbone,
            train,
            split: self.split,
            preprocess,
            explain: self.explain.clone(),
            weights_dir: self
                .weights_dir
                .clone()
                .unwrap_or_else(pcos_screen_core::model::weights_dir),
        })
    }
}

impl Resolved {
    /// The exact snapshot written into every run directory; loading and
    /// resolving it reproduces this configuration.
    pub fn snapshot_toml(&self) -> String {
        let full = RunConfig {
            data_root: self.data_root.clone(),
            out_root: self.out_root.clone(),
            backbone: self.backbone,
            train: TrainSection {
                batch_size: Some(self.train.batch_size),
                learning_rate: Some(self.train.learning_rate),
                optimizer: Some(self.train.optimizer),
                loss: Some(self.train.loss),
                max_epochs: Some(self.train.max_epochs),
                patience: Some(self.train.patience),
                monitor: Some(self.train.monitor),
                mixup_alpha: Some(self.train.mixup_alpha),
                cutmix_alpha: Some(self.train.cutmix_alpha),
                seed: Some(self.train.seed),
                freeze_backbone: Some(self.train.freeze_backbone),
            },
            split: self.split,
            preprocess: PreprocessSection {
                target_size: Some(self.preprocess.target_size),
                rescale: self.preprocess.rescale,
                standardize: self.preprocess.standardize,
            },
            explain: self.explain.clone(),
            weights_dir: Some(self.weights_dir.clone()),
        };
        toml::to_string_pretty(&full).expect("resolved config serializes")
    }

    /// Short content hash for deterministic run-directory names.
    pub fn hash8(&self) -> String {
        pcos_screen_core::util::sha256_hex(self.snapshot_toml().as_bytes())[..8].to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
data_root = "data"
out_root = "runs"

[backbone]
kind = "tiny_test"
input_size = 16
"#;

    #[test]
    fn minimal_config_resolves_with_backbone_defaults() {
        let cfg: RunConfig = toml::from_str(MINIMAL).unwrap();
        let resolved = cfg.resolve().unwrap();
        assert_eq!(resolved.train.max_epochs, 30);
        assert_eq!(resolved.train.patience, 10);
        assert_eq!(resolved.train.batch_size, 32);
        assert_eq!(resolved.preprocess.target_size, 16);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = format!("{MINIMAL}\nnot_a_key = 1\n");
        assert!(toml::from_str::<RunConfig>(&bad).is_err());

        let bad_nested = MINIMAL.replace("[backbone]", "[backbone]\nwhatever = true");
        assert!(toml::from_str::<RunConfig>(&bad_nested).is_err());
    }

    #[test]
    fn snapshot_round_trips_to_the_same_resolution() {
        let cfg: RunConfig = toml::from_str(MINIMAL).unwrap();
        let resolved = cfg.resolve().unwrap();
        let snapshot = resolved.snapshot_toml();
        let reloaded: RunConfig = toml::from_str(&snapshot).unwrap();
        let re_resolved = reloaded.resolve().unwrap();
        assert_eq!(re_resolved.snapshot_toml(), snapshot);
        assert_eq!(re_resolved.hash8(), resolved.hash8());
    }

    #[test]
    fn mismatched_target_size_is_a_config_error() {
        let bad = format!("{MINIMAL}\n[preprocess]\ntarget_size = 224\n");
        let cfg: RunConfig = toml::from_str(&bad).unwrap();
        assert!(cfg.resolve().is_err());
    }

    #[test]
    fn resnet_defaults_differ() {
        let text = MINIMAL
            .replace("kind = \"tiny_test\"", "kind = \"resnet50\"")
            .replace("input_size = 16", "input_size = 224");
        let cfg: RunConfig = toml::from_str(&text).unwrap();
        let resolved = cfg.resolve().unwrap();
        assert_eq!(resolved.train.max_epochs, 67);
        assert_eq!(resolved.train.patience, 10);
    }
}
