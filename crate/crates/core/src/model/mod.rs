//! Classifier models: backbone construction, prediction, checkpointing,
//! and the training loop.

pub mod backbones;
pub mod container;
pub mod train;

pub use backbones::FEATURE_LAYER;
pub use train::{train, EpochRecord, TrainConfig, TrainingHistory};

use crate::dataset::Sample;
use crate::error::{Error, Result};
use crate::nn::Graph;
use crate::Scalar;
use ndarray::Array3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Environment variable naming the pretrained-weights cache directory.
pub const WEIGHTS_DIR_ENV: &str = "PCOS_SCREEN_WEIGHTS_DIR";

/// Probability clamp: keeps sigmoid outputs inside the open interval and
/// the cross-entropy finite.
pub const PROB_EPSILON: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackboneKind {
    Densenet201,
    Resnet50,
    TinyTest,
}

impl BackboneKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BackboneKind::Densenet201 => "densenet201",
            BackboneKind::Resnet50 => "resnet50",
            BackboneKind::TinyTest => "tiny_test",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackboneSpec {
    pub kind: BackboneKind,
    #[serde(default)]
    pub pretrained: bool,
    #[serde(default = "default_input_size")]
    pub input_size: usize,
}

fn default_input_size() -> usize {
    224
}

impl BackboneSpec {
    pub fn tiny(input_size: usize) -> Self {
        BackboneSpec {
            kind: BackboneKind::TinyTest,
            pretrained: false,
            input_size,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let min = match self.kind {
            BackboneKind::TinyTest => 4,
            _ => 32,
        };
        if self.input_size < min {
            return Err(Error::Parameter(format!(
                "input_size {} too small for {} (minimum {min})",
                self.input_size,
                self.kind.as_str()
            )));
        }
        Ok(())
    }
}

/// A built classifier: backbone graph plus sigmoid head, with the named
/// feature layer used for attribution.
#[derive(Debug)]
pub struct ModelHandle<F: Scalar> {
    pub spec: BackboneSpec,
    pub graph: Graph<F>,
    pub feature_layer: String,
}

/// Numerically stable sigmoid.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_EPSILON, 1.0 - PROB_EPSILON)
}

/// Binary cross-entropy against a (possibly soft) target in [0, 1].
/// Affine in the target, so MixUp labels integrate exactly.
pub fn bce(p: f64, y: f64) -> f64 {
    let p = clamp_prob(p);
    -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
}

/// Resolve the pretrained-weights cache directory.
pub fn weights_dir() -> PathBuf {
    if let Ok(dir) = std::env::var(WEIGHTS_DIR_ENV) {
        return PathBuf::from(dir);
    }
    let home = std::env::var("HOME").unwrap_or_else(|_| ".".into());
    Path::new(&home).join(".cache/pcos-screen/weights")
}

fn build_graph<F: Scalar>(spec: &BackboneSpec, seed: u64) -> Graph<F> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match spec.kind {
        BackboneKind::TinyTest => backbones::tiny_test(spec.input_size, &mut rng),
        BackboneKind::Densenet201 => backbones::densenet201(spec.input_size, &mut rng),
        BackboneKind::Resnet50 => backbones::resnet50(spec.input_size, &mut rng),
    }
}

/// Build a model. With `pretrained` set, backbone tensors are loaded from
/// `<weights_dir>/<kind>.pcw`; a missing or incompatible file is a hard
/// error, never a silent random initialization. The head is always freshly
/// initialized from `seed`.
pub fn build_model<F: Scalar>(spec: &BackboneSpec, seed: u64) -> Result<ModelHandle<F>> {
    spec.validate()?;
    let mut graph = build_graph::<F>(spec, seed);

    if spec.pretrained && spec.kind != BackboneKind::TinyTest {
        let path = weights_dir().join(format!("{}.pcw", spec.kind.as_str()));
        if !path.is_file() {
            return Err(Error::WeightsUnavailable {
                backbone: spec.kind.as_str().to_string(),
                msg: format!(
                    "expected weights container at {}; set {WEIGHTS_DIR_ENV} to a directory \
                     holding <backbone>.pcw files (no download is attempted)",
                    path.display()
                ),
            });
        }
        let cont = container::read::<F>(&path)?;
        if cont.header.kind != "weights" && cont.header.kind != "checkpoint" {
            return Err(Error::WeightsUnavailable {
                backbone: spec.kind.as_str().to_string(),
                msg: format!("container {} has kind {:?}", path.display(), cont.header.kind),
            });
        }
        container::load_into_graph(&mut graph, &cont, &|name| !name.starts_with("head."), &path)
            .map_err(|e| Error::WeightsUnavailable {
                backbone: spec.kind.as_str().to_string(),
                msg: e.to_string(),
            })?;
    }

    Ok(ModelHandle {
        spec: *spec,
        graph,
        feature_layer: FEATURE_LAYER.to_string(),
    })
}

impl<F: Scalar> ModelHandle<F> {
    /// Raw classification score (pre-sigmoid) in inference mode.
    pub fn forward_logit(&self, image: &Array3<F>) -> Result<F> {
        Ok(self.graph.forward(image, false, None)?.logit())
    }

    /// Infected probability for one image, clamped to the open interval.
    pub fn predict_one(&self, image: &Array3<F>) -> Result<F> {
        let logit = self.forward_logit(image)?;
        Ok(F::cast(clamp_prob(sigmoid(logit.as_f64()))))
    }

    /// Activations of a named layer and the gradient of the infected score
    /// with respect to them.
    pub fn layer_attribution(&self, image: &Array3<F>, layer: &str) -> Result<(Array3<F>, Array3<F>)> {
        let node = self.graph.resolve_tag(layer).ok_or_else(|| {
            Error::Attribution(format!(
                "unknown layer {layer:?}; available: {:?}",
                self.graph.tags.keys().collect::<Vec<_>>()
            ))
        })?;
        let fp = self.graph.forward(image, false, None)?;
        let bp = self.graph.backward(&fp, F::one(), false);
        Ok((fp.values[node].clone(), bp.d_values[node].clone()))
    }

    /// Mean loss and thresholded accuracy over a sample set.
    pub fn evaluate(&self, samples: &[Sample<F>]) -> Result<(f64, f64)> {
        if samples.is_empty() {
            return Err(Error::Config("evaluate needs a non-empty sample set".into()));
        }
        let mut loss = 0.0;
        let mut correct = 0usize;
        for s in samples {
            let p = self.predict_one(&s.image)?.as_f64();
            let y = s.label.as_f64();
            loss += bce(p, y);
            if (p >= 0.5) == (y >= 0.5) {
                correct += 1;
            }
        }
        Ok((loss / samples.len() as f64, correct as f64 / samples.len() as f64))
    }
}

/// Order-aligned probabilities for a batch; pure with respect to the model.
pub fn predict<F: Scalar>(model: &ModelHandle<F>, images: &[Array3<F>]) -> Result<Vec<F>> {
    images.iter().map(|img| model.predict_one(img)).collect()
}

/// Metadata stored alongside a checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointMeta {
    pub epoch: usize,
    pub val_loss: f64,
    pub val_accuracy: f64,
    pub config_hash: String,
}

impl CheckpointMeta {
    fn to_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("epoch".into(), self.epoch.to_string());
        m.insert("val_loss".into(), format!("{}", self.val_loss));
        m.insert("val_accuracy".into(), format!("{}", self.val_accuracy));
        m.insert("config_hash".into(), self.config_hash.clone());
        m
    }

    fn from_map(map: &BTreeMap<String, String>, path: &Path) -> Result<Self> {
        let get = |key: &str| -> Result<&String> {
            map.get(key).ok_or_else(|| Error::Checkpoint {
                path: path.to_path_buf(),
                msg: format!("missing metadata key {key}"),
            })
        };
        Ok(CheckpointMeta {
            epoch: get("epoch")?.parse().map_err(|e| Error::Checkpoint {
                path: path.to_path_buf(),
                msg: format!("bad epoch: {e}"),
            })?,
            val_loss: get("val_loss")?.parse().map_err(|e| Error::Checkpoint {
                path: path.to_path_buf(),
                msg: format!("bad val_loss: {e}"),
            })?,
            val_accuracy: get("val_accuracy")?.parse().map_err(|e| Error::Checkpoint {
                path: path.to_path_buf(),
                msg: format!("bad val_accuracy: {e}"),
            })?,
            config_hash: get("config_hash")?.clone(),
        })
    }

    /// Human-readable sidecar.
    pub fn sidecar_text(&self) -> String {
        format!(
            "epoch: {}\nval_loss: {}\nval_accuracy: {}\nconfig_hash: {}\n",
            self.epoch, self.val_loss, self.val_accuracy, self.config_hash
        )
    }
}

/// Write a checkpoint container plus its `.txt` sidecar.
pub fn save_checkpoint<F: Scalar>(
    model: &ModelHandle<F>,
    meta: &CheckpointMeta,
    path: &Path,
) -> Result<()> {
    container::write_graph(
        &model.graph,
        "checkpoint",
        Some(&model.spec),
        Some(&model.feature_layer),
        meta.to_map(),
        path,
    )?;
    let sidecar = path.with_extension("ckpt.txt");
    std::fs::write(&sidecar, meta.sidecar_text()).map_err(|e| Error::io(&sidecar, e))?;
    Ok(())
}

/// Rebuild a model from a checkpoint written by [`save_checkpoint`].
pub fn load_checkpoint<F: Scalar>(path: &Path) -> Result<(ModelHandle<F>, CheckpointMeta)> {
    let cont = container::read::<F>(path)?;
    if cont.header.kind != "checkpoint" {
        return Err(Error::Checkpoint {
            path: path.to_path_buf(),
            msg: format!("container kind {:?} is not a checkpoint", cont.header.kind),
        });
    }
    let spec = cont.header.spec.ok_or_else(|| Error::Checkpoint {
        path: path.to_path_buf(),
        msg: "checkpoint is missing the backbone spec".into(),
    })?;
    let mut graph = build_graph::<F>(&spec, 0);
    container::load_into_graph(&mut graph, &cont, &|_| true, path)?;
    let meta = CheckpointMeta::from_map(&cont.header.meta, path)?;
    Ok((
        ModelHandle {
            spec,
            graph,
            feature_layer: cont
                .header
                .feature_layer
                .unwrap_or_else(|| FEATURE_LAYER.to_string()),
        },
        meta,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;

    #[test]
    fn tiny_forward_on_zeros_is_inside_unit_interval() {
        let model = build_model::<f32>(&BackboneSpec::tiny(8), 1).unwrap();
        let x = Array3::<f32>::zeros((8, 8, 3));
        let p = model.predict_one(&x).unwrap();
        assert!(p > 0.0 && p < 1.0);
    }

    #[test]
    fn build_is_deterministic_for_a_seed() {
        let a = build_model::<f32>(&BackboneSpec::tiny(8), 42).unwrap();
        let b = build_model::<f32>(&BackboneSpec::tiny(8), 42).unwrap();
        let x = Array3::from_elem((8, 8, 3), 0.3f32);
        assert_eq!(
            a.predict_one(&x).unwrap().to_bits(),
            b.predict_one(&x).unwrap().to_bits()
        );

        let c = build_model::<f32>(&BackboneSpec::tiny(8), 43).unwrap();
        assert_ne!(
            a.predict_one(&x).unwrap().to_bits(),
            c.predict_one(&x).unwrap().to_bits()
        );
    }

    #[test]
    fn predict_batches_are_order_aligned_and_partition_invariant() {
        let model = build_model::<f64>(&BackboneSpec::tiny(8), 7).unwrap();
        let imgs: Vec<Array3<f64>> = (0..3)
            .map(|i| Array3::from_elem((8, 8, 3), 0.2 + 0.1 * i as f64))
            .collect();
        let together = predict(&model, &imgs).unwrap();
        for (i, img) in imgs.iter().enumerate() {
            let single = model.predict_one(img).unwrap();
            assert!((together[i] - single).abs() < 1e-12);
        }
        assert!(predict(&model, &[]).unwrap().is_empty());
    }

    #[test]
    fn head_probability_matches_hand_computed_logit() {
        // freeze the head to known values on a constant GAP input
        let mut model = build_model::<f64>(&BackboneSpec::tiny(8), 0).unwrap();
        // zero both convs so activations vanish, then the logit is the
        // dense bias alone
        model.graph.visit_params_mut(&mut |name, data| {
            if name.starts_with("conv") {
                data.iter_mut().for_each(|v| *v = 0.0);
            }
            if name == "head.dense.b" {
                data[0] = 0.37;
            }
        });
        let x = Array3::from_elem((8, 8, 3), 0.9);
        let p = model.predict_one(&x).unwrap();
        assert!((p - sigmoid(0.37)).abs() < 1e-12);
    }

    #[test]
    fn pretrained_without_weights_is_an_availability_error() {
        let spec = BackboneSpec {
            kind: BackboneKind::Resnet50,
            pretrained: true,
            input_size: 32,
        };
        // point the cache somewhere empty
        let dir = tempfile::tempdir().unwrap();
        std::env::set_var(WEIGHTS_DIR_ENV, dir.path());
        let err = build_model::<f32>(&spec, 0).unwrap_err();
        std::env::remove_var(WEIGHTS_DIR_ENV);
        match err {
            Error::WeightsUnavailable { backbone, msg } => {
                assert_eq!(backbone, "resnet50");
                assert!(msg.contains("resnet50.pcw"));
            }
            other => panic!("expected weights error, got {other}"),
        }
    }

    #[test]
    fn pretrained_loads_from_a_weights_container() {
        let dir = tempfile::tempdir().unwrap();
        // author a weights file from a randomly initialized model
        let donor = build_model::<f32>(
            &BackboneSpec {
                kind: BackboneKind::TinyTest,
                pretrained: false,
                input_size: 8,
            },
            99,
        )
        .unwrap();
        let path = dir.path().join("weights.pcw");
        container::write_graph(
            &donor.graph,
            "weights",
            None,
            None,
            BTreeMap::new(),
            &path,
        )
        .unwrap();

        let mut fresh = build_model::<f32>(&BackboneSpec::tiny(8), 1).unwrap();
        let cont = container::read::<f32>(&path).unwrap();
        container::load_into_graph(&mut fresh.graph, &cont, &|n| !n.starts_with("head."), &path)
            .unwrap();

        let mut donor_conv = Vec::new();
        donor.graph.visit_params(&mut |n, d, _| {
            if n == "conv1.w" {
                donor_conv = d.to_vec();
            }
        });
        let mut fresh_conv = Vec::new();
        fresh.graph.visit_params(&mut |n, d, _| {
            if n == "conv1.w" {
                fresh_conv = d.to_vec();
            }
        });
        assert_eq!(donor_conv, fresh_conv);
    }

    #[test]
    fn checkpoint_round_trip_preserves_predictions() {
        let dir = tempfile::tempdir().unwrap();
        let model = build_model::<f32>(&BackboneSpec::tiny(8), 11).unwrap();
        let meta = CheckpointMeta {
            epoch: 3,
            val_loss: 0.25,
            val_accuracy: 0.9,
            config_hash: "abc".into(),
        };
        let path = dir.path().join("checkpoints/best.ckpt");
        save_checkpoint(&model, &meta, &path).unwrap();
        assert!(path.with_extension("ckpt.txt").is_file());

        let (loaded, loaded_meta) = load_checkpoint::<f32>(&path).unwrap();
        assert_eq!(loaded_meta, meta);
        let x = Array3::from_elem((8, 8, 3), 0.42f32);
        let before = model.predict_one(&x).unwrap();
        let after = loaded.predict_one(&x).unwrap();
        assert!((before - after).abs() < 1e-6);
    }

    #[test]
    fn loading_a_missing_checkpoint_names_the_path() {
        let err = load_checkpoint::<f32>(Path::new("/nonexistent/best.ckpt")).unwrap_err();
        match err {
            Error::Io { path, .. } => assert!(path.ends_with("best.ckpt")),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn corrupt_checkpoint_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ckpt");
        std::fs::write(&path, b"definitely not a container").unwrap();
        assert!(matches!(
            load_checkpoint::<f32>(&path).unwrap_err(),
            Error::Checkpoint { .. }
        ));
    }

    #[test]
    fn probability_stays_in_open_interval_for_extreme_inputs() {
        let model = build_model::<f32>(&BackboneSpec::tiny(8), 3).unwrap();
        for magnitude in [0.0f32, 1.0, 1e3, 1e6] {
            for sign in [1.0f32, -1.0] {
                let x = Array3::from_elem((8, 8, 3), sign * magnitude);
                let p = model.predict_one(&x).unwrap();
                assert!(p > 0.0 && p < 1.0, "p = {p} for input {}", sign * magnitude);
            }
        }
    }

    #[test]
    fn loss_gradient_matches_central_finite_differences() {
        // analytic d bce/d theta via (p - y) backprop against central
        // differences on the tiny backbone, in f64
        let model = build_model::<f64>(&BackboneSpec::tiny(6), 12).unwrap();
        let x = Array3::from_shape_fn((6, 6, 3), |(y, x, c)| {
            0.5 + 0.3 * ((y * 7 + x * 3 + c) as f64 * 0.29).sin()
        });
        let target = 1.0;

        let fp = model.graph.forward(&x, false, None).unwrap();
        let p = sigmoid(fp.logit());
        let bp = model.graph.backward(&fp, p - target, true);

        let mut probe_model = build_model::<f64>(&BackboneSpec::tiny(6), 12).unwrap();
        let h = 1e-6;
        for name in ["head.dense.w", "head.dense.b", "conv2.w"] {
            let grad = &bp.grads.by_name[name];
            for idx in [0usize, grad.len() - 1] {
                let mut upper = 0.0;
                let mut lower = 0.0;
                for (dir, out) in [(h, &mut upper), (-h, &mut lower)] {
                    probe_model.graph.visit_params_mut(&mut |n, data| {
                        if n == name {
                            data[idx] += dir;
                        }
                    });
                    let logit = probe_model.graph.forward(&x, false, None).unwrap().logit();
                    *out = bce(sigmoid(logit), target);
                    probe_model.graph.visit_params_mut(&mut |n, data| {
                        if n == name {
                            data[idx] -= dir;
                        }
                    });
                }
                let fd = (upper - lower) / (2.0 * h);
                let analytic = grad[idx];
                let denom = fd.abs().max(analytic.abs()).max(1e-8);
                assert!(
                    ((analytic - fd) / denom).abs() < 1e-4,
                    "{name}[{idx}]: analytic {analytic} vs fd {fd}"
                );
            }
        }
    }

    #[test]
    fn bce_is_affine_in_the_target() {
        for (p, y_i, y_j, lambda) in [
            (0.7, 1.0, 0.0, 0.3),
            (0.2, 1.0, 1.0, 0.9),
            (0.95, 0.0, 1.0, 0.5),
        ] {
            let mixed = lambda * y_i + (1.0 - lambda) * y_j;
            let lhs = bce(p, mixed);
            let rhs = lambda * bce(p, y_i) + (1.0 - lambda) * bce(p, y_j);
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn densenet_batch_of_four_yields_four_probabilities() {
        let spec = BackboneSpec {
            kind: BackboneKind::Densenet201,
            pretrained: false,
            input_size: 32,
        };
        let model = build_model::<f32>(&spec, 0).unwrap();
        let imgs: Vec<Array3<f32>> = (0..4)
            .map(|i| Array3::from_elem((32, 32, 3), i as f32 * 0.2))
            .collect();
        let probs = predict(&model, &imgs).unwrap();
        assert_eq!(probs.len(), 4);
        assert!(probs.iter().all(|p| *p > 0.0 && *p < 1.0));
    }

    #[test]
    #[ignore = "full-resolution forward pass; run manually"]
    fn densenet_full_input_size_forward() {
        let spec = BackboneSpec {
            kind: BackboneKind::Densenet201,
            pretrained: false,
            input_size: 224,
        };
        let model = build_model::<f32>(&spec, 0).unwrap();
        let x = Array3::<f32>::zeros((224, 224, 3));
        let p = model.predict_one(&x).unwrap();
        assert!(p > 0.0 && p < 1.0);
    }
}
