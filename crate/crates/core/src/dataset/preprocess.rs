//! Image preprocessing: resize so the short side matches the target,
//! center-crop to a square, rescale to [0, 1], and replicate grayscale
//! across three channels.

use crate::error::{Error, Result};
use crate::Scalar;
use image::imageops::FilterType;
use image::DynamicImage;
use ndarray::Array3;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Crop {
    Center,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelPolicy {
    /// Replicate grayscale pixels over three channels so pretrained RGB
    /// backbones apply unchanged.
    ReplicateToRgb,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PreprocessConfig {
    pub target_size: usize,
    pub crop: Crop,
    /// Divisor mapping integer pixel values to [0, 1].
    pub rescale: f64,
    pub channel_policy: ChannelPolicy,
    /// Opt-in per-channel mean/std standardization (pretrained-weight
    /// convention). When set, output values are no longer confined to [0, 1].
    pub standardize: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            target_size: 224,
            crop: Crop::Center,
            rescale: 255.0,
            channel_policy: ChannelPolicy::ReplicateToRgb,
            standardize: false,
        }
    }
}

impl PreprocessConfig {
    pub fn validate(&self) -> Result<()> {
        if self.target_size == 0 {
            return Err(Error::Parameter("target_size must be positive".into()));
        }
        if !(self.rescale > 0.0) {
            return Err(Error::Parameter("rescale divisor must be positive".into()));
        }
        Ok(())
    }
}

/// Channel statistics used when `standardize` is on (ImageNet convention).
const CHANNEL_MEAN: [f64; 3] = [0.485, 0.456, 0.406];
const CHANNEL_STD: [f64; 3] = [0.229, 0.224, 0.225];

/// Preprocess a decoded image to a `target x target x 3` tensor in [0, 1].
///
/// Non-square inputs are resized so the short side equals `target_size`
/// (triangle filter, which cannot overshoot the input range) and then
/// center-cropped; inputs already at the right short side skip the resize.
pub fn preprocess<F: Scalar>(img: &DynamicImage, cfg: &PreprocessConfig) -> Result<Array3<F>> {
    cfg.validate()?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    if w == 0 || h == 0 {
        return Err(Error::InvalidImage(format!("zero-dimension image {w}x{h}")));
    }

    let target = cfg.target_size;
    let rgb = img.to_rgb8();

    let (new_w, new_h) = if w <= h {
        let nh = ((h as f64 * target as f64 / w as f64).round() as usize).max(target);
        (target, nh)
    } else {
        let nw = ((w as f64 * target as f64 / h as f64).round() as usize).max(target);
        (nw, target)
    };
    let resized = if (new_w, new_h) == (w, h) {
        rgb
    } else {
        image::imageops::resize(&rgb, new_w as u32, new_h as u32, FilterType::Triangle)
    };

    let Crop::Center = cfg.crop;
    let x0 = (new_w - target) / 2;
    let y0 = (new_h - target) / 2;

    let mut out = Array3::<F>::zeros((target, target, 3));
    for y in 0..target {
        for x in 0..target {
            let px = resized.get_pixel((x0 + x) as u32, (y0 + y) as u32);
            for c in 0..3 {
                let mut v = px.0[c] as f64 / cfg.rescale;
                if cfg.standardize {
                    v = (v - CHANNEL_MEAN[c]) / CHANNEL_STD[c];
                }
                out[[y, x, c]] = F::cast(v);
            }
        }
    }
    Ok(out)
}

/// Open `path` and preprocess it.
pub fn preprocess_file<F: Scalar>(path: &Path, cfg: &PreprocessConfig) -> Result<Array3<F>> {
    let img = image::open(path).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        source: e,
    })?;
    preprocess(&img, cfg)
}
