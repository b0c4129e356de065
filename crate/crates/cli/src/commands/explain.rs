//! `explain`: write attribution overlays for one image and checkpoint.

use pcos_screen_core::dataset::{preprocess_file, PreprocessConfig};
use pcos_screen_core::error::{Error, Result};
use pcos_screen_core::explain::{
    attribution_to_heatmap, grad_cam, lime_explain, render_overlay, segment, shapley_explain,
    LimeConfig, SegmentMethod,
};
use pcos_screen_core::model::load_checkpoint;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Gradcam,
    Lime,
    Shapley,
}

impl Method {
    fn as_str(&self) -> &'static str {
        match self {
            Method::Gradcam => "gradcam",
            Method::Lime => "lime",
            Method::Shapley => "shapley",
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn run(
    method: Method,
    image_path: &Path,
    checkpoint: &Path,
    out: &Path,
    n_segments: usize,
    lime_samples: usize,
    seed: u64,
) -> Result<()> {
    let (model, _) = load_checkpoint::<f32>(checkpoint)?;
    let preprocess = PreprocessConfig {
        target_size: model.spec.input_size,
        ..Default::default()
    };
    let tensor = preprocess_file::<f32>(image_path, &preprocess)?;
    let stem = image_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("image");
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let overlay_path = out.join(format!("{stem}.{}.overlay.png", method.as_str()));

    match method {
        Method::Gradcam => {
            let heatmap = grad_cam(&model, &tensor, &model.feature_layer.clone())?;
            let artifacts = render_overlay(&tensor, &heatmap.values, &overlay_path)?;
            println!("overlay: {}", artifacts.overlay_path.display());
            println!("raw: {}", artifacts.raw_path.display());
        }
        Method::Lime | Method::Shapley => {
            let seg = segment(&tensor, n_segments, SegmentMethod::Grid)?;
            let attribution = match method {
                Method::Lime => lime_explain(
                    &model,
                    &tensor,
                    &seg,
                    lime_samples,
                    seed,
                    &LimeConfig::default(),
                )?,
                Method::Shapley => shapley_explain(&model, &tensor, &seg)?,
                Method::Gradcam => unreachable!(),
            };
            let heatmap = attribution_to_heatmap(&seg, &attribution.weights);
            let artifacts = render_overlay(&tensor, &heatmap, &overlay_path)?;
            let weights_path = out.join(format!("{stem}.{}.weights.txt", method.as_str()));
            std::fs::write(&weights_path, attribution.to_text())
                .map_err(|e| Error::io(&weights_path, e))?;
            println!("overlay: {}", artifacts.overlay_path.display());
            println!("raw: {}", artifacts.raw_path.display());
            println!("weights: {}", weights_path.display());
        }
    }
    Ok(())
}
