//! Overlay rendering: blend an attribution map over the source image with a
//! warm colormap (high attribution reads red/yellow) and write the raw map
//! as a grayscale PNG alongside.

use super::SuperpixelSegmentation;
use crate::error::{Error, Result};
use crate::util::save_png;
use crate::Scalar;
use ndarray::{Array2, Array3};
use std::path::{Path, PathBuf};

const OVERLAY_ALPHA: f64 = 0.4;

/// Jet-style colormap: blue at 0 through green to yellow and red at 1.
pub fn warm_colormap(v: f64) -> [u8; 3] {
    let v = v.clamp(0.0, 1.0);
    let channel = |center: f64| ((1.5 - (4.0 * v - center).abs()).clamp(0.0, 1.0) * 255.0).round() as u8;
    [channel(3.0), channel(2.0), channel(1.0)]
}

pub struct OverlayArtifacts {
    pub overlay_path: PathBuf,
    pub raw_path: PathBuf,
}

fn raw_path_for(out_path: &Path) -> PathBuf {
    let name = out_path
        .file_name()
        .and_then(|n| n.to_str())
        .unwrap_or("attribution.png");
    let raw_name = if let Some(stripped) = name.strip_suffix("overlay.png") {
        format!("{stripped}raw.png")
    } else if let Some(stripped) = name.strip_suffix(".png") {
        format!("{stripped}.raw.png")
    } else {
        format!("{name}.raw.png")
    };
    out_path.with_file_name(raw_name)
}

/// Write the blended overlay at `out_path` plus the raw grayscale map next
/// to it. Deterministic: same inputs produce byte-identical files.
pub fn render_overlay<F: Scalar>(
    image: &Array3<F>,
    map: &Array2<F>,
    out_path: &Path,
) -> Result<OverlayArtifacts> {
    let (h, w, _) = image.dim();
    if map.dim() != (h, w) {
        return Err(Error::ShapeMismatch(format!(
            "attribution map {:?} does not match image {}x{}",
            map.dim(),
            h,
            w
        )));
    }

    let mut overlay = image::RgbImage::new(w as u32, h as u32);
    let mut raw = image::RgbImage::new(w as u32, h as u32);
    for y in 0..h {
        for x in 0..w {
            let v = map[[y, x]].as_f64().clamp(0.0, 1.0);
            let color = warm_colormap(v);
            let mut blended = [0u8; 3];
            for c in 0..3 {
                let base = image[[y, x, c]].as_f64().clamp(0.0, 1.0) * 255.0;
                blended[c] =
                    ((1.0 - OVERLAY_ALPHA) * base + OVERLAY_ALPHA * color[c] as f64).round() as u8;
            }
            overlay.put_pixel(x as u32, y as u32, image::Rgb(blended));
            let g = (v * 255.0).round() as u8;
            raw.put_pixel(x as u32, y as u32, image::Rgb([g, g, g]));
        }
    }

    let raw_path = raw_path_for(out_path);
    save_png(&overlay, out_path)?;
    save_png(&raw, &raw_path)?;
    Ok(OverlayArtifacts {
        overlay_path: out_path.to_path_buf(),
        raw_path,
    })
}

/// Paint signed per-segment weights onto a pixel map normalized to [0, 1]
/// (all-equal weights produce an all-zero map).
pub fn attribution_to_heatmap<F: Scalar>(
    seg: &SuperpixelSegmentation,
    weights: &[F],
) -> Array2<F> {
    assert_eq!(weights.len(), seg.n_segments);
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for w in weights {
        let v = w.as_f64();
        min = min.min(v);
        max = max.max(v);
    }
    let (h, w) = seg.dims();
    Array2::from_shape_fn((h, w), |(y, x)| {
        let raw = weights[seg.label_map[[y, x]] as usize].as_f64();
        if max > min {
            F::cast((raw - min) / (max - min))
        } else {
            F::zero()
        }
    })
}
