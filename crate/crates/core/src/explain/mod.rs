//! Visual attributions for individual predictions: Grad-CAM over a named
//! feature layer, LIME over superpixels, and exact Shapley values over
//! superpixels, each renderable as an overlay image.

pub mod gradcam;
pub mod lime;
pub mod render;
pub mod shapley;

pub use gradcam::grad_cam;
pub use lime::{lime_explain, LimeConfig};
pub use render::{attribution_to_heatmap, render_overlay, OverlayArtifacts};
pub use shapley::{shapley_explain, SHAPLEY_MAX_SEGMENTS};

use crate::error::{Error, Result};
use crate::model::ModelHandle;
use crate::Scalar;
use ndarray::{Array2, Array3};
use std::fmt::Write as _;

/// What the attribution explains. The pipeline is binary, so there is a
/// single target: the infected score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttributionTarget {
    InfectedScore,
}

/// Per-pixel attribution in [0, 1], dimensioned like the explained image.
#[derive(Debug, Clone)]
pub struct Heatmap<F: Scalar> {
    pub values: Array2<F>,
    pub source_layer: String,
    pub target: AttributionTarget,
}

/// Pixel-to-superpixel assignment; ids are contiguous from 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperpixelSegmentation {
    pub label_map: Array2<u32>,
    pub n_segments: usize,
}

impl SuperpixelSegmentation {
    pub fn dims(&self) -> (usize, usize) {
        self.label_map.dim()
    }

    /// Pixel count per segment id.
    pub fn segment_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.n_segments];
        for &id in self.label_map.iter() {
            sizes[id as usize] += 1;
        }
        sizes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentMethod {
    Grid,
}

/// Tile an image into exactly `n_segments` near-equal rectangles.
///
/// The grid uses the most-square factor pair of `n_segments` that fits the
/// image; region edges fall on `floor(i * dim / count)` so sizes differ by
/// at most one row or column.
pub fn segment<F: Scalar>(
    image: &Array3<F>,
    n_segments: usize,
    method: SegmentMethod,
) -> Result<SuperpixelSegmentation> {
    let (h, w, _) = image.dim();
    segment_dims(h, w, n_segments, method)
}

pub fn segment_dims(
    h: usize,
    w: usize,
    n_segments: usize,
    method: SegmentMethod,
) -> Result<SuperpixelSegmentation> {
    let SegmentMethod::Grid = method;
    if n_segments == 0 {
        return Err(Error::Parameter("n_segments must be at least 1".into()));
    }
    if n_segments > h * w {
        return Err(Error::Parameter(format!(
            "n_segments {n_segments} exceeds pixel count {}",
            h * w
        )));
    }

    let mut best: Option<(usize, usize)> = None;
    for rows in 1..=n_segments {
        if n_segments % rows != 0 {
            continue;
        }
        let cols = n_segments / rows;
        if rows > h || cols > w {
            continue;
        }
        let diff = rows.abs_diff(cols);
        if best.map_or(true, |(br, bc)| diff < br.abs_diff(bc)) {
            best = Some((rows, cols));
        }
    }
    let (rows, cols) = best.ok_or_else(|| {
        Error::Parameter(format!(
            "cannot tile a {h}x{w} image into exactly {n_segments} grid rectangles"
        ))
    })?;

    let label_map = Array2::from_shape_fn((h, w), |(y, x)| {
        let row = (y * rows) / h;
        let col = (x * cols) / w;
        (row * cols + col) as u32
    });
    Ok(SuperpixelSegmentation {
        label_map,
        n_segments,
    })
}

/// Signed per-superpixel attribution weights.
#[derive(Debug, Clone)]
pub struct AttributionVector<F: Scalar> {
    pub weights: Vec<F>,
    pub method: AttributionMethod,
    /// Description of the perturbation fill used when segments are off.
    pub baseline: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttributionMethod {
    Lime,
    Shapley,
}

impl AttributionMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            AttributionMethod::Lime => "lime",
            AttributionMethod::Shapley => "shapley",
        }
    }
}

impl<F: Scalar> AttributionVector<F> {
    /// Text sidecar: one `segment<TAB>weight` line per superpixel.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "method: {}", self.method.as_str()).unwrap();
        writeln!(out, "baseline: {}", self.baseline).unwrap();
        for (i, w) in self.weights.iter().enumerate() {
            writeln!(out, "{i}\t{w}").unwrap();
        }
        out
    }
}

/// Anything that maps an image to an infected probability. Implemented by
/// models and by plain closures (handy for oracle tests).
pub trait Predictor<F: Scalar> {
    fn predict_prob(&self, image: &Array3<F>) -> Result<F>;
}

impl<F: Scalar> Predictor<F> for ModelHandle<F> {
    fn predict_prob(&self, image: &Array3<F>) -> Result<F> {
        self.predict_one(image)
    }
}

impl<F: Scalar, T: Fn(&Array3<F>) -> F> Predictor<F> for T {
    fn predict_prob(&self, image: &Array3<F>) -> Result<F> {
        Ok(self(image))
    }
}

/// Per-channel means of an image: the default perturbation fill.
pub fn channel_means<F: Scalar>(image: &Array3<F>) -> [F; 3] {
    let (h, w, c) = image.dim();
    debug_assert_eq!(c, 3);
    let denom = F::cast((h * w) as f64);
    let mut means = [F::zero(); 3];
    for ch in 0..3 {
        let mut acc = F::zero();
        for y in 0..h {
            for x in 0..w {
                acc += image[[y, x, ch]];
            }
        }
        means[ch] = acc / denom;
    }
    means
}

/// Replace the pixels of every switched-off segment with the fill color.
pub fn apply_segment_mask<F: Scalar>(
    image: &Array3<F>,
    seg: &SuperpixelSegmentation,
    keep: &[bool],
    fill: &[F; 3],
) -> Array3<F> {
    let mut out = image.clone();
    let (h, w, _) = image.dim();
    for y in 0..h {
        for x in 0..w {
            let id = seg.label_map[[y, x]] as usize;
            if !keep[id] {
                for c in 0..3 {
                    out[[y, x, c]] = fill[c];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blank(h: usize, w: usize) -> Array3<f64> {
        Array3::zeros((h, w, 3))
    }

    #[test]
    fn sixteen_segments_tile_a_square_four_by_four() {
        let seg = segment(&blank(224, 224), 16, SegmentMethod::Grid).unwrap();
        assert_eq!(seg.n_segments, 16);
        let sizes = seg.segment_sizes();
        assert!(sizes.iter().all(|&s| s == 56 * 56));
        assert_eq!(seg.label_map[[0, 0]], 0);
        assert_eq!(seg.label_map[[0, 223]], 3);
        assert_eq!(seg.label_map[[223, 223]], 15);
    }

    #[test]
    fn single_segment_covers_everything() {
        let seg = segment(&blank(10, 7), 1, SegmentMethod::Grid).unwrap();
        assert!(seg.label_map.iter().all(|&id| id == 0));
    }

    #[test]
    fn nine_segments_on_ten_by_ten_stay_within_one_row() {
        // oracle: count pixels per id; a 3x3 tiling of 10 pixels gives
        // region sides of 3 or 4
        let seg = segment(&blank(10, 10), 9, SegmentMethod::Grid).unwrap();
        let sizes = seg.segment_sizes();
        assert_eq!(sizes.iter().sum::<usize>(), 100);
        for &s in &sizes {
            assert!(
                [9, 12, 16].contains(&s),
                "unexpected region size {s} (sides must be 3 or 4)"
            );
        }
    }

    #[test]
    fn every_pixel_gets_exactly_one_contiguous_id() {
        let seg = segment(&blank(13, 17), 6, SegmentMethod::Grid).unwrap();
        let mut seen = vec![false; 6];
        for &id in seg.label_map.iter() {
            assert!((id as usize) < 6);
            seen[id as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn oversized_segment_count_is_rejected() {
        assert!(segment(&blank(3, 3), 10, SegmentMethod::Grid).is_err());
        assert!(segment(&blank(3, 3), 0, SegmentMethod::Grid).is_err());
        // 13 is prime and exceeds both dimensions of a 4x4 image
        assert!(segment(&blank(4, 4), 13, SegmentMethod::Grid).is_err());
    }

    #[test]
    fn mask_application_fills_off_segments() {
        let mut img = blank(4, 4);
        img.fill(0.8);
        let seg = segment(&img, 4, SegmentMethod::Grid).unwrap();
        let fill = [0.1, 0.2, 0.3];
        let out = apply_segment_mask(&img, &seg, &[true, false, true, false], &fill);
        assert_eq!(out[[0, 0, 0]], 0.8); // segment 0 kept
        assert_eq!(out[[0, 3, 0]], 0.1); // segment 1 filled
        assert_eq!(out[[0, 3, 2]], 0.3);
        assert_eq!(out[[3, 0, 0]], 0.8); // segment 2 kept
        assert_eq!(out[[3, 3, 0]], 0.1); // segment 3 filled
    }

    #[test]
    fn channel_means_are_exact_on_constant_images() {
        let mut img = blank(5, 5);
        for c in 0..3 {
            for y in 0..5 {
                for x in 0..5 {
                    img[[y, x, c]] = 0.1 * (c as f64 + 1.0);
                }
            }
        }
        let means = channel_means(&img);
        assert!((means[0] - 0.1).abs() < 1e-12);
        assert!((means[1] - 0.2).abs() < 1e-12);
        assert!((means[2] - 0.3).abs() < 1e-12);
    }
}
