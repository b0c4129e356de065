//! LIME: a locally weighted linear surrogate over superpixel on/off masks.
//!
//! Masks keep each segment with probability one half; switched-off segments
//! are filled with the per-channel image mean. Sample weights follow the
//! exponential kernel `exp(-d^2 / sigma^2)` where `d` is the fraction of
//! segments turned off, and the surrogate is fit by weighted least squares
//! with an intercept.

use super::{apply_segment_mask, channel_means, AttributionMethod, AttributionVector, Predictor,
            SuperpixelSegmentation};
use crate::error::{Error, Result};
use crate::util::linalg;
use crate::Scalar;
use ndarray::Array3;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy)]
pub struct LimeConfig {
    /// Kernel width in fraction-of-segments-off distance.
    pub kernel_width: f64,
}

impl Default for LimeConfig {
    fn default() -> Self {
        LimeConfig { kernel_width: 0.25 }
    }
}

pub fn lime_explain<F: Scalar>(
    predictor: &dyn Predictor<F>,
    image: &Array3<F>,
    seg: &SuperpixelSegmentation,
    n_samples: usize,
    seed: u64,
    config: &LimeConfig,
) -> Result<AttributionVector<F>> {
    let k = seg.n_segments;
    if n_samples < k + 1 {
        return Err(Error::Parameter(format!(
            "lime needs at least n_segments + 1 = {} samples, got {n_samples}",
            k + 1
        )));
    }
    if image.dim().0 != seg.dims().0 || image.dim().1 != seg.dims().1 {
        return Err(Error::ShapeMismatch(format!(
            "segmentation {:?} does not match image {:?}",
            seg.dims(),
            image.dim()
        )));
    }

    let fill = channel_means(image);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // degenerate designs get one resample before giving up
    for attempt in 0..2 {
        let masks: Vec<Vec<bool>> = (0..n_samples)
            .map(|_| (0..k).map(|_| rng.random_range(0.0..1.0) < 0.5).collect())
            .collect();
        if masks.iter().skip(1).all(|m| *m == masks[0]) {
            continue;
        }

        let mut predictions = Vec::with_capacity(n_samples);
        let mut weights = Vec::with_capacity(n_samples);
        for mask in &masks {
            let perturbed = apply_segment_mask(image, seg, mask, &fill);
            predictions.push(predictor.predict_prob(&perturbed)?.as_f64());
            let off = mask.iter().filter(|&&on| !on).count() as f64 / k as f64;
            weights.push((-(off * off) / (config.kernel_width * config.kernel_width)).exp());
        }

        if let Some(beta) = weighted_least_squares(&masks, &predictions, &weights) {
            let coefficients = beta[1..].iter().map(|&v| F::cast(v)).collect();
            return Ok(AttributionVector {
                weights: coefficients,
                method: AttributionMethod::Lime,
                baseline: "per-channel image mean".to_string(),
            });
        }
        let _ = attempt;
    }
    Err(Error::Attribution(
        "lime design matrix is degenerate (all perturbation masks identical or singular fit)"
            .into(),
    ))
}

/// Solve the normal equations of the intercept-augmented weighted fit.
fn weighted_least_squares(
    masks: &[Vec<bool>],
    y: &[f64],
    sample_weights: &[f64],
) -> Option<Vec<f64>> {
    let n = masks.len();
    let k = masks[0].len();
    let p = k + 1;

    let row = |i: usize, j: usize| -> f64 {
        if j == 0 {
            1.0
        } else if masks[i][j - 1] {
            1.0
        } else {
            0.0
        }
    };

    let mut xtwx = vec![vec![0.0f64; p]; p];
    let mut xtwy = vec![0.0f64; p];
    for i in 0..n {
        let w = sample_weights[i];
        for a in 0..p {
            let xa = row(i, a);
            if xa == 0.0 {
                continue;
            }
            xtwy[a] += w * xa * y[i];
            for (b, cell) in xtwx[a].iter_mut().enumerate() {
                let xb = row(i, b);
                if xb != 0.0 {
                    *cell += w * xa * xb;
                }
            }
        }
    }
    linalg::solve(xtwx, xtwy)
}
