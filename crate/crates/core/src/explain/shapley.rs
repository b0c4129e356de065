//! Exact Shapley values over superpixels by full coalition enumeration.
//!
//! With `n` segments the model is evaluated on all `2^n` masked images and
//! each segment receives its exact average marginal contribution
//! `sum_{S not containing i} |S|! (n-|S|-1)! / n! * (f(S+i) - f(S))`.
//! The segment count is capped so enumeration stays tractable.

use super::{apply_segment_mask, channel_means, AttributionMethod, AttributionVector, Predictor,
            SuperpixelSegmentation};
use crate::error::{Error, Result};
use crate::Scalar;
use ndarray::Array3;

/// Enumeration cap: past this, use LIME.
pub const SHAPLEY_MAX_SEGMENTS: usize = 14;

pub fn shapley_explain<F: Scalar>(
    predictor: &dyn Predictor<F>,
    image: &Array3<F>,
    seg: &SuperpixelSegmentation,
) -> Result<AttributionVector<F>> {
    let n = seg.n_segments;
    if n > SHAPLEY_MAX_SEGMENTS {
        return Err(Error::Parameter(format!(
            "{n} segments exceed the exact-enumeration cap of {SHAPLEY_MAX_SEGMENTS}; \
             use LIME for finer segmentations"
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

    // value of every coalition, indexed by mask bits
    let mut values = vec![0.0f64; 1 << n];
    let mut keep = vec![false; n];
    for coalition in 0..(1usize << n) {
        for (i, k) in keep.iter_mut().enumerate() {
            *k = coalition >> i & 1 == 1;
        }
        let masked = apply_segment_mask(image, seg, &keep, &fill);
        values[coalition] = predictor.predict_prob(&masked)?.as_f64();
    }

    let weights = shapley_from_values(&values, n);
    Ok(AttributionVector {
        weights: weights.into_iter().map(F::cast).collect(),
        method: AttributionMethod::Shapley,
        baseline: "per-channel image mean".to_string(),
    })
}

/// Exact Shapley attribution of a tabulated coalition game.
pub fn shapley_from_values(values: &[f64], n: usize) -> Vec<f64> {
    assert_eq!(values.len(), 1 << n);
    let factorial = |k: usize| -> f64 { (1..=k).map(|v| v as f64).product() };
    let coalition_weight: Vec<f64> = (0..n)
        .map(|s| factorial(s) * factorial(n - s - 1) / factorial(n))
        .collect();

    let mut weights = vec![0.0f64; n];
    for coalition in 0..(1usize << n) {
        let size = coalition.count_ones() as usize;
        for (i, w) in weights.iter_mut().enumerate() {
            if coalition >> i & 1 == 0 {
                let with_i = coalition | 1 << i;
                *w += coalition_weight[size] * (values[with_i] - values[coalition]);
            }
        }
    }
    weights
}
