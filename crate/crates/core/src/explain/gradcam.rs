//! Gradient-weighted class activation mapping.
//!
//! Channel weights are the spatial means of the infected-score gradient at
//! the chosen layer; the weighted activation sum is rectified, bilinearly
//! upsampled to the image size, and min-max normalized. An all-constant map
//! normalizes to zeros rather than dividing by zero.

use super::{AttributionTarget, Heatmap};
use crate::error::Result;
use crate::model::ModelHandle;
use crate::util::resample::bilinear_resize;
use crate::Scalar;
use ndarray::{Array2, Array3};

pub fn grad_cam<F: Scalar>(
    model: &ModelHandle<F>,
    image: &Array3<F>,
    layer: &str,
) -> Result<Heatmap<F>> {
    let (activations, grads) = model.layer_attribution(image, layer)?;
    let (fh, fw, channels) = activations.dim();
    let denom = F::cast((fh * fw) as f64);

    let mut channel_weights = vec![F::zero(); channels];
    for c in 0..channels {
        let mut acc = F::zero();
        for y in 0..fh {
            for x in 0..fw {
                acc += grads[[y, x, c]];
            }
        }
        channel_weights[c] = acc / denom;
    }

    let mut raw = Array2::<F>::zeros((fh, fw));
    for y in 0..fh {
        for x in 0..fw {
            let mut acc = F::zero();
            for c in 0..channels {
                acc += channel_weights[c] * activations[[y, x, c]];
            }
            raw[[y, x]] = if acc > F::zero() { acc } else { F::zero() };
        }
    }

    let (img_h, img_w, _) = image.dim();
    let upsampled = bilinear_resize(&raw, img_h, img_w);
    Ok(Heatmap {
        values: normalize_min_max(upsampled),
        source_layer: layer.to_string(),
        target: AttributionTarget::InfectedScore,
    })
}

/// Min-max normalize to [0, 1]; constant maps become all zeros.
pub fn normalize_min_max<F: Scalar>(mut map: Array2<F>) -> Array2<F> {
    let mut min = F::infinity();
    let mut max = F::neg_infinity();
    for &v in map.iter() {
        if v < min {
            min = v;
        }
        if v > max {
            max = v;
        }
    }
    if max > min {
        let range = max - min;
        map.mapv_inplace(|v| (v - min) / range);
        map
    } else {
        map.mapv_inplace(|_| F::zero());
        map
    }
}
