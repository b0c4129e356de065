//! MixUp and CutMix regularization.
//!
//! MixUp blends two images and their labels with a shared coefficient:
//! `x_new = lambda * x_i + (1 - lambda) * x_j`, same for labels. CutMix
//! pastes a rectangular patch of a partner image and weights the label by
//! the surviving pixel area of the original. The coefficient is drawn from
//! `Beta(alpha, alpha)`; `alpha = 0` disables mixing (`lambda = 1`).
//!
//! All randomness flows through the caller's generator: per batch the draw
//! order is method, then lambda, then the partner permutation, then (for
//! CutMix) the patch position.

use crate::dataset::Sample;
use crate::error::{Error, Result};
use crate::Scalar;
use ndarray::Array3;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution};

/// Mixing coefficient and the distribution parameter it was drawn with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixCoefficient {
    pub lambda: f64,
    pub alpha: f64,
}

/// How a sample was mixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MixMethod {
    None,
    Mixup,
    Cutmix,
}

impl MixMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            MixMethod::None => "none",
            MixMethod::Mixup => "mixup",
            MixMethod::Cutmix => "cutmix",
        }
    }
}

/// An image/label pair after mixing, with provenance.
#[derive(Debug, Clone)]
pub struct MixedSample<F: Scalar> {
    pub image: Array3<F>,
    /// Probability of class `infected` in [0, 1].
    pub soft_label: F,
    pub lambda_effective: F,
    pub method: MixMethod,
    pub partner_id: String,
}

/// Rectangular replacement patch for CutMix, clipped to the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RectMask {
    pub x0: usize,
    pub y0: usize,
    pub w: usize,
    pub h: usize,
    pub img_h: usize,
    pub img_w: usize,
}

impl RectMask {
    /// Fraction of image pixels covered by the patch, in [0, 1].
    pub fn coverage(&self) -> f64 {
        (self.w * self.h) as f64 / (self.img_h * self.img_w) as f64
    }

    /// Fraction of pixels kept from the original image, computed as a
    /// single division of exact integer counts so label accounting matches
    /// pixel counting bit-for-bit.
    pub fn kept_fraction(&self) -> f64 {
        let total = self.img_h * self.img_w;
        (total - self.w * self.h) as f64 / total as f64
    }

    pub fn contains(&self, y: usize, x: usize) -> bool {
        x >= self.x0 && x < self.x0 + self.w && y >= self.y0 && y < self.y0 + self.h
    }
}

/// Draw the mixing coefficient: `Beta(alpha, alpha)` for positive alpha,
/// exactly 1 when alpha is 0 (augmentation disabled).
pub fn sample_lambda(alpha: f64, rng: &mut ChaCha8Rng) -> Result<MixCoefficient> {
    if alpha < 0.0 || !alpha.is_finite() {
        return Err(Error::Parameter(format!(
            "mixing alpha must be finite and >= 0, got {alpha}"
        )));
    }
    let lambda = if alpha == 0.0 {
        1.0
    } else {
        let beta = Beta::new(alpha, alpha)
            .map_err(|e| Error::Parameter(format!("invalid beta parameter {alpha}: {e}")))?;
        beta.sample(rng)
    };
    Ok(MixCoefficient { lambda, alpha })
}

fn check_shapes<F: Scalar>(x_i: &Array3<F>, x_j: &Array3<F>) -> Result<()> {
    if x_i.dim() != x_j.dim() {
        return Err(Error::ShapeMismatch(format!(
            "cannot mix images of shapes {:?} and {:?}",
            x_i.dim(),
            x_j.dim()
        )));
    }
    Ok(())
}

/// Convex combination of two images and their labels.
pub fn mixup<F: Scalar>(
    x_i: &Array3<F>,
    y_i: F,
    x_j: &Array3<F>,
    y_j: F,
    lambda: F,
) -> Result<MixedSample<F>> {
    check_shapes(x_i, x_j)?;
    if lambda < F::zero() || lambda > F::one() {
        return Err(Error::Parameter(format!("lambda {lambda} outside [0, 1]")));
    }
    let one_minus = F::one() - lambda;
    let mut image = x_i.clone();
    image.zip_mut_with(x_j, |a, &b| *a = lambda * *a + one_minus * b);
    Ok(MixedSample {
        image,
        soft_label: lambda * y_i + one_minus * y_j,
        lambda_effective: lambda,
        method: MixMethod::Mixup,
        partner_id: String::new(),
    })
}

/// Build the replacement patch for a mixing coefficient: the patch side
/// lengths are `round(dim * sqrt(1 - lambda))` and the position is uniform
/// over fully contained placements.
pub fn make_rect_mask(lambda: f64, img_h: usize, img_w: usize, rng: &mut ChaCha8Rng) -> RectMask {
    assert!(img_h > 0 && img_w > 0, "mask needs positive image dimensions");
    let lambda = lambda.clamp(0.0, 1.0);
    let ratio = (1.0 - lambda).sqrt();
    let w = ((img_w as f64 * ratio).round() as usize).min(img_w);
    let h = ((img_h as f64 * ratio).round() as usize).min(img_h);
    let x0 = if w < img_w { rng.random_range(0..=img_w - w) } else { 0 };
    let y0 = if h < img_h { rng.random_range(0..=img_h - h) } else { 0 };
    RectMask {
        x0,
        y0,
        w,
        h,
        img_h,
        img_w,
    }
}

/// Paste the partner's patch into the image; the label weight on the
/// original equals the kept-pixel fraction of the realized mask exactly.
pub fn cutmix<F: Scalar>(
    x_i: &Array3<F>,
    y_i: F,
    x_j: &Array3<F>,
    y_j: F,
    mask: &RectMask,
) -> Result<MixedSample<F>> {
    check_shapes(x_i, x_j)?;
    let (h, w, _) = x_i.dim();
    if (mask.img_h, mask.img_w) != (h, w) {
        return Err(Error::ShapeMismatch(format!(
            "mask built for {}x{} applied to {h}x{w}",
            mask.img_h, mask.img_w
        )));
    }
    let mut image = x_i.clone();
    for y in mask.y0..mask.y0 + mask.h {
        for x in mask.x0..mask.x0 + mask.w {
            for c in 0..3 {
                image[[y, x, c]] = x_j[[y, x, c]];
            }
        }
    }
    let lambda_effective = F::cast(mask.kept_fraction());
    Ok(MixedSample {
        image,
        soft_label: lambda_effective * y_i + (F::one() - lambda_effective) * y_j,
        lambda_effective,
        method: MixMethod::Cutmix,
        partner_id: String::new(),
    })
}

/// Mix a whole batch: one method, one coefficient, and (for CutMix) one
/// patch per batch, with partners drawn from a random permutation of the
/// batch itself. Output order matches input order. With both alphas at 0
/// the input passes through bit-identically with hard labels.
pub fn augment_batch<F: Scalar>(
    batch: &[Sample<F>],
    mixup_alpha: f64,
    cutmix_alpha: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<MixedSample<F>>> {
    if mixup_alpha < 0.0 || cutmix_alpha < 0.0 {
        return Err(Error::Parameter("mixing alphas must be >= 0".into()));
    }
    if mixup_alpha == 0.0 && cutmix_alpha == 0.0 {
        return Ok(batch
            .iter()
            .map(|s| MixedSample {
                image: s.image.clone(),
                soft_label: s.label,
                lambda_effective: F::one(),
                method: MixMethod::None,
                partner_id: s.id.clone(),
            })
            .collect());
    }
    if batch.len() < 2 {
        return Err(Error::Config(format!(
            "augmentation needs a batch of at least 2 samples, got {}",
            batch.len()
        )));
    }

    let method = if mixup_alpha > 0.0 && cutmix_alpha > 0.0 {
        if rng.random_range(0..2u8) == 0 { MixMethod::Mixup } else { MixMethod::Cutmix }
    } else if mixup_alpha > 0.0 {
        MixMethod::Mixup
    } else {
        MixMethod::Cutmix
    };
    let alpha = match method {
        MixMethod::Mixup => mixup_alpha,
        MixMethod::Cutmix => cutmix_alpha,
        MixMethod::None => unreachable!(),
    };
    let lambda = sample_lambda(alpha, rng)?.lambda;

    let mut partners: Vec<usize> = (0..batch.len()).collect();
    partners.shuffle(rng);

    let (h, w, _) = batch[0].image.dim();
    let mask = match method {
        MixMethod::Cutmix => Some(make_rect_mask(lambda, h, w, rng)),
        _ => None,
    };

    batch
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let partner = &batch[partners[i]];
            let mut mixed = match method {
                MixMethod::Mixup => mixup(
                    &s.image,
                    s.label,
                    &partner.image,
                    partner.label,
                    F::cast(lambda),
                )?,
                MixMethod::Cutmix => cutmix(
                    &s.image,
                    s.label,
                    &partner.image,
                    partner.label,
                    mask.as_ref().expect("mask exists for cutmix"),
                )?,
                MixMethod::None => unreachable!(),
            };
            mixed.partner_id = partner.id.clone();
            Ok(mixed)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array3;
    use rand::SeedableRng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn constant_image(v: f64, size: usize) -> Array3<f64> {
        Array3::from_elem((size, size, 3), v)
    }

    fn sample(id: &str, v: f64, label: f64, size: usize) -> Sample<f64> {
        Sample {
            id: id.into(),
            image: constant_image(v, size),
            label,
        }
    }

    #[test]
    fn zero_alpha_forces_lambda_one() {
        let mut r = rng(0);
        for _ in 0..100 {
            assert_eq!(sample_lambda(0.0, &mut r).unwrap().lambda, 1.0);
        }
    }

    #[test]
    fn negative_alpha_is_a_parameter_error() {
        assert!(matches!(
            sample_lambda(-0.1, &mut rng(0)).unwrap_err(),
            Error::Parameter(_)
        ));
    }

    #[test]
    fn beta_draws_match_closed_form_moments() {
        // Beta(a, a) has mean 1/2 and variance 1/(4(2a+1)).
        let alpha = 0.25;
        let mut r = rng(7);
        let n = 10_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| sample_lambda(alpha, &mut r).unwrap().lambda)
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
        let expected_var = 1.0 / (4.0 * (2.0 * alpha + 1.0));
        assert!(
            (var - expected_var).abs() < 0.1 * expected_var,
            "var {var} vs {expected_var}"
        );
        assert!(draws.iter().all(|d| (0.0..=1.0).contains(d)));
    }

    #[test]
    fn mixup_identity_at_lambda_one() {
        let x_i = constant_image(0.3, 6);
        let x_j = constant_image(0.9, 6);
        let m = mixup(&x_i, 1.0, &x_j, 0.0, 1.0).unwrap();
        assert_eq!(m.image, x_i);
        assert_eq!(m.soft_label, 1.0);
    }

    #[test]
    fn mixup_matches_published_weighting_example() {
        // dark infected image mixed into a bright non-infected one at
        // lambda 0.2: pixels 0.8, infected weight 0.2
        let x_i = constant_image(0.0, 5);
        let x_j = constant_image(1.0, 5);
        let m = mixup(&x_i, 1.0, &x_j, 0.0, 0.2).unwrap();
        assert!(m.image.iter().all(|&v| (v - 0.8).abs() < 1e-12));
        assert!((m.soft_label - 0.2).abs() < 1e-12);
    }

    #[test]
    fn mixup_is_symmetric_under_swap() {
        let mut r = rng(3);
        let x_i: Array3<f64> = Array3::from_shape_fn((4, 4, 3), |_| r.random_range(0.0..1.0));
        let x_j: Array3<f64> = Array3::from_shape_fn((4, 4, 3), |_| r.random_range(0.0..1.0));
        let lambda = 0.3;
        let a = mixup(&x_i, 1.0, &x_j, 0.0, lambda).unwrap();
        let b = mixup(&x_j, 0.0, &x_i, 1.0, 1.0 - lambda).unwrap();
        for (u, v) in a.image.iter().zip(b.image.iter()) {
            assert!((u - v).abs() < 1e-12);
        }
        assert!((a.soft_label - b.soft_label).abs() < 1e-12);
    }

    #[test]
    fn mixup_shape_mismatch_errors() {
        let x_i = constant_image(0.1, 4);
        let x_j = constant_image(0.2, 5);
        assert!(matches!(
            mixup(&x_i, 1.0, &x_j, 0.0, 0.5).unwrap_err(),
            Error::ShapeMismatch(_)
        ));
    }

    #[test]
    fn mask_extremes() {
        let full = make_rect_mask(0.0, 32, 32, &mut rng(1));
        assert_eq!((full.w, full.h), (32, 32));
        assert_eq!(full.coverage(), 1.0);

        let empty = make_rect_mask(1.0, 32, 32, &mut rng(1));
        assert_eq!(empty.coverage(), 0.0);
    }

    #[test]
    fn mask_area_matches_lambda_within_rounding() {
        // lambda 0.75 on 224x224: patch area within one row/column of a
        // quarter of the image; oracle counts mask pixels explicitly.
        let mask = make_rect_mask(0.75, 224, 224, &mut rng(5));
        let mut count = 0usize;
        for y in 0..224 {
            for x in 0..224 {
                if mask.contains(y, x) {
                    count += 1;
                }
            }
        }
        assert_eq!(count, mask.w * mask.h);
        assert!(
            (count as f64 - 0.25 * 224.0 * 224.0).abs() <= 448.0,
            "patch pixels {count}"
        );
    }

    #[test]
    fn cutmix_zero_area_patch_is_identity() {
        let x_i = constant_image(0.4, 8);
        let x_j = constant_image(0.9, 8);
        let mask = make_rect_mask(1.0, 8, 8, &mut rng(2));
        let m = cutmix(&x_i, 1.0, &x_j, 0.0, &mask).unwrap();
        assert_eq!(m.image, x_i);
        assert_eq!(m.soft_label, 1.0);
        assert_eq!(m.lambda_effective, 1.0);
    }

    #[test]
    fn cutmix_full_patch_is_total_replacement() {
        let x_i = constant_image(0.4, 8);
        let x_j = constant_image(0.9, 8);
        let mask = make_rect_mask(0.0, 8, 8, &mut rng(2));
        let m = cutmix(&x_i, 1.0, &x_j, 0.0, &mask).unwrap();
        assert_eq!(m.image, x_j);
        assert_eq!(m.soft_label, 0.0);
        assert_eq!(m.lambda_effective, 0.0);
    }

    #[test]
    fn cutmix_label_weight_tracks_patch_area_exactly() {
        // 30% patch on black/white images: mean pixel value and infected
        // weight both equal the coverage
        let x_i = constant_image(0.0, 10);
        let x_j = constant_image(1.0, 10);
        let mask = RectMask {
            x0: 1,
            y0: 2,
            w: 6,
            h: 5,
            img_h: 10,
            img_w: 10,
        };
        assert_eq!(mask.coverage(), 0.30);
        let m = cutmix(&x_i, 0.0, &x_j, 1.0, &mask).unwrap();
        let mean: f64 = m.image.iter().sum::<f64>() / m.image.len() as f64;
        assert!((mean - 0.30).abs() < 1e-12);
        assert!((m.soft_label - 0.30).abs() < 1e-12);
    }

    #[test]
    fn batch_with_zero_alphas_passes_through() {
        let batch = vec![sample("a", 0.2, 1.0, 6), sample("b", 0.7, 0.0, 6)];
        let out = augment_batch(&batch, 0.0, 0.0, &mut rng(4)).unwrap();
        assert_eq!(out.len(), 2);
        for (mixed, original) in out.iter().zip(&batch) {
            assert_eq!(mixed.image, original.image);
            assert_eq!(mixed.soft_label, original.label);
            assert_eq!(mixed.method, MixMethod::None);
        }
    }

    #[test]
    fn batch_of_one_with_augmentation_is_a_config_error() {
        let batch = vec![sample("a", 0.2, 1.0, 6)];
        assert!(matches!(
            augment_batch(&batch, 0.25, 0.4, &mut rng(4)).unwrap_err(),
            Error::Config(_)
        ));
    }

    #[test]
    fn batch_augmentation_is_seeded() {
        let batch: Vec<Sample<f64>> = (0..6)
            .map(|i| sample(&format!("s{i}"), 0.1 * i as f64, (i % 2) as f64, 8))
            .collect();
        let a = augment_batch(&batch, 0.25, 0.4, &mut rng(9)).unwrap();
        let b = augment_batch(&batch, 0.25, 0.4, &mut rng(9)).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.image, y.image);
            assert_eq!(x.soft_label, y.soft_label);
            assert_eq!(x.partner_id, y.partner_id);
        }
    }

    #[test]
    fn label_mass_is_conserved() {
        // direct oracle on a constructed 2-cycle pairing
        let x_a = constant_image(0.2, 6);
        let x_b = constant_image(0.8, 6);
        let lambda = 0.3;
        let ab = mixup(&x_a, 1.0, &x_b, 0.0, lambda).unwrap();
        let ba = mixup(&x_b, 0.0, &x_a, 1.0, lambda).unwrap();
        assert!((ab.soft_label + ba.soft_label - 1.0).abs() < 1e-12);

        // batch-level: a single lambda per batch conserves total label mass
        // for any partner permutation
        let batch: Vec<Sample<f64>> = (0..8)
            .map(|i| sample(&format!("s{i}"), 0.1, (i % 2) as f64, 8))
            .collect();
        let input_mass: f64 = batch.iter().map(|s| s.label).sum();
        for seed in 0..5 {
            let out = augment_batch(&batch, 0.25, 0.0, &mut rng(seed)).unwrap();
            let mass: f64 = out.iter().map(|m| m.soft_label).sum();
            assert!((mass - input_mass).abs() < 1e-9, "seed {seed}: {mass}");
        }
    }
}
