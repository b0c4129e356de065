//! Synthetic two-class image data for tests, demos, and the desk-scale
//! training checks: `infected` frames are bright, `notinfected` frames are
//! dark, so the classes are separable by mean intensity.

use crate::dataset::{Label, Sample};
use crate::error::{Error, Result};
use crate::Scalar;
use ndarray::Array3;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::Path;

const BRIGHT_MEAN: f64 = 0.72;
const DARK_MEAN: f64 = 0.28;

fn synth_image<F: Scalar>(rng: &mut ChaCha8Rng, size: usize, base: f64) -> Array3<F> {
    let offset: f64 = rng.random_range(-0.05..0.05);
    Array3::from_shape_fn((size, size, 3), |(y, x, c)| {
        let noise: f64 = if c == 0 { rng.random_range(-0.08..0.08) } else { 0.0 };
        // light vertical shading so the frames are not flat
        let shade = 0.03 * (y as f64 / size as f64 - 0.5);
        let _ = x;
        F::cast((base + offset + noise + shade).clamp(0.0, 1.0))
    })
}

fn fill_channels<F: Scalar>(img: &mut Array3<F>) {
    let (h, w, _) = img.dim();
    for y in 0..h {
        for x in 0..w {
            let v = img[[y, x, 0]];
            img[[y, x, 1]] = v;
            img[[y, x, 2]] = v;
        }
    }
}

/// Generate `n` samples (alternating classes), `size x size x 3`, seeded.
pub fn separable_samples<F: Scalar>(n: usize, size: usize, seed: u64) -> Vec<Sample<F>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let label = if i % 2 == 0 { Label::Infected } else { Label::Notinfected };
            let base = match label {
                Label::Infected => BRIGHT_MEAN,
                Label::Notinfected => DARK_MEAN,
            };
            let mut image = synth_image::<F>(&mut rng, size, base);
            fill_channels(&mut image);
            Sample {
                id: format!("syn-{}-{i:04}", label.as_str()),
                image,
                label: label.as_scalar(),
            }
        })
        .collect()
}

/// Write a toy on-disk dataset in the expected two-directory layout:
/// `<root>/infected/*.png` and `<root>/notinfected/*.png`.
pub fn write_image_dataset(root: &Path, n_per_class: usize, size: usize, seed: u64) -> Result<()> {
    let samples = separable_samples::<f32>(2 * n_per_class, size, seed);
    for (i, sample) in samples.iter().enumerate() {
        let label = if sample.label > 0.5 { Label::Infected } else { Label::Notinfected };
        let dir = root.join(label.as_str());
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let mut img = image::RgbImage::new(size as u32, size as u32);
        for y in 0..size {
            for x in 0..size {
                let v = (sample.image[[y, x, 0]].clamp(0.0, 1.0) * 255.0).round() as u8;
                img.put_pixel(x as u32, y as u32, image::Rgb([v, v, v]));
            }
        }
        let path = dir.join(format!("frame{i:04}.png"));
        img.save(&path).map_err(|e| Error::Decode {
            path: path.clone(),
            source: e,
        })?;
    }
    Ok(())
}
