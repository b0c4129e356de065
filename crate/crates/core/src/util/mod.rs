//! Shared low-level helpers: bitmap font, chart rendering, small linear
//! solves, and resampling.

pub mod font;
pub mod linalg;
pub mod plot;
pub mod resample;

use crate::error::{Error, Result};
use crate::Scalar;
use ndarray::Array3;
use std::path::Path;

/// Hex digest helper used for config hashing and run-directory naming.
pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}

/// Render an H x W x 3 tensor in [0, 1] as an 8-bit RGB image.
pub fn tensor_to_rgb<F: Scalar>(tensor: &Array3<F>) -> image::RgbImage {
    let (h, w, _) = tensor.dim();
    let mut img = image::RgbImage::new(w as u32, h as u32);
    for y in 0..h {
        for x in 0..w {
            let px = [0, 1, 2].map(|c| {
                (tensor[[y, x, c]].as_f64().clamp(0.0, 1.0) * 255.0).round() as u8
            });
            img.put_pixel(x as u32, y as u32, image::Rgb(px));
        }
    }
    img
}

/// Write an RGB image as PNG, mapping failures to the crate error type.
pub fn save_png(img: &image::RgbImage, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => Error::Decode {
                path: path.to_path_buf(),
                source: other,
            },
        })
}
