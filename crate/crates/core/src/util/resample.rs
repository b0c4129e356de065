//! Bilinear resampling of 2-D maps.

use crate::Scalar;
use ndarray::Array2;

/// Bilinearly resize `map` to `(out_h, out_w)`.
///
/// Sample positions use the half-pixel convention
/// `src = (dst + 0.5) * in/out - 0.5`, clamped to the source grid, so an
/// identity resize reproduces the input exactly and constant maps stay
/// constant.
pub fn bilinear_resize<F: Scalar>(map: &Array2<F>, out_h: usize, out_w: usize) -> Array2<F> {
    let (in_h, in_w) = map.dim();
    assert!(in_h > 0 && in_w > 0 && out_h > 0 && out_w > 0);
    if (in_h, in_w) == (out_h, out_w) {
        return map.clone();
    }

    let scale_y = in_h as f64 / out_h as f64;
    let scale_x = in_w as f64 / out_w as f64;
    Array2::from_shape_fn((out_h, out_w), |(oy, ox)| {
        let sy = ((oy as f64 + 0.5) * scale_y - 0.5).clamp(0.0, (in_h - 1) as f64);
        let sx = ((ox as f64 + 0.5) * scale_x - 0.5).clamp(0.0, (in_w - 1) as f64);
        let y0 = sy.floor() as usize;
        let x0 = sx.floor() as usize;
        let y1 = (y0 + 1).min(in_h - 1);
        let x1 = (x0 + 1).min(in_w - 1);
        let fy = sy - y0 as f64;
        let fx = sx - x0 as f64;

        let v00 = map[[y0, x0]].as_f64();
        let v01 = map[[y0, x1]].as_f64();
        let v10 = map[[y1, x0]].as_f64();
        let v11 = map[[y1, x1]].as_f64();
        let top = v00 * (1.0 - fx) + v01 * fx;
        let bottom = v10 * (1.0 - fx) + v11 * fx;
        F::cast(top * (1.0 - fy) + bottom * fy)
    })
}
