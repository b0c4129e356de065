//! Tensor operations with explicit forward and backward passes.
//!
//! Activations are `(height, width, channels)`; convolution weights are
//! stored pre-flattened as `(kh * kw * cin, cout)` so the im2col product is
//! a single matrix multiply.

use crate::Scalar;
use ndarray::{Array1, Array2, Array3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ConvShape {
    pub kh: usize,
    pub kw: usize,
    pub cin: usize,
    pub cout: usize,
    pub stride: usize,
    pub pad: usize,
}

impl ConvShape {
    pub fn out_dims(&self, h: usize, w: usize) -> (usize, usize) {
        (
            (h + 2 * self.pad - self.kh) / self.stride + 1,
            (w + 2 * self.pad - self.kw) / self.stride + 1,
        )
    }
}

/// Unfold padded windows into a `(oh * ow, kh * kw * cin)` matrix.
fn im2col<F: Scalar>(x: &Array3<F>, s: &ConvShape) -> Array2<F> {
    let (h, w, cin) = x.dim();
    debug_assert_eq!(cin, s.cin);
    let (oh, ow) = s.out_dims(h, w);
    let mut patches = Array2::<F>::zeros((oh * ow, s.kh * s.kw * cin));
    for oy in 0..oh {
        for ox in 0..ow {
            let row = oy * ow + ox;
            for ky in 0..s.kh {
                let iy = (oy * s.stride + ky) as isize - s.pad as isize;
                if iy < 0 || iy >= h as isize {
                    continue;
                }
                for kx in 0..s.kw {
                    let ix = (ox * s.stride + kx) as isize - s.pad as isize;
                    if ix < 0 || ix >= w as isize {
                        continue;
                    }
                    let col0 = (ky * s.kw + kx) * cin;
                    for c in 0..cin {
                        patches[[row, col0 + c]] = x[[iy as usize, ix as usize, c]];
                    }
                }
            }
        }
    }
    patches
}

/// Fold a `(oh * ow, kh * kw * cin)` gradient back onto the input, summing
/// overlapping windows.
fn col2im_accumulate<F: Scalar>(
    d_patches: &Array2<F>,
    s: &ConvShape,
    h: usize,
    w: usize,
) -> Array3<F> {
    let (oh, ow) = s.out_dims(h, w);
    let mut dx = Array3::<F>::zeros((h, w, s.cin));
    for oy in 0..oh {
        for ox in 0..ow {
            let row = oy * ow + ox;
            for ky in 0..s.kh {
                let iy = (oy * s.stride + ky) as isize - s.pad as isize;
                if iy < 0 || iy >= h as isize {
                    continue;
                }
                for kx in 0..s.kw {
                    let ix = (ox * s.stride + kx) as isize - s.pad as isize;
                    if ix < 0 || ix >= w as isize {
                        continue;
                    }
                    let col0 = (ky * s.kw + kx) * s.cin;
                    for c in 0..s.cin {
                        dx[[iy as usize, ix as usize, c]] += d_patches[[row, col0 + c]];
                    }
                }
            }
        }
    }
    dx
}

pub fn conv_forward<F: Scalar>(
    x: &Array3<F>,
    w: &Array2<F>,
    b: &Array1<F>,
    s: &ConvShape,
) -> Array3<F> {
    let (h, width, _) = x.dim();
    let (oh, ow) = s.out_dims(h, width);
    let patches = im2col(x, s);
    let mut out = patches.dot(w);
    for mut row in out.rows_mut() {
        row += b;
    }
    out.into_shape_with_order((oh, ow, s.cout))
        .expect("conv output reshapes")
}

pub struct ConvGrads<F> {
    pub dx: Array3<F>,
    pub dw: Array2<F>,
    pub db: Array1<F>,
}

pub fn conv_backward<F: Scalar>(
    x: &Array3<F>,
    w: &Array2<F>,
    s: &ConvShape,
    d_out: &Array3<F>,
) -> ConvGrads<F> {
    let (h, width, _) = x.dim();
    let (oh, ow) = s.out_dims(h, width);
    let d_mat = d_out
        .to_owned()
        .into_shape_with_order((oh * ow, s.cout))
        .expect("conv grad reshapes");
    let patches = im2col(x, s);
    let dw = patches.t().dot(&d_mat);
    let db = d_mat.sum_axis(ndarray::Axis(0));
    let d_patches = d_mat.dot(&w.t());
    let dx = col2im_accumulate(&d_patches, s, h, width);
    ConvGrads { dx, dw, db }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PoolShape {
    pub k: usize,
    pub stride: usize,
    pub pad: usize,
}

impl PoolShape {
    pub fn out_dims(&self, h: usize, w: usize) -> (usize, usize) {
        (
            (h + 2 * self.pad - self.k) / self.stride + 1,
            (w + 2 * self.pad - self.k) / self.stride + 1,
        )
    }
}

/// Max pooling; returns the output and the flat input index of each maximum
/// for the backward pass.
pub fn maxpool_forward<F: Scalar>(x: &Array3<F>, s: &PoolShape) -> (Array3<F>, Vec<u32>) {
    let (h, w, c) = x.dim();
    let (oh, ow) = s.out_dims(h, w);
    let mut out = Array3::<F>::zeros((oh, ow, c));
    let mut argmax = vec![0u32; oh * ow * c];
    for oy in 0..oh {
        for ox in 0..ow {
            for ch in 0..c {
                let mut best = F::neg_infinity();
                let mut best_idx = 0u32;
                for ky in 0..s.k {
                    let iy = (oy * s.stride + ky) as isize - s.pad as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    for kx in 0..s.k {
                        let ix = (ox * s.stride + kx) as isize - s.pad as isize;
                        if ix < 0 || ix >= w as isize {
                            continue;
                        }
                        let v = x[[iy as usize, ix as usize, ch]];
                        if v > best {
                            best = v;
                            best_idx = ((iy as usize * w + ix as usize) * c + ch) as u32;
                        }
                    }
                }
                out[[oy, ox, ch]] = best;
                argmax[(oy * ow + ox) * c + ch] = best_idx;
            }
        }
    }
    (out, argmax)
}

pub fn maxpool_backward<F: Scalar>(
    d_out: &Array3<F>,
    argmax: &[u32],
    in_dims: (usize, usize, usize),
) -> Array3<F> {
    let mut dx = Array3::<F>::zeros(in_dims);
    let flat = dx.as_slice_mut().expect("standard layout");
    for (i, &d) in d_out.iter().enumerate() {
        flat[argmax[i] as usize] += d;
    }
    dx
}

/// Average pooling; the divisor is always `k * k` (padding cells count as
/// zeros).
pub fn avgpool_forward<F: Scalar>(x: &Array3<F>, s: &PoolShape) -> Array3<F> {
    let (h, w, c) = x.dim();
    let (oh, ow) = s.out_dims(h, w);
    let denom = F::cast((s.k * s.k) as f64);
    let mut out = Array3::<F>::zeros((oh, ow, c));
    for oy in 0..oh {
        for ox in 0..ow {
            for ch in 0..c {
                let mut acc = F::zero();
                for ky in 0..s.k {
                    let iy = (oy * s.stride + ky) as isize - s.pad as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    for kx in 0..s.k {
                        let ix = (ox * s.stride + kx) as isize - s.pad as isize;
                        if ix < 0 || ix >= w as isize {
                            continue;
                        }
                        acc += x[[iy as usize, ix as usize, ch]];
                    }
                }
                out[[oy, ox, ch]] = acc / denom;
            }
        }
    }
    out
}

pub fn avgpool_backward<F: Scalar>(
    d_out: &Array3<F>,
    s: &PoolShape,
    in_dims: (usize, usize, usize),
) -> Array3<F> {
    let (h, w, _c) = in_dims;
    let (oh, ow) = s.out_dims(h, w);
    let denom = F::cast((s.k * s.k) as f64);
    let mut dx = Array3::<F>::zeros(in_dims);
    for oy in 0..oh {
        for ox in 0..ow {
            for ch in 0.._c {
                let d = d_out[[oy, ox, ch]] / denom;
                for ky in 0..s.k {
                    let iy = (oy * s.stride + ky) as isize - s.pad as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    for kx in 0..s.k {
                        let ix = (ox * s.stride + kx) as isize - s.pad as isize;
                        if ix < 0 || ix >= w as isize {
                            continue;
                        }
                        dx[[iy as usize, ix as usize, ch]] += d;
                    }
                }
            }
        }
    }
    dx
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn conv_identity_kernel_passes_through() {
        let x = Array3::from_shape_fn((4, 4, 1), |(y, x, _)| (y * 4 + x) as f64);
        let s = ConvShape { kh: 1, kw: 1, cin: 1, cout: 1, stride: 1, pad: 0 };
        let w = array![[1.0]];
        let b = array![0.0];
        let out = conv_forward(&x, &w, &b, &s);
        assert_eq!(out, x);
    }

    #[test]
    fn conv_matches_hand_computed_3x3() {
        // 3x3 all-ones kernel over a 3x3 image of ones, no padding: the
        // single output equals 9 plus bias.
        let x = Array3::from_elem((3, 3, 1), 1.0f64);
        let s = ConvShape { kh: 3, kw: 3, cin: 1, cout: 1, stride: 1, pad: 0 };
        let w = Array2::from_elem((9, 1), 1.0);
        let b = array![0.5];
        let out = conv_forward(&x, &w, &b, &s);
        assert_eq!(out.dim(), (1, 1, 1));
        assert!((out[[0, 0, 0]] - 9.5).abs() < 1e-12);
    }

    #[test]
    fn conv_padding_and_stride_shapes() {
        let x = Array3::<f64>::zeros((8, 8, 3));
        let s = ConvShape { kh: 3, kw: 3, cin: 3, cout: 5, stride: 2, pad: 1 };
        let w = Array2::zeros((27, 5));
        let b = Array1::zeros(5);
        let out = conv_forward(&x, &w, &b, &s);
        assert_eq!(out.dim(), (4, 4, 5));
    }

    #[test]
    fn conv_backward_matches_finite_differences() {
        let mut x = Array3::from_shape_fn((5, 5, 2), |(y, x, c)| {
            ((y * 5 + x) as f64 * 0.07 - c as f64 * 0.3).sin()
        });
        let s = ConvShape { kh: 3, kw: 3, cin: 2, cout: 3, stride: 2, pad: 1 };
        let mut w = Array2::from_shape_fn((18, 3), |(i, j)| ((i * 3 + j) as f64 * 0.11).cos() * 0.2);
        let b = Array1::from_shape_fn(3, |i| i as f64 * 0.05);

        // scalar objective: sum of outputs
        let objective = |x: &Array3<f64>, w: &Array2<f64>| conv_forward(x, w, &b, &s).sum();
        let (oh, ow) = s.out_dims(5, 5);
        let d_out = Array3::from_elem((oh, ow, 3), 1.0);
        let grads = conv_backward(&x, &w, &s, &d_out);

        let h = 1e-6;
        for idx in [(0usize, 0usize), (2, 1), (4, 3)] {
            let orig = x[[idx.0, idx.1, 1]];
            x[[idx.0, idx.1, 1]] = orig + h;
            let up = objective(&x, &w);
            x[[idx.0, idx.1, 1]] = orig - h;
            let down = objective(&x, &w);
            x[[idx.0, idx.1, 1]] = orig;
            let fd = (up - down) / (2.0 * h);
            assert!((grads.dx[[idx.0, idx.1, 1]] - fd).abs() < 1e-6, "dx at {idx:?}");
        }
        for idx in [(0usize, 0usize), (9, 2), (17, 1)] {
            let orig = w[[idx.0, idx.1]];
            w[[idx.0, idx.1]] = orig + h;
            let up = objective(&x, &w);
            w[[idx.0, idx.1]] = orig - h;
            let down = objective(&x, &w);
            w[[idx.0, idx.1]] = orig;
            let fd = (up - down) / (2.0 * h);
            assert!((grads.dw[[idx.0, idx.1]] - fd).abs() < 1e-6, "dw at {idx:?}");
        }
    }

    #[test]
    fn maxpool_selects_maximum_and_routes_gradient() {
        let x = array![
            [[1.0f64], [5.0], [2.0], [0.0]],
            [[3.0], [4.0], [1.0], [7.0]],
            [[0.0], [2.0], [9.0], [1.0]],
            [[1.0], [0.0], [3.0], [2.0]],
        ];
        let s = PoolShape { k: 2, stride: 2, pad: 0 };
        let (out, argmax) = maxpool_forward(&x, &s);
        assert_eq!(out[[0, 0, 0]], 5.0);
        assert_eq!(out[[0, 1, 0]], 7.0);
        assert_eq!(out[[1, 0, 0]], 2.0);
        assert_eq!(out[[1, 1, 0]], 9.0);

        let d_out = Array3::from_elem((2, 2, 1), 1.0);
        let dx = maxpool_backward(&d_out, &argmax, (4, 4, 1));
        assert_eq!(dx[[0, 1, 0]], 1.0); // the 5
        assert_eq!(dx[[1, 3, 0]], 1.0); // the 7
        assert_eq!(dx[[2, 1, 0]], 1.0); // the 2
        assert_eq!(dx[[2, 2, 0]], 1.0); // the 9
        assert_eq!(dx.sum(), 4.0);
    }

    #[test]
    fn maxpool_with_padding_ignores_border() {
        let x = Array3::from_elem((2, 2, 1), -1.0f64);
        let s = PoolShape { k: 3, stride: 2, pad: 1 };
        let (out, _) = maxpool_forward(&x, &s);
        assert_eq!(out.dim(), (1, 1, 1));
        assert_eq!(out[[0, 0, 0]], -1.0);
    }

    #[test]
    fn avgpool_means_windows_and_spreads_gradient() {
        let x = array![
            [[2.0f64], [4.0]],
            [[6.0], [8.0]],
        ];
        let s = PoolShape { k: 2, stride: 2, pad: 0 };
        let out = avgpool_forward(&x, &s);
        assert_eq!(out[[0, 0, 0]], 5.0);

        let d_out = Array3::from_elem((1, 1, 1), 4.0f64);
        let dx = avgpool_backward(&d_out, &s, (2, 2, 1));
        assert!(dx.iter().all(|&v| (v - 1.0).abs() < 1e-12));
    }
}
