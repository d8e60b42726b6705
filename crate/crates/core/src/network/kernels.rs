//! One-dimensional convolutions along the spectral axis.
//!
//! Activations are stored feature-major: `x[c * len + t]`. Weights are
//! `w[(o * in_features + c) * kernel_len + k]`. For every output element the
//! accumulation order is fixed (bias, then input features ascending, then
//! kernel taps ascending), so a given pixel always produces the same bits.

use crate::error::{Error, Result};
use crate::network::arch::{LayerGeom, LayerKind};
use crate::network::Real;

/// Range of input positions `s` whose scatter target `s * stride + k - pad`
/// falls inside `[0, out_len)`.
#[inline]
pub(crate) fn scatter_range(k: usize, stride: usize, pad: usize, in_len: usize, out_len: usize) -> (usize, usize) {
    let lo = if k >= pad { 0 } else { (pad - k).div_ceil(stride).min(in_len) };
    if out_len + pad <= k {
        return (0, 0);
    }
    let hi = ((out_len + pad - 1 - k) / stride + 1).min(in_len);
    (lo, hi.max(lo))
}

/// Range of output positions `t` whose source `t + k - pad` falls inside `[0, len)`.
/// Callers must not index the source when the range is empty.
#[inline]
pub(crate) fn gather_range(k: usize, pad: usize, len: usize) -> (usize, usize) {
    let lo = pad.saturating_sub(k).min(len);
    let hi = (len + pad).saturating_sub(k).min(len);
    (lo, hi.max(lo))
}

fn transposed_forward<T: Real>(g: &LayerGeom, x: &[T], w: &[T], b: &[T], y: &mut [T]) {
    let (cin, k, lin, lout) = (g.in_features, g.kernel_len, g.in_len, g.out_len);
    for o in 0..g.out_features {
        let yo = &mut y[o * lout..(o + 1) * lout];
        yo.fill(b[o]);
        for c in 0..cin {
            let xc = &x[c * lin..(c + 1) * lin];
            let wk = &w[(o * cin + c) * k..(o * cin + c + 1) * k];
            for (kk, &wv) in wk.iter().enumerate() {
                let (lo, hi) = scatter_range(kk, g.stride, g.pad, lin, lout);
                for s in lo..hi {
                    yo[s * g.stride + kk - g.pad] += wv * xc[s];
                }
            }
        }
    }
}

fn conv_forward<T: Real>(g: &LayerGeom, x: &[T], w: &[T], b: &[T], y: &mut [T]) {
    let (cin, k, len) = (g.in_features, g.kernel_len, g.in_len);
    for o in 0..g.out_features {
        let yo = &mut y[o * len..(o + 1) * len];
        yo.fill(b[o]);
        for c in 0..cin {
            let xc = &x[c * len..(c + 1) * len];
            let wk = &w[(o * cin + c) * k..(o * cin + c + 1) * k];
            for (kk, &wv) in wk.iter().enumerate() {
                let (lo, hi) = gather_range(kk, g.pad, len);
                if lo == hi {
                    continue;
                }
                let src = &xc[lo + kk - g.pad..hi + kk - g.pad];
                for (yv, &xv) in yo[lo..hi].iter_mut().zip(src) {
                    *yv += wv * xv;
                }
            }
        }
    }
}

fn infer_shape<T>(x: &[T], in_features: usize, w: &[T], b: &[T]) -> Result<(usize, usize, usize)> {
    if in_features == 0 || x.is_empty() || !x.len().is_multiple_of(in_features) {
        return Err(Error::dim(format!(
            "input of {} values is not divisible into {in_features} features",
            x.len()
        )));
    }
    let out_features = b.len();
    if out_features == 0 || !w.len().is_multiple_of(out_features * in_features) || w.is_empty() {
        return Err(Error::dim(format!(
            "{} weights do not form a {out_features} x {in_features} x k kernel",
            w.len()
        )));
    }
    Ok((x.len() / in_features, out_features, w.len() / (out_features * in_features)))
}

/// Spectral transposed convolution.
///
/// `y[o, t] = b[o] + sum over (c, s, k) with t = s * stride - pad + k of w[o, c, k] * x[c, s]`,
/// with output length `(L_in - 1) * stride - 2 * pad + kernel_len`. Returns the
/// output in feature-major order.
pub fn spectral_transposed_conv<T: Real>(
    x: &[T],
    in_features: usize,
    weights: &[T],
    biases: &[T],
    stride: usize,
    pad: usize,
) -> Result<Vec<T>> {
    let (in_len, out_features, kernel_len) = infer_shape(x, in_features, weights, biases)?;
    if stride == 0 {
        return Err(Error::dim("stride must be positive"));
    }
    let out_len = (in_len as isize - 1) * stride as isize - 2 * pad as isize + kernel_len as isize;
    if out_len < 1 {
        return Err(Error::dim(format!("output length would be {out_len}")));
    }
    let g = LayerGeom {
        kind: LayerKind::Transposed,
        in_features,
        out_features,
        kernel_len,
        stride,
        pad,
        in_len,
        out_len: out_len as usize,
        relu: false,
    };
    let mut y = vec![T::zero(); g.output_size()];
    transposed_forward(&g, x, weights, biases, &mut y);
    Ok(y)
}

/// Stride-1 zero-padded spectral convolution (cross-correlation) that preserves length.
///
/// `y[o, t] = b[o] + sum_{c, k} w[o, c, k] * x[c, t + k - pad]`. The kernel length
/// must be odd and `pad = (kernel_len - 1) / 2`.
pub fn spectral_conv<T: Real>(
    x: &[T],
    in_features: usize,
    weights: &[T],
    biases: &[T],
    pad: usize,
) -> Result<Vec<T>> {
    let (len, out_features, kernel_len) = infer_shape(x, in_features, weights, biases)?;
    if kernel_len % 2 == 0 {
        return Err(Error::Spec(format!("kernel length {kernel_len} is even")));
    }
    if pad != (kernel_len - 1) / 2 {
        return Err(Error::Spec(format!(
            "pad {pad} does not preserve length for kernel {kernel_len}"
        )));
    }
    let g = LayerGeom {
        kind: LayerKind::Conv,
        in_features,
        out_features,
        kernel_len,
        stride: 1,
        pad,
        in_len: len,
        out_len: len,
        relu: false,
    };
    let mut y = vec![T::zero(); g.output_size()];
    conv_forward(&g, x, weights, biases, &mut y);
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transposed_worked_example() {
        let y = spectral_transposed_conv(&[1.0f64, 0.0, 0.0], 1, &[1.0, 2.0, 3.0, 4.0], &[0.0], 2, 1)
            .unwrap();
        assert_eq!(y, vec![2.0, 3.0, 4.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn transposed_zero_input() {
        let y = spectral_transposed_conv(&[0.0f64; 6], 2, &[0.5; 2 * 2 * 4], &[0.0; 2], 2, 1).unwrap();
        assert_eq!(y.len(), 2 * 6);
        assert!(y.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn conv_delta_kernel_is_identity() {
        let x = [0.3f64, -1.0, 2.5, 4.0];
        assert_eq!(spectral_conv(&x, 1, &[0.0, 1.0, 0.0], &[0.0], 1).unwrap(), x.to_vec());
    }

    #[test]
    fn conv_box_kernel_boundaries() {
        let y = spectral_conv(&[1.0f64; 5], 1, &[1.0, 1.0, 1.0], &[0.0], 1).unwrap();
        assert_eq!(y, vec![2.0, 3.0, 3.0, 3.0, 2.0]);
    }

    #[test]
    fn conv_even_kernel_rejected() {
        assert!(matches!(
            spectral_conv(&[1.0f64; 5], 1, &[1.0; 4], &[0.0], 1),
            Err(Error::Spec(_))
        ));
    }

    #[test]
    fn shape_mismatch_rejected() {
        assert!(spectral_conv(&[1.0f64; 5], 2, &[1.0; 3], &[0.0], 1).is_err());
        assert!(spectral_transposed_conv(&[1.0f64; 4], 2, &[1.0; 7], &[0.0], 2, 1).is_err());
    }

    #[test]
    fn kernel_wider_than_signal() {
        let y = spectral_conv(&[2.0f64], 1, &[1.0, 1.0, 3.0, 1.0, 1.0], &[0.5], 2).unwrap();
        assert_eq!(y, vec![6.5]);
        let (lo, hi) = gather_range(0, 2, 1);
        assert!(lo <= hi && hi <= 1);
    }

    #[test]
    fn ranges_cover_exactly_the_valid_targets() {
        for stride in 1..4 {
            for pad in 0..4 {
                for k in 0..6 {
                    for in_len in 1..6 {
                        let out_len = ((in_len as isize - 1) * stride as isize - 2 * pad as isize
                            + 6) as usize;
                        let (lo, hi) = scatter_range(k, stride, pad, in_len, out_len);
                        for s in 0..in_len {
                            let t = (s * stride + k) as isize - pad as isize;
                            let valid = t >= 0 && (t as usize) < out_len;
                            assert_eq!(valid, (lo..hi).contains(&s), "s={s} k={k} stride={stride} pad={pad}");
                        }
                    }
                }
            }
        }
    }
}
