//! Layers evaluated on a block of pixels at once, as matrix products.
//!
//! A block of `n` pixels stores each feature as one row of `n * len` values
//! (pixel-major within the row). Every output element is computed by the same
//! sequence of operations whatever `n` is, so a pixel gets the same bits alone
//! or inside any block.

use crate::network::arch::{LayerGeom, LayerKind};
use crate::network::kernels::{gather_range, scatter_range};
use crate::network::Real;

/// Offset and row/column strides of a matrix inside a slice.
#[derive(Debug, Clone, Copy)]
struct View {
    offset: usize,
    rs: usize,
    cs: usize,
}

impl View {
    fn rows(rs: usize) -> Self {
        Self { offset: 0, rs, cs: 1 }
    }

    fn last(&self, rows: usize, cols: usize) -> usize {
        self.offset + (rows - 1) * self.rs + (cols - 1) * self.cs
    }
}

/// `C <- A B + beta C` with `A: m x k`, `B: k x n`, `C: m x n`.
#[allow(clippy::too_many_arguments)]
fn gemm<T: Real>(m: usize, k: usize, n: usize, a: &[T], av: View, b: &[T], bv: View, beta: T, c: &mut [T], cv: View) {
    if m == 0 || n == 0 {
        return;
    }
    assert!(cv.last(m, n) < c.len(), "gemm output out of bounds");
    if k > 0 {
        assert!(av.last(m, k) < a.len() && bv.last(k, n) < b.len(), "gemm input out of bounds");
    }
    // SAFETY: bounds checked above; `c` is a unique borrow so it cannot alias `a` or `b`.
    unsafe {
        T::gemm_raw(
            m,
            k,
            n,
            a.as_ptr().add(av.offset),
            av.rs as isize,
            av.cs as isize,
            b.as_ptr().add(bv.offset),
            bv.rs as isize,
            bv.cs as isize,
            beta,
            c.as_mut_ptr().add(cv.offset),
            cv.rs as isize,
            cv.cs as isize,
        )
    }
}

/// Scratch needed by one layer: `cin * kernel_len * len` for convolutions,
/// `out_features * in_len` for transposed convolutions, per pixel.
pub(crate) fn scratch_per_pixel(g: &LayerGeom) -> usize {
    match g.kind {
        LayerKind::Conv => g.in_features * g.kernel_len * g.in_len,
        LayerKind::Transposed => g.out_features * g.in_len,
    }
}

/// Rows `(c, k)` hold input feature `c` shifted by `k - pad`, zero-filled at the edges.
fn im2col<T: Real>(g: &LayerGeom, n: usize, x: &[T], cols: &mut [T]) {
    let (len, k) = (g.in_len, g.kernel_len);
    let nl = n * len;
    for c in 0..g.in_features {
        let xc = &x[c * nl..(c + 1) * nl];
        for kk in 0..k {
            let (lo, hi) = gather_range(kk, g.pad, len);
            let row = &mut cols[(c * k + kk) * nl..(c * k + kk + 1) * nl];
            if lo == hi {
                row.fill(T::zero());
                continue;
            }
            for (dst, src) in row.chunks_exact_mut(len).zip(xc.chunks_exact(len)) {
                dst[..lo].fill(T::zero());
                dst[lo..hi].copy_from_slice(&src[lo + kk - g.pad..hi + kk - g.pad]);
                dst[hi..].fill(T::zero());
            }
        }
    }
}

fn relu<T: Real>(y: &mut [T]) {
    for v in y {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
}

/// Forward pass of one layer (including its activation) for `n` pixels.
pub(crate) fn forward<T: Real>(g: &LayerGeom, n: usize, x: &[T], w: &[T], b: &[T], y: &mut [T], scratch: &mut [T]) {
    let (cin, cout, k) = (g.in_features, g.out_features, g.kernel_len);
    let (nin, nout) = (n * g.in_len, n * g.out_len);
    for (o, row) in y.chunks_exact_mut(nout).enumerate() {
        row.fill(b[o]);
    }
    match g.kind {
        LayerKind::Conv => {
            let cols = &mut scratch[..cin * k * nin];
            im2col(g, n, x, cols);
            gemm(cout, cin * k, nin, w, View::rows(cin * k), cols, View::rows(nin), T::one(), y, View::rows(nout));
        }
        LayerKind::Transposed => {
            let z = &mut scratch[..cout * nin];
            for kk in 0..k {
                let wk = View { offset: kk, rs: cin * k, cs: k };
                gemm(cout, cin, nin, w, wk, x, View::rows(nin), T::zero(), z, View::rows(nin));
                let (lo, hi) = scatter_range(kk, g.stride, g.pad, g.in_len, g.out_len);
                for (yo, zo) in y.chunks_exact_mut(nout).zip(z.chunks_exact(nin)) {
                    for (yp, zp) in yo.chunks_exact_mut(g.out_len).zip(zo.chunks_exact(g.in_len)) {
                        for s in lo..hi {
                            yp[s * g.stride + kk - g.pad] += zp[s];
                        }
                    }
                }
            }
        }
    }
    if g.relu {
        relu(y);
    }
}

/// Backward pass of one layer for `n` pixels. `dy` is the gradient with
/// respect to the pre-activation output. Parameter gradients are accumulated
/// into `dw`/`db`; `dx`, when given, is overwritten with the input gradient.
#[allow(clippy::too_many_arguments)]
pub(crate) fn backward<T: Real>(
    g: &LayerGeom,
    n: usize,
    x: &[T],
    w: &[T],
    dy: &[T],
    dw: &mut [T],
    db: &mut [T],
    dx: Option<&mut [T]>,
    scratch: &mut [T],
    dscratch: &mut [T],
) {
    let (cin, cout, k) = (g.in_features, g.out_features, g.kernel_len);
    let (nin, nout) = (n * g.in_len, n * g.out_len);
    for (o, row) in dy.chunks_exact(nout).enumerate() {
        let mut s = T::zero();
        for &v in row {
            s += v;
        }
        db[o] += s;
    }
    match g.kind {
        LayerKind::Conv => {
            let ck = cin * k;
            let cols = &mut scratch[..ck * nin];
            im2col(g, n, x, cols);
            // dW += dY cols^T
            gemm(cout, nin, ck, dy, View::rows(nout), cols, View { offset: 0, rs: 1, cs: nin }, T::one(), dw, View::rows(ck));
            if let Some(dx) = dx {
                let dcols = &mut dscratch[..ck * nin];
                gemm(ck, cout, nin, w, View { offset: 0, rs: 1, cs: ck }, dy, View::rows(nout), T::zero(), dcols, View::rows(nin));
                dx.fill(T::zero());
                let len = g.in_len;
                for c in 0..cin {
                    let dxc = &mut dx[c * nin..(c + 1) * nin];
                    for kk in 0..k {
                        let (lo, hi) = gather_range(kk, g.pad, len);
                        let row = &dcols[(c * k + kk) * nin..(c * k + kk + 1) * nin];
                        for (dst, src) in dxc.chunks_exact_mut(len).zip(row.chunks_exact(len)) {
                            for t in lo..hi {
                                dst[t + kk - g.pad] += src[t];
                            }
                        }
                    }
                }
            }
        }
        LayerKind::Transposed => {
            let dz = &mut scratch[..cout * nin];
            let mut dx = dx;
            if let Some(dx) = dx.as_deref_mut() {
                dx.fill(T::zero());
            }
            for kk in 0..k {
                let (lo, hi) = scatter_range(kk, g.stride, g.pad, g.in_len, g.out_len);
                for (dzo, dyo) in dz.chunks_exact_mut(nin).zip(dy.chunks_exact(nout)) {
                    for (zp, yp) in dzo.chunks_exact_mut(g.in_len).zip(dyo.chunks_exact(g.out_len)) {
                        zp[..lo].fill(T::zero());
                        for s in lo..hi {
                            zp[s] = yp[s * g.stride + kk - g.pad];
                        }
                        zp[hi..].fill(T::zero());
                    }
                }
                let wk = View { offset: kk, rs: cin * k, cs: k };
                gemm(cout, nin, cin, dz, View::rows(nin), x, View { offset: 0, rs: 1, cs: nin }, T::one(), dw, wk);
                if let Some(dx) = dx.as_deref_mut() {
                    let wkt = View { offset: kk, rs: k, cs: cin * k };
                    gemm(cin, cout, nin, w, wkt, dz, View::rows(nin), T::one(), dx, View::rows(nin));
                }
            }
        }
    }
}
