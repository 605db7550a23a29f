//! Row-major dense kernels on top of `matrixmultiply::dgemm`.

/// A strided view of a row-major matrix (or a column block of one).
#[derive(Clone, Copy)]
pub(crate) struct MatRef<'a> {
    pub data: &'a [f64],
    pub rows: usize,
    pub cols: usize,
    /// Distance between consecutive rows.
    pub stride: usize,
}

impl<'a> MatRef<'a> {
    pub fn new(data: &'a [f64], rows: usize, cols: usize) -> Self {
        debug_assert!(data.len() >= rows * cols);
        Self {
            data,
            rows,
            cols,
            stride: cols,
        }
    }

    /// Columns `[start, start + width)` of every row.
    pub fn col_block(data: &'a [f64], rows: usize, stride: usize, start: usize, width: usize) -> Self {
        debug_assert!(rows == 0 || data.len() >= (rows - 1) * stride + start + width);
        Self {
            data: &data[start.min(data.len())..],
            rows,
            cols: width,
            stride,
        }
    }
}

/// `out[b][o] (+)= sum_i x[b][i] * w[o][i]`, i.e. `out = x * w^T`.
/// `out` rows are written at stride `out_stride` starting at column 0.
pub(crate) fn matmul_xwt(x: MatRef<'_>, w: MatRef<'_>, out: &mut [f64], out_stride: usize, accumulate: bool) {
    assert_eq!(x.cols, w.cols);
    let (m, k, n) = (x.rows, x.cols, w.rows);
    if m == 0 || n == 0 {
        return;
    }
    assert!(out.len() >= (m - 1) * out_stride + n);
    if k == 0 {
        if !accumulate {
            for r in 0..m {
                out[r * out_stride..r * out_stride + n].fill(0.0);
            }
        }
        return;
    }
    if m == 1 {
        let xr = &x.data[..k];
        for (o, slot) in out[..n].iter_mut().enumerate() {
            let d = dot(xr, &w.data[o * w.stride..o * w.stride + k]);
            *slot = if accumulate { *slot + d } else { d };
        }
        return;
    }
    let beta = if accumulate { 1.0 } else { 0.0 };
    // SAFETY: bounds asserted above; strides describe in-bounds elements.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            x.data.as_ptr(),
            x.stride as isize,
            1,
            w.data.as_ptr(),
            1,
            w.stride as isize,
            beta,
            out.as_mut_ptr(),
            out_stride as isize,
            1,
        );
    }
}

/// `out (+)= dy * w` where `dy` is `m x n` and `w` is `n x k`.
pub(crate) fn matmul_dyw(dy: MatRef<'_>, w: MatRef<'_>, out: &mut [f64], out_stride: usize, accumulate: bool) {
    assert_eq!(dy.cols, w.rows);
    let (m, k, n) = (dy.rows, dy.cols, w.cols);
    if m == 0 || n == 0 || k == 0 {
        return;
    }
    assert!(out.len() >= (m - 1) * out_stride + n);
    let beta = if accumulate { 1.0 } else { 0.0 };
    // SAFETY: as above.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            dy.data.as_ptr(),
            dy.stride as isize,
            1,
            w.data.as_ptr(),
            w.stride as isize,
            1,
            beta,
            out.as_mut_ptr(),
            out_stride as isize,
            1,
        );
    }
}

/// `dw += dy^T * x` where `dy` is `b x o` and `x` is `b x i`; `dw` is `o x i`.
pub(crate) fn accumulate_dw(dy: MatRef<'_>, x: MatRef<'_>, dw: &mut [f64]) {
    assert_eq!(dy.rows, x.rows);
    let (m, k, n) = (dy.cols, dy.rows, x.cols);
    if m == 0 || n == 0 || k == 0 {
        return;
    }
    assert!(dw.len() >= m * n);
    // SAFETY: as above.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            dy.data.as_ptr(),
            1,
            dy.stride as isize,
            x.data.as_ptr(),
            x.stride as isize,
            1,
            1.0,
            dw.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// `db[o] += sum_b dy[b][o]`.
pub(crate) fn accumulate_db(dy: MatRef<'_>, db: &mut [f64]) {
    for r in 0..dy.rows {
        let row = &dy.data[r * dy.stride..r * dy.stride + dy.cols];
        for (d, &g) in db.iter_mut().zip(row) {
            *d += g;
        }
    }
}

pub(crate) fn add_bias(out: &mut [f64], rows: usize, stride: usize, bias: &[f64]) {
    for r in 0..rows {
        for (o, &b) in out[r * stride..r * stride + bias.len()].iter_mut().zip(bias) {
            *o += b;
        }
    }
}

/// Dot product with four independent accumulators so it vectorizes.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}
