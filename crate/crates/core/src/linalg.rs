//! Small dense kernels that the metrics and solvers need: norms, a thin
//! Householder QR, Cholesky, and a power iteration for the top eigenvalue.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn dot<T: Scalar>(a: ArrayView1<'_, T>, b: ArrayView1<'_, T>) -> T {
    a.dot(&b)
}

pub fn norm1<T: Scalar>(v: ArrayView1<'_, T>) -> T {
    v.iter().map(|x| x.abs()).sum()
}

pub fn norm2<T: Scalar>(v: ArrayView1<'_, T>) -> T {
    // scaled to avoid overflow on large entries
    let scale = norm_inf(v);
    if scale == T::zero() || !scale.is_finite() {
        return scale;
    }
    let ss: T = v.iter().map(|&x| (x / scale) * (x / scale)).sum();
    scale * ss.sqrt()
}

pub fn norm_inf<T: Scalar>(v: ArrayView1<'_, T>) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

pub fn frobenius<T: Scalar>(m: ArrayView2<'_, T>) -> T {
    m.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// Thin QR factorisation `M = Q R` of an `m × k` matrix with `m ≥ k`.
///
/// `Q` is `m × k` with orthonormal columns and `R` is `k × k` upper
/// triangular. Diagonal signs are whatever the Householder reflections
/// produce; callers that need `R_jj ≥ 0` should use [`Qr::r_diag_abs`].
#[derive(Debug, Clone)]
pub struct Qr<T> {
    pub q: Array2<T>,
    pub r: Array2<T>,
}

impl<T: Scalar> Qr<T> {
    pub fn r_diag_abs(&self) -> Array1<T> {
        self.r.diag().mapv(|x| x.abs())
    }
}

pub fn thin_qr<T: Scalar>(m: ArrayView2<'_, T>) -> Result<Qr<T>> {
    let (rows, cols) = m.dim();
    if cols > rows {
        return Err(Error::DimensionMismatch {
            expected: rows,
            found: cols,
        });
    }
    let mut a = m.to_owned();
    let mut reflectors: Vec<Array1<T>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let x = a.slice(ndarray::s![j.., j]).to_owned();
        let alpha = norm2(x.view());
        let mut v = x;
        if alpha > T::zero() {
            let sign = if v[0] >= T::zero() {
                T::one()
            } else {
                -T::one()
            };
            v[0] = v[0] + sign * alpha;
            let vn = norm2(v.view());
            if vn > T::zero() {
                v.mapv_inplace(|e| e / vn);
            }
        }
        // apply H = I - 2vvᵀ to the trailing block
        let mut block = a.slice_mut(ndarray::s![j.., j..]);
        let w = v.dot(&block);
        for (mut col, &wk) in block.axis_iter_mut(Axis(1)).zip(w.iter()) {
            col.scaled_add(-(wk + wk), &v);
        }
        reflectors.push(v);
    }
    let r = a.slice(ndarray::s![..cols, ..]).to_owned();
    let mut r_upper = Array2::<T>::zeros((cols, cols));
    for i in 0..cols {
        for k in i..cols {
            r_upper[[i, k]] = r[[i, k]];
        }
    }
    // Q = H_0 H_1 ... H_{k-1} applied to the first k identity columns
    let mut q = Array2::<T>::zeros((rows, cols));
    for i in 0..cols {
        q[[i, i]] = T::one();
    }
    for (j, v) in reflectors.iter().enumerate().rev() {
        let mut block = q.slice_mut(ndarray::s![j.., ..]);
        let w = v.dot(&block);
        for (mut col, &wk) in block.axis_iter_mut(Axis(1)).zip(w.iter()) {
            col.scaled_add(-(wk + wk), v);
        }
    }
    Ok(Qr { q, r: r_upper })
}

/// Lower-triangular `L` with `L Lᵀ = S` for a symmetric positive definite `S`.
pub fn cholesky<T: Scalar>(s: ArrayView2<'_, T>) -> Result<Array2<T>> {
    let n = s.nrows();
    if s.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: s.ncols(),
        });
    }
    let mut l = Array2::<T>::zeros((n, n));
    for j in 0..n {
        let mut d = s[[j, j]];
        for k in 0..j {
            d = d - l[[j, k]] * l[[j, k]];
        }
        if !(d > T::zero()) {
            return Err(Error::NotPositiveDefinite);
        }
        let d = d.sqrt();
        l[[j, j]] = d;
        for i in (j + 1)..n {
            let mut acc = s[[i, j]];
            for k in 0..j {
                acc = acc - l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = acc / d;
        }
    }
    Ok(l)
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration from the all-ones vector (with a deterministic fallback start).
pub fn largest_eigenvalue<T: Scalar>(s: ArrayView2<'_, T>, max_iter: usize, tol: T) -> T {
    let n = s.nrows();
    if n == 0 {
        return T::zero();
    }
    let mut x = Array1::<T>::from_elem(n, T::one() / T::count(n).sqrt());
    // break exact orthogonality to the top eigenvector
    for (i, xi) in x.iter_mut().enumerate() {
        *xi = *xi + T::lit(1e-3) * T::count(i % 7);
    }
    let xn = norm2(x.view());
    x.mapv_inplace(|e| e / xn);
    let mut lambda = T::zero();
    for _ in 0..max_iter {
        let y = s.dot(&x);
        let yn = norm2(y.view());
        if yn == T::zero() {
            return T::zero();
        }
        let next = x.dot(&y);
        x = y.mapv(|e| e / yn);
        if (next - lambda).abs() <= tol * next.abs().max(T::one()) {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// Factor `R` (upper triangular) with `RᵀR = S` for a symmetric positive
/// semidefinite `S`. Pivots at or below `tol · max diag` are treated as
/// zero, which zeroes the corresponding row of `R`.
pub fn psd_factor<T: Scalar>(s: ArrayView2<'_, T>, tol: T) -> Result<Array2<T>> {
    let n = s.nrows();
    if s.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: s.ncols(),
        });
    }
    let scale = s.diag().iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    let floor = tol * scale;
    let mut l = Array2::<T>::zeros((n, n));
    for j in 0..n {
        let mut d = s[[j, j]];
        for k in 0..j {
            d = d - l[[j, k]] * l[[j, k]];
        }
        if d < -floor * T::lit(1e3) {
            return Err(Error::NotPositiveDefinite);
        }
        if d <= floor {
            continue;
        }
        let d = d.sqrt();
        l[[j, j]] = d;
        for i in (j + 1)..n {
            let mut acc = s[[i, j]];
            for k in 0..j {
                acc = acc - l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = acc / d;
        }
    }
    Ok(l.reversed_axes())
}
