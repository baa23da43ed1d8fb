//! Auxiliary threshold functions and the per-piece closed form.
//!
//! Every function here works on a nonnegative vector `u` (callers pass
//! `|v|`) and a threshold `λ`. With `l1(λ) = ‖(u − λ)⁺‖₁` and
//! `l2(λ) = ‖(u − λ)⁺‖₂`:
//!
//! ```text
//! ψ(λ) = l1(λ) − t
//! φ(λ) = l1(λ)² − t² l2(λ)²
//! Ψ(λ) = l1(λ) / l2(λ) − t
//! ```

use ndarray::ArrayView1;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Counts and sums over the entries at or above a threshold.
///
/// `spread` holds `I·w − s²` (always `≥ 0` for data-derived stats). It is
/// carried separately because forming it from `s` and `w` cancels badly
/// when the entries are close together.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BreakpointStats<T> {
    pub count: usize,
    pub sum: T,
    pub sum_sq: T,
    pub spread: T,
    pub level: T,
}

impl<T: Scalar> BreakpointStats<T> {
    /// Stats from raw sums; `spread` is formed as `I·w − s²`.
    pub fn from_sums(count: usize, sum: T, sum_sq: T, level: T) -> Self {
        let spread = T::count(count) * sum_sq - sum * sum;
        Self {
            count,
            sum,
            sum_sq,
            spread,
            level,
        }
    }

    /// Stats over the entries of `u` that are `≥ level`.
    pub fn of_vector(u: ArrayView1<'_, T>, level: T) -> Self {
        let mut count = 0usize;
        let mut sum = T::zero();
        let mut sum_sq = T::zero();
        let mut mean = T::zero();
        let mut m2 = T::zero();
        for &x in u.iter().filter(|&&x| x >= level) {
            count += 1;
            sum = sum + x;
            sum_sq = sum_sq + x * x;
            let d = x - mean;
            mean = mean + d / T::count(count);
            m2 = m2 + d * (x - mean);
        }
        Self {
            count,
            sum,
            sum_sq,
            spread: T::count(count) * m2.max(T::zero()),
            level,
        }
    }

    pub fn empty(level: T) -> Self {
        Self {
            count: 0,
            sum: T::zero(),
            sum_sq: T::zero(),
            spread: T::zero(),
            level,
        }
    }

    /// `(l1, l2²)` of the piece's quadratic extended to `λ`.
    pub fn terms(&self, lambda: T) -> (T, T) {
        if self.count == 0 {
            return (T::zero(), T::zero());
        }
        let i = T::count(self.count);
        let l1 = self.sum - i * lambda;
        ((l1), (self.spread + l1 * l1) / i)
    }

    /// Ψ of this piece at `λ`.
    pub fn psi_fun(&self, lambda: T, t: T) -> Result<T> {
        let (l1, l2sq) = self.terms(lambda);
        if !(l2sq > T::zero()) {
            return Err(Error::DegeneratePiece {
                level: lambda.as_f64(),
            });
        }
        Ok(l1 / l2sq.sqrt() - t)
    }

    /// φ of this piece at `λ`.
    pub fn phi(&self, lambda: T, t: T) -> T {
        let (l1, l2sq) = self.terms(lambda);
        l1 * l1 - t * t * l2sq
    }
}

/// `ψ(λ) = Σ max(u_i − λ, 0) − t`.
pub fn psi<T: Scalar>(u: ArrayView1<'_, T>, lambda: T, t: T) -> T {
    u.iter().map(|&x| (x - lambda).max(T::zero())).sum::<T>() - t
}

/// `(‖(u − λ)⁺‖₁, ‖(u − λ)⁺‖₂²)` by direct summation.
pub fn clipped_norms<T: Scalar>(u: ArrayView1<'_, T>, lambda: T) -> (T, T) {
    let mut l1 = T::zero();
    let mut l2sq = T::zero();
    for &x in u.iter() {
        let d = x - lambda;
        if d > T::zero() {
            l1 = l1 + d;
            l2sq = l2sq + d * d;
        }
    }
    (l1, l2sq)
}

/// `φ(λ) = ‖(u − λ)⁺‖₁² − t²‖(u − λ)⁺‖₂²`.
pub fn phi<T: Scalar>(u: ArrayView1<'_, T>, lambda: T, t: T) -> T {
    let (l1, l2sq) = clipped_norms(u, lambda);
    l1 * l1 - t * t * l2sq
}

/// `Ψ(λ) = ‖(u − λ)⁺‖₁ / ‖(u − λ)⁺‖₂ − t`, defined for `λ < max u`.
pub fn psi_fun<T: Scalar>(u: ArrayView1<'_, T>, lambda: T, t: T) -> Result<T> {
    let top = u.iter().fold(T::neg_infinity(), |m, &x| m.max(x));
    if lambda >= top {
        return Err(Error::DegenerateLevel {
            level: lambda.as_f64(),
            top: top.as_f64(),
        });
    }
    let (l1, l2sq) = clipped_norms(u, lambda);
    Ok(l1 / l2sq.sqrt() - t)
}

/// Derivative of Ψ on the piece described by `stats`:
/// `(s² − I·w) / l2(λ)³`.
pub fn psi_fun_deriv<T: Scalar>(stats: &BreakpointStats<T>, lambda: T) -> Result<T> {
    let (_, l2sq) = stats.terms(lambda);
    if !(l2sq > T::zero()) {
        return Err(Error::DegeneratePiece {
            level: lambda.as_f64(),
        });
    }
    let l2 = l2sq.sqrt();
    Ok(-stats.spread / (l2sq * l2))
}

/// Smaller root of the piece quadratic
/// `(I − t²) I λ² − 2 (I − t²) s λ + s² − t² w = 0`:
///
/// ```text
/// λ* = (s − t √((I·w − s²) / (I − t²))) / I
/// ```
pub fn closed_form_root<T: Scalar>(stats: &BreakpointStats<T>, t: T) -> Result<T> {
    let i = T::count(stats.count);
    let t_sq = t * t;
    let denom = i - t_sq;
    if stats.count == 0 || denom.abs() <= T::tol(1e-12, 8.0) * i.max(t_sq) {
        return Err(Error::DivisionByZero {
            count: stats.count,
            t_sq: t_sq.as_f64(),
        });
    }
    let ratio = stats.spread / denom;
    if stats.spread < T::zero() || ratio < T::zero() {
        return Err(Error::NegativeDiscriminant {
            value: ratio.as_f64(),
        });
    }
    Ok((stats.sum - t * ratio.sqrt()) / i)
}

/// Root of ψ: the soft threshold that puts `u` on the ℓ1 sphere of radius
/// `t`, by sorting and scanning the breakpoints.
pub fn psi_root<T: Scalar>(u: ArrayView1<'_, T>, t: T) -> Result<T> {
    let l1: T = u.iter().copied().sum();
    if !(l1 > t) {
        return Err(Error::NoPositiveRoot {
            l1: l1.as_f64(),
            t: t.as_f64(),
        });
    }
    let mut sorted: Vec<T> = u.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite entries"));
    let mut cum = T::zero();
    let mut lambda = T::zero();
    for (k, &x) in sorted.iter().enumerate() {
        cum = cum + x;
        let cand = (cum - t) / T::count(k + 1);
        if x > cand {
            lambda = cand;
        } else {
            break;
        }
    }
    Ok(lambda.max(T::zero()))
}
