//! Quality measures of a loading matrix `V` (`n × r`) against data `A`.

use ndarray::{concatenate, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{frobenius, norm2, psd_factor, thin_qr};
use crate::scalar::Scalar;

pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub sparsity: f64,
    pub cardinality: usize,
    pub non_ortho_deg: f64,
    pub max_correlation: f64,
    pub pev_percent: f64,
    pub rre: f64,
}

impl MetricsReport {
    pub fn compute<T: Scalar>(
        a: ArrayView2<'_, T>,
        v: ArrayView2<'_, T>,
        zero_tol: T,
    ) -> Result<Self> {
        let (sparsity, cardinality) = sparsity(v, zero_tol);
        Ok(Self {
            sparsity: sparsity.as_f64(),
            cardinality,
            non_ortho_deg: non_orthogonality(v)?.as_f64(),
            max_correlation: max_correlation(a, v)?.as_f64(),
            pev_percent: pev(a, v)?.as_f64(),
            rre: rre(a, v)?.as_f64(),
        })
    }
}

/// Fraction and number of entries with `|V_ij| > zero_tol`.
pub fn sparsity<T: Scalar>(v: ArrayView2<'_, T>, zero_tol: T) -> (T, usize) {
    let count = v.iter().filter(|x| x.abs() > zero_tol).count();
    let total = v.len();
    if total == 0 {
        return (T::zero(), 0);
    }
    (T::count(count) / T::count(total), count)
}

/// Largest deviation from 90° among pairwise column angles, in degrees.
pub fn non_orthogonality<T: Scalar>(v: ArrayView2<'_, T>) -> Result<T> {
    let r = v.ncols();
    let norms: Vec<T> = v.axis_iter(Axis(1)).map(norm2).collect();
    if r < 2 {
        return Ok(T::zero());
    }
    if let Some(column) = norms.iter().position(|&x| x == T::zero()) {
        return Err(Error::ZeroColumn { column });
    }
    let ninety = T::lit(90.0);
    let mut worst = T::zero();
    for i in 0..r {
        for j in (i + 1)..r {
            let c = v.column(i).dot(&v.column(j)) / (norms[i] * norms[j]);
            let c = c.max(-T::one()).min(T::one());
            let angle = c.acos().to_degrees();
            worst = worst.max((ninety - angle).abs());
        }
    }
    Ok(worst)
}

/// Largest absolute Pearson correlation between distinct score columns `Av_i`.
pub fn max_correlation<T: Scalar>(a: ArrayView2<'_, T>, v: ArrayView2<'_, T>) -> Result<T> {
    check_shapes(a, v)?;
    let r = v.ncols();
    if r < 2 {
        return Ok(T::zero());
    }
    let z = a.dot(&v);
    let mean = z.mean_axis(Axis(0)).ok_or(Error::EmptyMatrix)?;
    let zc = &z - &mean;
    let sd: Vec<T> = zc.axis_iter(Axis(1)).map(norm2).collect();
    let scale = sd.iter().fold(T::zero(), |m, &x| m.max(x));
    if let Some(column) = sd
        .iter()
        .position(|&x| !(x > T::tol(1e-14, 16.0) * scale) || x == T::zero())
    {
        return Err(Error::ZeroVarianceScore { column });
    }
    let mut worst = T::zero();
    for i in 0..r {
        for j in (i + 1)..r {
            let rho = zc.column(i).dot(&zc.column(j)) / (sd[i] * sd[j]);
            worst = worst.max(rho.abs().min(T::one()));
        }
    }
    Ok(worst)
}

/// Percentage of explained variance: `100 Σ R_jj² / ‖A‖_F²` with `AV = QR`.
pub fn pev<T: Scalar>(a: ArrayView2<'_, T>, v: ArrayView2<'_, T>) -> Result<T> {
    check_shapes(a, v)?;
    let z = a.dot(&v);
    if z.nrows() < z.ncols() {
        return Err(Error::RankDeficient { column: z.nrows() });
    }
    let qr = thin_qr(z.view())?;
    let d = qr.r_diag_abs();
    let top = d.iter().fold(T::zero(), |m, &x| m.max(x));
    if let Some(column) = d.iter().position(|&x| !(x > T::tol(1e-13, 64.0) * top)) {
        return Err(Error::RankDeficient { column });
    }
    let total = frobenius(a);
    let explained: T = d.iter().map(|&x| x * x).sum();
    Ok(T::lit(100.0) * explained / (total * total))
}

/// Relative reconstruction error `‖A − AV(VᵀV)⁻¹Vᵀ‖_F / ‖A‖_F`.
pub fn rre<T: Scalar>(a: ArrayView2<'_, T>, v: ArrayView2<'_, T>) -> Result<T> {
    check_shapes(a, v)?;
    if v.nrows() < v.ncols() {
        return Err(Error::Singular {
            condition: f64::INFINITY,
        });
    }
    let qr = thin_qr(v)?;
    let d = qr.r_diag_abs();
    let hi = d.iter().fold(T::zero(), |m, &x| m.max(x));
    let lo = d.iter().fold(T::infinity(), |m, &x| m.min(x));
    let cond = if lo > T::zero() {
        (hi / lo) * (hi / lo)
    } else {
        T::infinity()
    };
    if !(cond <= T::lit(1e12)) {
        return Err(Error::Singular {
            condition: cond.as_f64(),
        });
    }
    let aq = a.dot(&qr.q);
    let resid = &a - &aq.dot(&qr.q.t());
    Ok(frobenius(resid.view()) / frobenius(a))
}

/// A matrix `A` with centred columns and `AᵀA = Σ`, for metrics that need
/// scores when only a covariance is available: `A = [R; −R]/√2` with
/// `RᵀR = Σ`.
pub fn covariance_factor<T: Scalar>(sigma: ArrayView2<'_, T>) -> Result<Array2<T>> {
    let r = psd_factor(sigma, T::tol(1e-14, 64.0))?;
    let h = T::one() / T::lit(2.0).sqrt();
    let top = &r * h;
    let bottom = &r * (-h);
    Ok(concatenate(Axis(0), &[top.view(), bottom.view()]).expect("same widths"))
}

fn check_shapes<T: Scalar>(a: ArrayView2<'_, T>, v: ArrayView2<'_, T>) -> Result<()> {
    if a.ncols() != v.nrows() {
        return Err(Error::DimensionMismatch {
            expected: a.ncols(),
            found: v.nrows(),
        });
    }
    if a.is_empty() || v.is_empty() {
        return Err(Error::EmptyMatrix);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn sparsity_examples() {
        assert_eq!(
            sparsity(Array2::<f64>::zeros((3, 2)).view(), 1e-8),
            (0.0, 0)
        );
        let (s, c) = sparsity(Array2::<f64>::eye(3).view(), 1e-8);
        assert_eq!(c, 3);
        assert!((s - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn non_ortho_examples() {
        assert_eq!(
            non_orthogonality(Array2::<f64>::eye(3).view()).unwrap(),
            0.0
        );
        let h = 1.0 / 2f64.sqrt();
        let v = array![[1.0_f64, h], [0.0, h]];
        assert!((non_orthogonality(v.view()).unwrap() - 45.0).abs() < 1e-12);
        let z = array![[1.0_f64, 0.0], [0.0, 0.0]];
        assert!(matches!(
            non_orthogonality(z.view()),
            Err(Error::ZeroColumn { column: 1 })
        ));
    }

    #[test]
    fn correlation_examples() {
        let a = array![[1.0_f64, 2.0], [2.0, 0.5], [-3.0, -2.5]];
        let dup = array![[1.0_f64, 1.0], [0.0, 0.0]];
        assert!((max_correlation(a.view(), dup.view()).unwrap() - 1.0).abs() < 1e-12);
        let one = array![[1.0_f64], [0.0]];
        assert_eq!(max_correlation(a.view(), one.view()).unwrap(), 0.0);
    }

    #[test]
    fn pev_rre_full_basis() {
        let a = array![
            [1.0, 2.0, 0.0],
            [1.0, -1.0, 1.0],
            [1.0, -1.0, -1.0],
            [0.0, 0.0, 0.0]
        ];
        let v = Array2::<f64>::eye(3);
        assert!((pev(a.view(), v.view()).unwrap() - 100.0).abs() < 1e-10);
        assert!(rre(a.view(), v.view()).unwrap() < 1e-12);
        let sing = array![[1.0_f64, 2.0], [1.0, 2.0], [0.0, 0.0]];
        assert!(rre(a.view(), sing.view()).is_err());
    }

    #[test]
    fn factor_reproduces_covariance() {
        let s = array![[4.0_f64, 2.0, 0.0], [2.0, 3.0, 1.0], [0.0, 1.0, 2.0]];
        let a = covariance_factor(s.view()).unwrap();
        let back = a.t().dot(&a);
        for (x, y) in back.iter().zip(s.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
        let mean = a.mean_axis(Axis(0)).unwrap();
        assert!(mean.iter().all(|m| m.abs() < 1e-15));
        // rank-deficient input still factors
        let p = array![[1.0_f64, 1.0], [1.0, 1.0]];
        let b = covariance_factor(p.view()).unwrap();
        let back = b.t().dot(&b);
        assert!((back[[0, 1]] - 1.0).abs() < 1e-12);
    }
}
