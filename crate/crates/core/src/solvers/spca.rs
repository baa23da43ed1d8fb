use ndarray::{Array1, Array2, ArrayView1, Axis};

use super::an::an_solve_with;
use super::gp::gp_solve_with;
use super::{init_vector, Covariance, DataMatrix, Method, SolverConfig, SpcaResult};
use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::proj::{ConstraintSet, Projector, SetKind};
use crate::scalar::Scalar;

/// Input of the multi-component driver.
#[derive(Debug, Clone)]
pub enum SpcaInput<T> {
    /// Deflation acts on the data matrix, `A ← A(I − xxᵀ)`.
    Data(DataMatrix<T>),
    /// Deflation acts on Σ directly, `Σ ← (I − xxᵀ)Σ(I − xxᵀ)`.
    Covariance(Covariance<T>),
}

impl<T: Scalar> SpcaInput<T> {
    pub fn dim(&self) -> usize {
        match self {
            SpcaInput::Data(a) => a.ncols(),
            SpcaInput::Covariance(s) => s.dim(),
        }
    }

    pub fn covariance(&self) -> Covariance<T> {
        match self {
            SpcaInput::Data(a) => a.covariance(),
            SpcaInput::Covariance(s) => s.clone(),
        }
    }
}

fn check_unit<T: Scalar>(x: ArrayView1<'_, T>) -> Result<()> {
    let nx = norm2(x);
    if (nx - T::one()).abs() > T::tol(1e-8, 64.0) {
        return Err(Error::NotUnit { norm: nx.as_f64() });
    }
    Ok(())
}

/// `A(I − xxᵀ) = A − (Ax)xᵀ` for a unit vector `x`.
pub fn deflate<T: Scalar>(a: &DataMatrix<T>, x: ArrayView1<'_, T>) -> Result<DataMatrix<T>> {
    if x.len() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.ncols(),
            found: x.len(),
        });
    }
    check_unit(x)?;
    let ax = a.view().dot(&x);
    let outer = ax.insert_axis(Axis(1)).dot(&x.insert_axis(Axis(0)));
    Ok(DataMatrix {
        a: &a.view() - &outer,
    })
}

/// `(I − xxᵀ)Σ(I − xxᵀ)` for a unit vector `x`.
pub fn deflate_covariance<T: Scalar>(
    s: &Covariance<T>,
    x: ArrayView1<'_, T>,
) -> Result<Covariance<T>> {
    if x.len() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: x.len(),
        });
    }
    check_unit(x)?;
    let sx: Array1<T> = s.view().dot(&x);
    let q = x.dot(&sx);
    let n = s.dim();
    let mut out = s.view().to_owned();
    for i in 0..n {
        for j in 0..n {
            out[[i, j]] = out[[i, j]] - x[i] * sx[j] - sx[i] * x[j] + q * x[i] * x[j];
        }
    }
    // exact symmetry
    let sym = (&out + &out.t()) * T::lit(0.5);
    Ok(Covariance { sigma: sym })
}

/// Extracts `r` components one at a time with deflation in between.
///
/// `radii` is either one radius for every component or one per component.
pub fn spca<T: Scalar>(
    input: &SpcaInput<T>,
    r: usize,
    kind: SetKind,
    radii: &[T],
    cfg: &SolverConfig<T>,
) -> Result<SpcaResult<T>> {
    let n = input.dim();
    if r == 0 || r > n {
        return Err(Error::InvalidConfig(format!(
            "number of components must be in 1..={n}, got {r}"
        )));
    }
    let radii: Vec<T> = match radii.len() {
        1 => vec![radii[0]; r],
        len if len == r => radii.to_vec(),
        len => {
            return Err(Error::DimensionMismatch {
                expected: r,
                found: len,
            })
        }
    };
    let mut data = match input {
        SpcaInput::Data(a) => Some(a.clone()),
        SpcaInput::Covariance(_) => None,
    };
    let mut sigma = input.covariance();
    let mut loadings = Array2::<T>::zeros((n, r));
    let mut traces = Vec::with_capacity(r);
    let mut objectives = Vec::with_capacity(r);

    for (j, &t) in radii.iter().enumerate() {
        let set = ConstraintSet::new(kind, t)?;
        set.check_dimension(n)?;
        let proj = Projector::new(set)
            .with_method(cfg.root_method)
            .with_root_config(cfg.root);
        let x0 = init_vector(&sigma, cfg.init, data.as_ref())?;
        let (x, trace) = match cfg.method {
            Method::Gp => gp_solve_with(&sigma, &proj, &cfg.gp, x0.view())?,
            Method::An => an_solve_with(&sigma, &proj, &cfg.an, x0.view())?,
        };
        objectives.push(sigma.quad(x.view()));
        loadings.column_mut(j).assign(&x);
        traces.push(trace);
        if j + 1 < r {
            match data.as_mut() {
                Some(a) => {
                    *a = deflate(a, x.view())?;
                    sigma = a.covariance();
                }
                None => sigma = deflate_covariance(&sigma, x.view())?,
            }
        }
    }
    Ok(SpcaResult {
        loadings,
        traces,
        method: cfg.method,
        set: kind,
        radii,
        objectives,
    })
}
