//! Single-component solvers (gradient projection and approximate Newton),
//! deflation and the multi-component driver.

mod an;
mod gp;
mod spca;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{largest_eigenvalue, norm_inf};
use crate::proj::{RootConfig, RootMethod};
use crate::scalar::Scalar;

pub use an::an_solve_one;
pub use gp::{bb_step_gp, gp_solve_one};
pub use spca::{deflate, deflate_covariance, spca, SpcaInput};

/// Data matrix `A` (rows are samples, columns are variables).
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix<T> {
    a: Array2<T>,
}

impl<T: Scalar> DataMatrix<T> {
    pub fn new(a: Array2<T>) -> Result<Self> {
        let (m, n) = a.dim();
        if m == 0 || n == 0 {
            return Err(Error::EmptyMatrix);
        }
        if n < 2 {
            return Err(Error::TooShort { len: n });
        }
        if let Some(index) = a.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { a })
    }

    pub fn view(&self) -> ArrayView2<'_, T> {
        self.a.view()
    }

    pub fn into_inner(self) -> Array2<T> {
        self.a
    }

    pub fn nrows(&self) -> usize {
        self.a.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.a.ncols()
    }

    /// Copy with every column shifted to zero mean.
    pub fn centered(&self) -> Self {
        let mean = self.a.mean_axis(Axis(0)).expect("m ≥ 1");
        Self { a: &self.a - &mean }
    }

    /// `AᵀA`.
    pub fn covariance(&self) -> Covariance<T> {
        Covariance {
            sigma: self.a.t().dot(&self.a),
        }
    }
}

/// Symmetric positive semidefinite `n × n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariance<T> {
    sigma: Array2<T>,
}

impl<T: Scalar> Covariance<T> {
    /// Checks shape, finiteness and symmetry (relative to the largest entry).
    pub fn new(sigma: Array2<T>) -> Result<Self> {
        let (n, m) = sigma.dim();
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        if n != m {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m,
            });
        }
        if n < 2 {
            return Err(Error::TooShort { len: n });
        }
        if let Some(index) = sigma.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let scale = sigma.iter().fold(T::one(), |acc, x| acc.max(x.abs()));
        let asym = (&sigma - &sigma.t())
            .iter()
            .fold(T::zero(), |acc, x| acc.max(x.abs()));
        if asym > T::tol(1e-12, 64.0) * scale {
            return Err(Error::NotSymmetric {
                asymmetry: asym.as_f64(),
            });
        }
        Ok(Self { sigma })
    }

    pub fn view(&self) -> ArrayView2<'_, T> {
        self.sigma.view()
    }

    pub fn into_inner(self) -> Array2<T> {
        self.sigma
    }

    pub fn dim(&self) -> usize {
        self.sigma.nrows()
    }

    /// `xᵀΣx`.
    pub fn quad(&self, x: ArrayView1<'_, T>) -> T {
        x.dot(&self.sigma.dot(&x))
    }

    pub fn largest_eigenvalue(&self) -> T {
        largest_eigenvalue(self.sigma.view(), 10_000, T::tol(1e-13, 64.0))
    }
}

/// Ascent gradient `2Σx` of `xᵀΣx`.
pub fn gradient<T: Scalar>(sigma: &Covariance<T>, x: ArrayView1<'_, T>) -> Result<Array1<T>> {
    if x.len() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma.dim(),
            found: x.len(),
        });
    }
    Ok(sigma.sigma.dot(&x) * T::lit(2.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum InitMode {
    /// `e_i` for the largest diagonal entry of Σ (lowest index on ties).
    #[default]
    DiagArgmax,
    /// Direction of the data column with the largest norm.
    ColumnNorm,
}

/// Starting vector for a component.
///
/// `ColumnNorm` needs the data matrix. When `A` is square the column
/// itself is used; otherwise it is mapped into variable space as `Aᵀa_i`.
pub fn init_vector<T: Scalar>(
    sigma: &Covariance<T>,
    mode: InitMode,
    data: Option<&DataMatrix<T>>,
) -> Result<Array1<T>> {
    let n = sigma.dim();
    match mode {
        InitMode::DiagArgmax => {
            let d = sigma.sigma.diag();
            let mut best = 0;
            for i in 1..n {
                if d[i] > d[best] {
                    best = i;
                }
            }
            let mut x = Array1::zeros(n);
            x[best] = T::one();
            Ok(x)
        }
        InitMode::ColumnNorm => {
            let a = data.ok_or_else(|| {
                Error::InvalidConfig("column-norm start needs a data matrix".into())
            })?;
            if a.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: a.ncols(),
                });
            }
            let norms: Vec<T> = a.a.axis_iter(Axis(1)).map(|c| c.dot(&c)).collect();
            let mut best = 0;
            for i in 1..n {
                if norms[i] > norms[best] {
                    best = i;
                }
            }
            let col = a.a.column(best);
            let x = if a.nrows() == n {
                col.to_owned()
            } else {
                a.a.t().dot(&col)
            };
            let nx = crate::linalg::norm2(x.view());
            if nx == T::zero() {
                return init_vector(sigma, InitMode::DiagArgmax, None);
            }
            Ok(x / nx)
        }
    }
}

/// Which of the four stopping tests are active besides the fixed-point test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopMask {
    /// `‖x_k − x_{k−1}‖₂ < ε`
    pub argument_abs: bool,
    /// `|f_k − f_{k−1}| < ε(1 + |f_{k−1}|)`
    pub objective_rel: bool,
    /// `‖g_k − g_{k−1}‖∞ < ε(1 + ‖g_{k−1}‖∞)`
    pub gradient_rel: bool,
    /// `‖x_k − x_{k−1}‖∞ < ε‖x_{k−1}‖∞`
    pub argument_rel: bool,
}

impl Default for StopMask {
    fn default() -> Self {
        Self::all()
    }
}

impl StopMask {
    pub fn all() -> Self {
        Self {
            argument_abs: true,
            objective_rel: true,
            gradient_rel: true,
            argument_rel: true,
        }
    }

    pub fn none() -> Self {
        Self {
            argument_abs: false,
            objective_rel: false,
            gradient_rel: false,
            argument_rel: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    FixedPoint,
    ArgumentAbs,
    ObjectiveRel,
    GradientRel,
    ArgumentRel,
    /// Approximate Newton produced a zero step.
    ZeroStep,
}

/// One iterate as seen by [`check_termination`].
#[derive(Debug, Clone)]
pub struct Snapshot<'a, T> {
    pub x: ArrayView1<'a, T>,
    /// Objective `xᵀΣx`.
    pub f: T,
    pub g: ArrayView1<'a, T>,
}

/// Stop test on the last two iterates. `residual` is the fixed-point
/// residual, which always stops the iteration when `≤ eps`.
pub fn check_termination<T: Scalar>(
    prev: &Snapshot<'_, T>,
    cur: &Snapshot<'_, T>,
    residual: T,
    eps: T,
    mask: StopMask,
) -> Option<StopReason> {
    if residual <= eps {
        return Some(StopReason::FixedPoint);
    }
    let dx = &cur.x - &prev.x;
    if mask.argument_abs && crate::linalg::norm2(dx.view()) < eps {
        return Some(StopReason::ArgumentAbs);
    }
    if mask.objective_rel && (cur.f - prev.f).abs() < eps * (T::one() + prev.f.abs()) {
        return Some(StopReason::ObjectiveRel);
    }
    if mask.gradient_rel {
        let dg = &cur.g - &prev.g;
        if norm_inf(dg.view()) < eps * (T::one() + norm_inf(prev.g)) {
            return Some(StopReason::GradientRel);
        }
    }
    if mask.argument_rel && norm_inf(dx.view()) < eps * norm_inf(prev.x) {
        return Some(StopReason::ArgumentRel);
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpConfig<T> {
    pub gamma_min: T,
    pub gamma_max: T,
    pub gamma0: T,
    pub eps: T,
    pub max_iter: usize,
    pub stop_mask: StopMask,
    /// Cap `gamma_max` at `0.499 / λ_max(Σ)`.
    pub safe_step: bool,
}

impl<T: Scalar> Default for GpConfig<T> {
    fn default() -> Self {
        Self {
            gamma_min: T::lit(0.1),
            gamma_max: T::lit(2.0),
            gamma0: T::one(),
            eps: T::lit(1e-6),
            max_iter: 5000,
            stop_mask: StopMask::all(),
            safe_step: false,
        }
    }
}

impl<T: Scalar> GpConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_min > T::zero() && self.gamma_min < self.gamma_max) {
            return Err(Error::InvalidConfig(
                "need 0 < gamma_min < gamma_max".into(),
            ));
        }
        if !(self.gamma0 > T::zero() && self.eps > T::zero()) || self.max_iter == 0 {
            return Err(Error::InvalidConfig(
                "gamma0, eps and max_iter must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Which gradient enters the approximate Newton candidate
/// `x^{k+1} − g/α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum GradientLag {
    /// `g^k`, the gradient one iterate behind. Tends to alternate between
    /// two points for many iterations before settling.
    Previous,
    /// `g^{k+1}`, the gradient at the current iterate.
    #[default]
    Current,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnConfig<T> {
    pub alpha_min: T,
    pub alpha_max: T,
    pub sigma: T,
    pub memory: usize,
    pub eps: T,
    pub max_iter: usize,
    pub max_backtracks: usize,
    pub gradient_lag: GradientLag,
    pub stop_mask: StopMask,
}

impl<T: Scalar> Default for AnConfig<T> {
    fn default() -> Self {
        Self {
            alpha_min: T::lit(-1e7),
            alpha_max: T::lit(-0.1),
            sigma: T::lit(0.25),
            memory: 50,
            eps: T::lit(1e-6),
            max_iter: 5000,
            max_backtracks: 60,
            gradient_lag: GradientLag::default(),
            stop_mask: StopMask::all(),
        }
    }
}

impl<T: Scalar> AnConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_min < self.alpha_max && self.alpha_max < T::zero()) {
            return Err(Error::InvalidConfig(
                "need alpha_min < alpha_max < 0".into(),
            ));
        }
        if !(self.sigma > T::zero() && self.sigma < T::one()) {
            return Err(Error::InvalidConfig("sigma must lie in (0, 1)".into()));
        }
        if self.memory == 0
            || self.max_iter == 0
            || self.max_backtracks == 0
            || !(self.eps > T::zero())
        {
            return Err(Error::InvalidConfig(
                "memory, eps, max_iter and max_backtracks must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Gp,
    An,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Gp => "gp",
            Method::An => "an",
        }
    }
}

/// Everything the multi-component driver needs besides the data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig<T> {
    pub method: Method,
    pub gp: GpConfig<T>,
    pub an: AnConfig<T>,
    pub root_method: RootMethod,
    pub root: RootConfig<T>,
    pub init: InitMode,
}

impl<T: Scalar> SolverConfig<T> {
    pub fn new(method: Method) -> Self {
        Self {
            method,
            gp: GpConfig::default(),
            an: AnConfig::default(),
            root_method: RootMethod::default(),
            root: RootConfig::default(),
            init: InitMode::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Converged,
    IterationLimit,
    BacktrackLimit,
}

/// Per-iteration diagnostics of one component.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverTrace<T> {
    /// `xᵀΣx` at the starting point.
    pub initial_objective: T,
    /// `xᵀΣx` after each iteration.
    pub objective: Vec<T>,
    /// Fixed-point residual (GP) or accepted step norm (AN).
    pub residual: Vec<T>,
    /// γ for GP, accepted α for AN.
    pub step_size: Vec<T>,
    pub root_iterations: Vec<usize>,
    /// `‖x^{k+1} − x^k‖₂` of each accepted step.
    pub step_norm: Vec<T>,
    /// AN only: backtracking count of each step.
    pub backtracks: Vec<usize>,
    /// AN only: nonmonotone reference value `f^max` on `f = −xᵀΣx`.
    pub f_max: Vec<T>,
    pub status: Status,
    pub stop_reason: Option<StopReason>,
}

impl<T: Scalar> SolverTrace<T> {
    fn new(initial_objective: T) -> Self {
        Self {
            initial_objective,
            objective: Vec::new(),
            residual: Vec::new(),
            step_size: Vec::new(),
            root_iterations: Vec::new(),
            step_norm: Vec::new(),
            backtracks: Vec::new(),
            f_max: Vec::new(),
            status: Status::IterationLimit,
            stop_reason: None,
        }
    }

    pub fn iterations(&self) -> usize {
        self.objective.len()
    }

    pub fn final_objective(&self) -> T {
        self.objective
            .last()
            .copied()
            .unwrap_or(self.initial_objective)
    }

    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }
}

/// Loadings of all components plus their traces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpcaResult<T> {
    /// `n × r`, one loading per column.
    pub loadings: Array2<T>,
    pub traces: Vec<SolverTrace<T>>,
    pub method: Method,
    pub set: crate::proj::SetKind,
    pub radii: Vec<T>,
    /// `x_jᵀ Σ_j x_j` on the deflated covariance of each component.
    pub objectives: Vec<T>,
}

impl<T: Scalar> SpcaResult<T> {
    pub fn all_converged(&self) -> bool {
        self.traces.iter().all(SolverTrace::converged)
    }
}

/// Feasible starting point: `x0` itself if it already lies in the set,
/// else its projection.
fn feasible_start<T: Scalar>(
    proj: &crate::proj::Projector<T>,
    x0: ArrayView1<'_, T>,
) -> Result<Array1<T>> {
    if proj.set.contains(x0, T::tol(1e-12, 16.0)) {
        Ok(x0.to_owned())
    } else {
        proj.project(x0)
    }
}
