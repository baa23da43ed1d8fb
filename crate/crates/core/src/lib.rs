//! Sparse principal component analysis under LASSO-type constraints.
//!
//! The crate solves
//!
//! ```text
//! maximize xᵀΣx  subject to  x ∈ Ω
//! ```
//!
//! for three feasible sets built from an ℓ1 ball/sphere of radius `t` and
//! the unit ℓ2 ball/sphere:
//!
//! * `Ω1 = {‖x‖₁ ≤ t, ‖x‖₂ ≤ 1}` ([`SetKind::Ball1Ball2`]),
//! * `Ω2 = {‖x‖₁ = t, ‖x‖₂ = 1}` ([`SetKind::Sphere1Sphere2`]),
//! * `Ω3 = {‖x‖₁ ≤ t, ‖x‖₂ = 1}` ([`SetKind::Ball1Sphere2`]).
//!
//! Building blocks:
//!
//! * [`proj`]: exact Euclidean projections onto the three sets, the
//!   auxiliary threshold functions and two root finders (a quadratic
//!   secant/bisection hybrid and a cycle-guarded bisection-Newton method).
//! * [`solvers`]: gradient projection with Barzilai–Borwein steps and an
//!   approximate Newton method with a nonmonotone line search, plus
//!   deflation for extracting several components.
//! * [`metrics`]: sparsity, non-orthogonality, correlation, explained
//!   variance and reconstruction error of a loading matrix.
//! * [`datagen`]: synthetic data (Hastie's three-factor model, Gaussian
//!   matrices), counterexample construction for unguarded bisection-Newton,
//!   and CSV matrix I/O.
//!
//! All numerical code is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64` (and `f32` where that
//! is useful).

// `!(x > 0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod datagen;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod proj;
pub mod scalar;
pub mod solvers;

pub use error::{Error, ErrorKind};
pub use proj::{
    BreakpointStats, ConstraintSet, Projector, Radius, RootConfig, RootMethod, RootResult, SetKind,
};
pub use scalar::Scalar;
pub use solvers::{
    AnConfig, Covariance, DataMatrix, GpConfig, Method, SolverConfig, SolverTrace, SpcaInput,
    SpcaResult,
};

/// Dense vector of loadings or projection inputs.
pub type RealVector<T = f64> = ndarray::Array1<T>;
/// Dense row-major matrix (data matrices, covariances, loading matrices).
pub type RealMatrix<T = f64> = ndarray::Array2<T>;

pub type Vector64 = ndarray::Array1<f64>;
pub type Matrix64 = ndarray::Array2<f64>;
pub type Vector32 = ndarray::Array1<f32>;
pub type Matrix32 = ndarray::Array2<f32>;

pub type Radius64 = Radius<f64>;
pub type ConstraintSet64 = ConstraintSet<f64>;
pub type Projector64 = Projector<f64>;
pub type Projector32 = Projector<f32>;
pub type RootConfig64 = RootConfig<f64>;
pub type BreakpointStats64 = BreakpointStats<f64>;
pub type Covariance64 = Covariance<f64>;
pub type Covariance32 = Covariance<f32>;
pub type DataMatrix64 = DataMatrix<f64>;
pub type GpConfig64 = GpConfig<f64>;
pub type AnConfig64 = AnConfig<f64>;
pub type SolverConfig64 = SolverConfig<f64>;
pub type SpcaResult64 = SpcaResult<f64>;
pub type SolverTrace64 = SolverTrace<f64>;
