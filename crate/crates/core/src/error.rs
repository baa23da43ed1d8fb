use thiserror::Error;

/// Errors raised by projections, root finders, solvers, metrics and I/O.
///
/// Numeric payloads are widened to `f64` so the type is independent of
/// the scalar the computation ran in.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input contains a non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("vector length {len} is below the minimum of 2")]
    TooShort { len: usize },

    #[error("radius t = {t} is not admissible for dimension {n}: {reason}")]
    InvalidRadius {
        t: f64,
        n: usize,
        reason: &'static str,
    },

    #[error("zero vector has no unique projection onto a sphere-constrained set")]
    ZeroVector,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("level {level} is at or above the largest entry {top}; the ratio function is undefined there")]
    DegenerateLevel { level: f64, top: f64 },

    #[error("breakpoint piece has zero l2 mass at level {level}")]
    DegeneratePiece { level: f64 },

    #[error("closed-form root divides by zero: active count {count} equals t² = {t_sq}")]
    DivisionByZero { count: usize, t_sq: f64 },

    #[error("closed-form root has a negative discriminant {value}")]
    NegativeDiscriminant { value: f64 },

    #[error("l1 threshold has no positive root: ‖v‖₁ = {l1} ≤ t = {t}")]
    NoPositiveRoot { l1: f64, t: f64 },

    #[error(
        "bracket [{l}, {r}] does not satisfy φ(l) > 0 > φ(r) (φ(l) = {phi_l}, φ(r) = {phi_r})"
    )]
    BadBracket {
        l: f64,
        r: f64,
        phi_l: f64,
        phi_r: f64,
    },

    #[error("root finder exceeded {max_iter} iterations")]
    RootIterationLimit { max_iter: usize },

    #[error("all entries are equal; the ratio function has no sign change")]
    AllEqual,

    #[error("closed-form root {root} lies outside the final bracket [{lo}, {up}]")]
    PieceMismatch { root: f64, lo: f64, up: f64 },

    #[error("tie solution requires more active entries than t² (count {count}, t² = {t_sq})")]
    TiePrecondition { count: usize, t_sq: f64 },

    #[error("loading vector is not unit length (‖x‖₂ = {norm})")]
    NotUnit { norm: f64 },

    #[error("matrix is not symmetric (max asymmetry {asymmetry})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("loading column {column} is zero")]
    ZeroColumn { column: usize },

    #[error("score column {column} has zero variance")]
    ZeroVarianceScore { column: usize },

    #[error("loading matrix is rank deficient (column {column})")]
    RankDeficient { column: usize },

    #[error("VᵀV is numerically singular (condition estimate {condition:e})")]
    Singular { condition: f64 },

    #[error("counterexample search exhausted every slope and a1 candidate")]
    ExhaustedSearch,

    #[error("piecewise instance cannot be realised by a vector: {0}")]
    NonLiftable(&'static str),

    #[error("empty matrix")]
    EmptyMatrix,

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("ragged row {row}: expected {expected} fields, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used to map errors onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input or configuration.
    Validation,
    /// The computation itself failed.
    Numeric,
    /// File system or format problems.
    Io,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            NonFinite { .. }
            | TooShort { .. }
            | InvalidRadius { .. }
            | DimensionMismatch { .. }
            | InvalidConfig(_)
            | NotSymmetric { .. }
            | EmptyMatrix
            | Parse { .. }
            | RaggedRow { .. } => ErrorKind::Validation,
            Csv(_) | Io(_) => ErrorKind::Io,
            _ => ErrorKind::Numeric,
        }
    }

    /// Variant name, printed by the command-line front end.
    pub fn name(&self) -> &'static str {
        use Error::*;
        match self {
            NonFinite { .. } => "NonFinite",
            TooShort { .. } => "TooShort",
            InvalidRadius { .. } => "InvalidRadius",
            ZeroVector => "ZeroVector",
            DimensionMismatch { .. } => "DimensionMismatch",
            InvalidConfig(_) => "InvalidConfig",
            DegenerateLevel { .. } => "DegenerateLevel",
            DegeneratePiece { .. } => "DegeneratePiece",
            DivisionByZero { .. } => "DivisionByZero",
            NegativeDiscriminant { .. } => "NegativeDiscriminant",
            NoPositiveRoot { .. } => "NoPositiveRoot",
            BadBracket { .. } => "BadBracket",
            RootIterationLimit { .. } => "RootIterationLimit",
            AllEqual => "AllEqual",
            PieceMismatch { .. } => "PieceMismatch",
            TiePrecondition { .. } => "TiePrecondition",
            NotUnit { .. } => "NotUnit",
            NotSymmetric { .. } => "NotSymmetric",
            NotPositiveDefinite => "NotPositiveDefinite",
            ZeroColumn { .. } => "ZeroColumn",
            ZeroVarianceScore { .. } => "ZeroVarianceScore",
            RankDeficient { .. } => "RankDeficient",
            Singular { .. } => "Singular",
            ExhaustedSearch => "ExhaustedSearch",
            NonLiftable(_) => "NonLiftable",
            EmptyMatrix => "EmptyMatrix",
            Parse { .. } => "Parse",
            RaggedRow { .. } => "RaggedRow",
            Csv(_) => "Csv",
            Io(_) => "Io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
