use std::fmt;
use std::path::Path;

use clap::ValueEnum;
use ndarray::Array1;
use scotlass::proj::Profile;
use scotlass::{ErrorKind, RootMethod, SetKind};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
pub const EXIT_ITERATION_LIMIT: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(scotlass::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Core(e) => match e.kind() {
                ErrorKind::Validation | ErrorKind::Io => EXIT_USAGE,
                ErrorKind::Numeric => EXIT_NUMERIC,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{}: {e}", e.name()),
            CliError::Io(e) => write!(f, "Io: {e}"),
        }
    }
}

impl From<scotlass::Error> for CliError {
    fn from(e: scotlass::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SetArg {
    P1,
    P2,
    P3,
}

impl From<SetArg> for SetKind {
    fn from(s: SetArg) -> Self {
        match s {
            SetArg::P1 => SetKind::Ball1Ball2,
            SetArg::P2 => SetKind::Sphere1Sphere2,
            SetArg::P3 => SetKind::Ball1Sphere2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RootArg {
    Qasb,
    Mbnw,
}

impl From<RootArg> for RootMethod {
    fn from(r: RootArg) -> Self {
        match r {
            RootArg::Qasb => RootMethod::Qasb,
            RootArg::Mbnw => RootMethod::Mbnw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Plain,
}

/// A vector from an inline list or from a CSV file holding one row or one
/// column.
pub fn read_vector(inline: Option<&Vec<f64>>, path: Option<&Path>) -> CliResult<Array1<f64>> {
    match (inline, path) {
        (Some(v), None) => Ok(Array1::from_vec(v.clone())),
        (None, Some(p)) => {
            let m = scotlass::datagen::load_matrix(p)?;
            if m.nrows() == 1 || m.ncols() == 1 {
                Ok(Array1::from_iter(m.iter().copied()))
            } else {
                Err(CliError::Usage(format!(
                    "{} holds a {}×{} matrix, expected one row or column",
                    p.display(),
                    m.nrows(),
                    m.ncols()
                )))
            }
        }
        _ => Err(CliError::Usage(
            "give exactly one of --vec or --input".into(),
        )),
    }
}

/// Bracket `(0, r)` with `φ(0) > 0 > φ(r)` found by walking up the
/// breakpoints, then halving toward the top when none is negative.
pub fn phi_bracket<P: Profile<f64>>(p: &P, t: f64) -> Option<(f64, f64)> {
    let phi0 = p.phi(0.0, t);
    if phi0.is_nan() || phi0 <= 0.0 {
        return None;
    }
    let mut lo = 0.0;
    while let Some(b) = p.next_breakpoint_above(lo) {
        if b >= p.top() {
            break;
        }
        if p.phi(b, t) < 0.0 {
            return Some((0.0, b));
        }
        lo = b;
    }
    let top = p.top();
    let mut r = lo;
    for _ in 0..200 {
        r = 0.5 * (r + top);
        if p.phi(r, t) < 0.0 {
            return Some((0.0, r));
        }
    }
    None
}

pub fn fmt_vec(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Writes `text` and a newline to stdout; a closed pipe is not an error.
pub fn emit(text: &str) -> CliResult<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}
