use std::path::PathBuf;
use std::process::ExitCode;

use clap::Args;
use scotlass::linalg::{norm1, norm2};
use scotlass::{ConstraintSet, Projector, SetKind};
use serde_json::json;

use crate::common::{emit, fmt_vec, read_vector, CliResult, Format, RootArg, SetArg};

#[derive(Args, Debug)]
pub struct ProjectArgs {
    #[arg(long, value_enum)]
    pub set: SetArg,
    /// ℓ1 radius.
    #[arg(long)]
    pub t: f64,
    /// Inline vector, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        conflicts_with = "input"
    )]
    pub vec: Option<Vec<f64>>,
    /// CSV file with one row or one column.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "qasb")]
    pub root: RootArg,
    /// Print the farthest point of the set instead of the nearest.
    #[arg(long)]
    pub farthest: bool,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

pub fn run(a: ProjectArgs) -> CliResult<ExitCode> {
    let v = read_vector(a.vec.as_ref(), a.input.as_deref())?;
    let kind: SetKind = a.set.into();
    let set = ConstraintSet::new(kind, a.t)?;
    let proj = Projector::new(set).with_method(a.root.into());
    let (x, case, root) = if a.farthest {
        (proj.q_project(v.view())?, None, None)
    } else {
        let out = proj.project_detailed(v.view())?;
        (out.x, Some(out.case), out.root)
    };
    let l1 = norm1(x.view());
    let l2 = norm2(x.view());
    let target = if a.farthest { proj.farthest().set } else { set };
    let feasible = target.contains(x.view(), 1e-8);
    let dist2 = (&x - &v).mapv(|d| d * d).sum();
    match a.format {
        Format::Json => {
            let out = json!({
                "command": "project",
                "set": kind.tag(),
                "t": a.t,
                "farthest": a.farthest,
                "x": x.to_vec(),
                "l1": l1,
                "l2": l2,
                "distance_sq": dist2,
                "feasible": feasible,
                "case": case,
                "root": root.map(|r| r.root),
                "root_residual": root.map(|r| r.residual),
                "root_iterations": root.map(|r| r.iterations),
            });
            emit(&serde_json::to_string_pretty(&out)?)?;
        }
        Format::Plain => {
            let mut s = format!("x = {}\n", fmt_vec(x.as_slice().expect("contiguous")));
            s += &format!("‖x‖₁ = {l1}\n‖x‖₂ = {l2}\nfeasible = {feasible}");
            if let Some(c) = case {
                s += &format!("\ncase = {c:?}");
            }
            if let Some(r) = root {
                s += &format!(
                    "\nroot = {} (residual {:e}, {} iterations)",
                    r.root, r.residual, r.iterations
                );
            }
            emit(&s)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
