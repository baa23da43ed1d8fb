use std::process::ExitCode;

use clap::{Args, ValueEnum};
use ndarray::Array1;
use scotlass::datagen::{gen_bnw_counterexample, lift_to_vector, BnwInstance};
use scotlass::proj::{bnw_unguarded, mbnw_profile, qasb_profile, Profile, SortedProfile};
use scotlass::RootConfig;
use serde_json::{json, Value};

use crate::common::{emit, phi_bracket, read_vector, CliError, CliResult, Format};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RootGen {
    /// The two-piece instance with (a, b, c) = (2, 9, 41) and (10, 33, 109).
    Example,
    /// Search for a two-piece instance on which unguarded BNW cycles.
    Bnw,
}

#[derive(Args, Debug)]
pub struct RootcheckArgs {
    /// Synthetic two-piece instance instead of a vector.
    #[arg(long, value_enum, conflicts_with_all = ["vec", "input"])]
    pub gen: Option<RootGen>,
    /// Nonnegative vector, comma separated (absolute values are used).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub vec: Option<Vec<f64>>,
    #[arg(long)]
    pub input: Option<std::path::PathBuf>,
    /// ℓ1/ℓ2 ratio target.
    #[arg(long, default_value_t = 2.0)]
    pub t: f64,
    #[arg(long, default_value_t = 2)]
    pub a2: usize,
    #[arg(long, default_value_t = 9.0)]
    pub b2: f64,
    #[arg(long, default_value_t = 41.0)]
    pub c2: f64,
    /// Level of the top piece (the second Newton iterate of the cycle).
    #[arg(long, default_value_t = 4.0)]
    pub lambda2: f64,
    /// Slopes tried for the lower piece, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "-0.25,-0.5,-0.75,-1,-1.25,-1.5,-1.75,-2,-2.5,-3,-4,-5,-6,-8,-10"
    )]
    pub slopes: Vec<f64>,
    /// Counts tried for the lower piece, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "3,4,5,6,7,8,9,10,11,12,13,14,15,16,18,20,25,30,35,40"
    )]
    pub a1: Vec<usize>,
    /// Iteration cap of the unguarded method; default 10·n + 100.
    #[arg(long)]
    pub cap: Option<usize>,
    #[arg(long, value_enum, default_value = "plain")]
    pub format: Format,
}

struct Row {
    method: &'static str,
    root: Option<f64>,
    residual: Option<f64>,
    iterations: usize,
    cycle: bool,
    note: String,
}

fn check<P: Profile<f64>>(p: &P, t: f64, n: usize, cap: Option<usize>) -> Vec<Row> {
    let cfg = RootConfig::default();
    let mut rows = Vec::new();
    match phi_bracket(p, t).map(|b| qasb_profile(p, t, b, &cfg)) {
        Some(Ok(r)) => rows.push(Row {
            method: "qasb",
            root: Some(r.root),
            residual: Some(r.residual),
            iterations: r.iterations,
            cycle: false,
            note: String::new(),
        }),
        Some(Err(e)) => rows.push(failed("qasb", e.name())),
        None => rows.push(failed("qasb", "no bracket with φ(0) > 0")),
    }
    match mbnw_profile(p, t, &cfg) {
        Ok(r) => rows.push(Row {
            method: "mbnw",
            root: Some(r.root),
            residual: Some(r.residual),
            iterations: r.iterations,
            cycle: false,
            note: String::new(),
        }),
        Err(e) => rows.push(failed("mbnw", e.name())),
    }
    let cap = cap.unwrap_or(10 * n + 100);
    match bnw_unguarded(p, t, cap) {
        Ok(rep) => {
            let note = match rep.cycle_pair {
                Some((a, b)) => format!("cycle {a} <-> {b}, {} repeats", rep.repeats),
                None if !rep.finished => format!("stopped at cap {cap}"),
                None => String::new(),
            };
            rows.push(Row {
                method: "bnw",
                root: rep.root,
                residual: rep.root.map(|r| p.phi(r, t).abs()),
                iterations: rep.history.len(),
                cycle: rep.cycle_pair.is_some(),
                note,
            })
        }
        Err(e) => rows.push(failed("bnw", e.name())),
    }
    rows
}

fn failed(method: &'static str, why: &str) -> Row {
    Row {
        method,
        root: None,
        residual: None,
        iterations: 0,
        cycle: false,
        note: format!("failed: {why}"),
    }
}

pub fn run(a: RootcheckArgs) -> CliResult<ExitCode> {
    let (rows, instance) = match a.gen {
        Some(g) => {
            let inst: BnwInstance = match g {
                RootGen::Example => gen_bnw_counterexample(2, 9.0, 41.0, 4.0, 2.0, &[-1.0], &[10])?,
                RootGen::Bnw => {
                    gen_bnw_counterexample(a.a2, a.b2, a.c2, a.lambda2, a.t, &a.slopes, &a.a1)?
                }
            };
            let model = inst.to_model()?;
            let rows = check(&model, inst.t, inst.a1, a.cap);
            let mut v = serde_json::to_value(inst)?;
            v["loop_residual"] = json!(inst.loop_residual()?);
            v["liftable"] = json!(lift_to_vector(&inst).is_ok());
            (rows, Some(v))
        }
        None => {
            let v: Array1<f64> = read_vector(a.vec.as_ref(), a.input.as_deref())?.mapv(f64::abs);
            if v.len() < 2 {
                return Err(CliError::Usage("vector needs at least 2 entries".into()));
            }
            let p = SortedProfile::new(v.view());
            (check(&p, a.t, v.len(), a.cap), None)
        }
    };
    let agree = match (rows[0].root, rows[1].root) {
        (Some(q), Some(m)) => Some((q - m).abs()),
        _ => None,
    };
    match a.format {
        Format::Json => {
            let out = json!({
                "command": "rootcheck",
                "t": instance.as_ref().map_or(json!(a.t), |i| i["t"].clone()),
                "instance": instance.unwrap_or(Value::Null),
                "methods": rows.iter().map(|r| json!({
                    "method": r.method,
                    "root": r.root,
                    "residual": r.residual,
                    "iterations": r.iterations,
                    "cycle": r.cycle,
                    "note": r.note,
                })).collect::<Vec<_>>(),
                "qasb_mbnw_gap": agree,
            });
            emit(&serde_json::to_string_pretty(&out)?)?;
        }
        Format::Plain => {
            let mut s = String::new();
            if let Some(i) = &instance {
                s += &format!("instance: {i}\n");
            }
            s += &format!(
                "{:<6} {:>22} {:>12} {:>6} {:>6}  note",
                "method", "root", "residual", "iters", "cycle"
            );
            for r in &rows {
                let root = r.root.map_or("-".into(), |x| format!("{x:.15}"));
                let res = r.residual.map_or("-".into(), |x| format!("{x:.2e}"));
                s += &format!(
                    "\n{:<6} {:>22} {:>12} {:>6} {:>6}  {}",
                    r.method, root, res, r.iterations, r.cycle, r.note
                );
            }
            if let Some(g) = agree {
                s += &format!("\n|qasb - mbnw| = {g:.3e}");
            }
            emit(&s)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
