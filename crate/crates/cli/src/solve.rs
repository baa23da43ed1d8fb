use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, ValueEnum};
use ndarray::Array2;
use scotlass::datagen::{
    gen_hastie, gen_random, load_matrix, save_matrix, HastieData, HastieMode, HastieSpec,
};
use scotlass::metrics::{covariance_factor, MetricsReport, DEFAULT_ZERO_TOL};
use scotlass::solvers::{InitMode, StopMask};
use scotlass::{Covariance, DataMatrix, Method, SetKind, SolverConfig, SpcaInput, SpcaResult};
use serde_json::json;

use crate::common::{emit, CliError, CliResult, Format, RootArg, SetArg, EXIT_ITERATION_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenArg {
    /// Population covariance of Hastie's three-factor model.
    HastieExact,
    /// Samples from Hastie's model, columns centred.
    Hastie,
    /// Gaussian matrix with N(0, 1/m) entries.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Gp,
    An,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Gp => Method::Gp,
            MethodArg::An => Method::An,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Diag,
    Column,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StopArg {
    /// Fixed-point residual or any of the four change tests.
    All,
    /// Fixed-point residual (GP) or step norm (AN) only.
    FixedPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputKind {
    /// Rows are samples, columns are variables.
    Data,
    /// A symmetric covariance matrix.
    Covariance,
}

#[derive(Args, Debug, Clone)]
pub struct SolveArgs {
    /// Built-in data source.
    #[arg(
        long,
        value_enum,
        conflicts_with = "input",
        required_unless_present = "input"
    )]
    pub gen: Option<GenArg>,
    /// CSV file with a data or covariance matrix.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "data")]
    pub input_kind: InputKind,
    /// Centre the columns of a data matrix read with --input.
    #[arg(long)]
    pub center: bool,
    /// Rows for --gen random.
    #[arg(long, default_value_t = 50)]
    pub m: usize,
    /// Columns for --gen random.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Rows for --gen hastie.
    #[arg(long, default_value_t = scotlass::datagen::DEFAULT_HASTIE_SAMPLES)]
    pub samples: usize,
    #[arg(long, value_enum, default_value = "p3")]
    pub set: SetArg,
    /// One radius for every component.
    #[arg(long, conflicts_with = "t_list", required_unless_present = "t_list")]
    pub t: Option<f64>,
    /// One radius per component, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub t_list: Option<Vec<f64>>,
    /// Number of components.
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    #[arg(long, value_enum, default_value = "gp")]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value = "qasb")]
    pub root: RootArg,
    #[arg(long, value_enum, default_value = "diag")]
    pub init: InitArg,
    #[arg(long, value_enum, default_value = "all")]
    pub stop: StopArg,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// GP step bound.
    #[arg(long)]
    pub gamma_max: Option<f64>,
    /// Cap the GP step at 0.499/λmax(Σ).
    #[arg(long)]
    pub safe_step: bool,
    /// AN nonmonotone memory.
    #[arg(long)]
    pub memory: Option<usize>,
    /// Write the n × r loading matrix as CSV.
    #[arg(long)]
    pub out_loadings: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write per-iteration diagnostics as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

/// Solver input plus the matrix the metrics are computed on.
pub struct Problem {
    pub input: SpcaInput<f64>,
    /// Sample count, `None` for covariance inputs.
    pub rows: Option<usize>,
    pub metrics_data: Array2<f64>,
    pub source: String,
}

pub fn load_problem(a: &SolveArgs, seed: u64) -> CliResult<Problem> {
    if let Some(path) = &a.input {
        let m = load_matrix(path)?;
        return match a.input_kind {
            InputKind::Data => {
                let mut d = DataMatrix::new(m)?;
                if a.center {
                    d = d.centered();
                }
                let metrics_data = d.view().to_owned();
                Ok(Problem {
                    rows: Some(d.nrows()),
                    input: SpcaInput::Data(d),
                    metrics_data,
                    source: path.display().to_string(),
                })
            }
            InputKind::Covariance => {
                let c = Covariance::new(m)?;
                let metrics_data = covariance_factor(c.view())?;
                Ok(Problem {
                    rows: None,
                    input: SpcaInput::Covariance(c),
                    metrics_data,
                    source: path.display().to_string(),
                })
            }
        };
    }
    let gen = a.gen.expect("clap requires --gen or --input");
    match gen {
        GenArg::HastieExact | GenArg::Hastie => {
            let spec = HastieSpec {
                n_samples: a.samples,
                seed,
                mode: if gen == GenArg::Hastie {
                    HastieMode::Sampled
                } else {
                    HastieMode::ExactCovariance
                },
            };
            match gen_hastie(&spec)? {
                HastieData::Exact(c) => {
                    let metrics_data = covariance_factor(c.view())?;
                    Ok(Problem {
                        rows: None,
                        input: SpcaInput::Covariance(c),
                        metrics_data,
                        source: "hastie-exact".into(),
                    })
                }
                HastieData::Sampled(d) => {
                    let d = d.centered();
                    let metrics_data = d.view().to_owned();
                    Ok(Problem {
                        rows: Some(d.nrows()),
                        input: SpcaInput::Data(d),
                        metrics_data,
                        source: "hastie".into(),
                    })
                }
            }
        }
        GenArg::Random => {
            let d = gen_random(a.m, a.n, seed)?;
            let metrics_data = d.view().to_owned();
            Ok(Problem {
                rows: Some(d.nrows()),
                input: SpcaInput::Data(d),
                metrics_data,
                source: "random".into(),
            })
        }
    }
}

pub fn solver_config(a: &SolveArgs) -> SolverConfig<f64> {
    let mut cfg = SolverConfig::new(a.method.into());
    cfg.root_method = a.root.into();
    cfg.init = match a.init {
        InitArg::Diag => InitMode::DiagArgmax,
        InitArg::Column => InitMode::ColumnNorm,
    };
    let mask = match a.stop {
        StopArg::All => StopMask::all(),
        StopArg::FixedPoint => StopMask::none(),
    };
    cfg.gp.stop_mask = mask;
    cfg.an.stop_mask = mask;
    if let Some(e) = a.eps {
        cfg.gp.eps = e;
        cfg.an.eps = e;
    }
    if let Some(k) = a.max_iter {
        cfg.gp.max_iter = k;
        cfg.an.max_iter = k;
    }
    if let Some(g) = a.gamma_max {
        cfg.gp.gamma_max = g;
    }
    cfg.gp.safe_step = a.safe_step;
    if let Some(m) = a.memory {
        cfg.an.memory = m;
    }
    cfg
}

pub fn radii(a: &SolveArgs) -> CliResult<Vec<f64>> {
    match (&a.t, &a.t_list) {
        (Some(t), None) => Ok(vec![*t]),
        (None, Some(list)) if list.len() == a.r => Ok(list.clone()),
        (None, Some(list)) => Err(CliError::Usage(format!(
            "--t-list has {} radii but --r is {}",
            list.len(),
            a.r
        ))),
        _ => Err(CliError::Usage(
            "give exactly one of --t or --t-list".into(),
        )),
    }
}

pub fn run(a: SolveArgs, seed: u64) -> CliResult<ExitCode> {
    let problem = load_problem(&a, seed)?;
    let radii = radii(&a)?;
    let cfg = solver_config(&a);
    let kind: SetKind = a.set.into();

    let started = Instant::now();
    let res = scotlass::solvers::spca(&problem.input, a.r, kind, &radii, &cfg)?;
    let wall = started.elapsed().as_secs_f64();
    let metrics = MetricsReport::compute(
        problem.metrics_data.view(),
        res.loadings.view(),
        DEFAULT_ZERO_TOL,
    )?;

    if let Some(p) = &a.out_loadings {
        save_matrix(p, res.loadings.view())?;
    }
    if let Some(p) = &a.trace {
        write_trace(p, &res)?;
    }
    let report = report_json(&a, &problem, &res, &metrics, wall, seed);
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&report)?,
        Format::Plain => plain_report(&res, &metrics, wall),
    };
    match &a.out {
        Some(p) => std::fs::write(p, text + "\n")?,
        None => emit(&text)?,
    }
    if res.all_converged() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("warning: at least one component stopped without converging");
        Ok(ExitCode::from(EXIT_ITERATION_LIMIT))
    }
}

fn report_json(
    a: &SolveArgs,
    problem: &Problem,
    res: &SpcaResult<f64>,
    m: &MetricsReport,
    wall: f64,
    seed: u64,
) -> serde_json::Value {
    let (rows, n) = (problem.rows, res.loadings.nrows());
    json!({
        "command": "solve",
        "source": problem.source,
        "seed": seed,
        "m": rows,
        "n": n,
        "method": res.method.tag(),
        "set": res.set.tag(),
        "r": a.r,
        "radii": res.radii,
        "sparsity": m.sparsity,
        "cardinality": m.cardinality,
        "non_ortho_deg": m.non_ortho_deg,
        "max_correlation": m.max_correlation,
        "pev_percent": m.pev_percent,
        "rre": m.rre,
        "objectives": res.objectives,
        "iterations": res.traces.iter().map(|t| t.iterations()).collect::<Vec<_>>(),
        "converged": res.traces.iter().map(|t| t.converged()).collect::<Vec<_>>(),
        "stop_reasons": res.traces.iter().map(|t| t.stop_reason.map(|r| format!("{r:?}"))).collect::<Vec<_>>(),
        "all_converged": res.all_converged(),
        "wall_time_s": wall,
        "loadings": res.loadings.columns().into_iter().map(|c| c.to_vec()).collect::<Vec<_>>(),
    })
}

fn plain_report(res: &SpcaResult<f64>, m: &MetricsReport, wall: f64) -> String {
    let mut s = String::new();
    for (j, col) in res.loadings.columns().into_iter().enumerate() {
        let tr = &res.traces[j];
        s += &format!(
            "component {}: t = {}, objective = {}, iterations = {}, converged = {}\n",
            j + 1,
            res.radii[j],
            res.objectives[j],
            tr.iterations(),
            tr.converged()
        );
        s += &format!("  loadings = {}\n", crate::common::fmt_vec(&col.to_vec()));
    }
    s += &format!(
        "sparsity = {}\ncardinality = {}\nnon-orthogonality = {:e} deg\nmax correlation = {:e}\nPEV = {} %\nRRE = {}\nwall time = {} s",
        m.sparsity, m.cardinality, m.non_ortho_deg, m.max_correlation, m.pev_percent, m.rre, wall
    );
    s
}

fn write_trace(path: &PathBuf, res: &SpcaResult<f64>) -> CliResult<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "component,iteration,objective,residual,step_size,step_norm,root_iterations,backtracks,f_max"
    )?;
    for (j, tr) in res.traces.iter().enumerate() {
        for k in 0..tr.iterations() {
            let opt = |v: &Vec<f64>| v.get(k).map(|x| format!("{x:e}")).unwrap_or_default();
            writeln!(
                w,
                "{},{},{:e},{:e},{:e},{:e},{},{},{}",
                j + 1,
                k + 1,
                tr.objective[k],
                tr.residual[k],
                tr.step_size[k],
                tr.step_norm[k],
                tr.root_iterations[k],
                tr.backtracks
                    .get(k)
                    .map(|b| b.to_string())
                    .unwrap_or_default(),
                opt(&tr.f_max),
            )?;
        }
    }
    w.flush()?;
    Ok(())
}
