use std::process::ExitCode;
use std::time::Instant;

use clap::Args;
use scotlass::datagen::gen_random;
use scotlass::metrics::{pev, sparsity, DEFAULT_ZERO_TOL};
use scotlass::{DataMatrix, Method, SetKind, SolverConfig, SpcaInput};

use crate::common::{emit, CliError, CliResult, SetArg};
use crate::solve::MethodArg;

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Problem sizes as m×n pairs, e.g. 50x500,100x1000.
    #[arg(long, value_parser = parse_size, value_delimiter = ',', default_value = "50x500")]
    pub sizes: Vec<(usize, usize)>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "gp,an")]
    pub methods: Vec<MethodArg>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "p1,p2,p3")]
    pub sets: Vec<SetArg>,
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    /// Target fraction of nonzero loadings; t is calibrated to reach it.
    #[arg(long, default_value_t = 0.05)]
    pub density: f64,
    /// Fixed radius, overriding --density.
    #[arg(long)]
    pub t: Option<f64>,
    /// Also write the CSV here.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

fn parse_size(p: &str) -> Result<(usize, usize), String> {
    let (m, n) = p
        .trim()
        .split_once(['x', 'X', '×'])
        .ok_or_else(|| format!("`{p}`: expected MxN"))?;
    Ok((
        m.trim().parse().map_err(|e| format!("`{m}`: {e}"))?,
        n.trim().parse().map_err(|e| format!("`{n}`: {e}"))?,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub method: Method,
    pub set: SetKind,
    pub m: usize,
    pub n: usize,
    pub t: f64,
    pub mean_time_s: f64,
    pub mean_iterations: f64,
    pub mean_cardinality: f64,
    pub mean_pev: f64,
}

/// One row per (size, method, set); repetition `k` uses seed `seed + k`.
pub fn bench(a: &BenchArgs, seed: u64) -> CliResult<Vec<Cell>> {
    if a.reps == 0 {
        return Err(CliError::Usage("--reps must be positive".into()));
    }
    let sizes: Vec<(usize, usize)> = a.sizes.clone();
    let mut cells = Vec::new();
    for &(m, n) in &sizes {
        let data: Vec<_> = (0..a.reps as u64)
            .map(|k| gen_random(m, n, seed.wrapping_add(k)))
            .collect::<Result<_, _>>()?;
        let t = match a.t {
            Some(t) => t,
            None => calibrate_t(&data[0], a.density)?,
        };
        for &method in &a.methods {
            for &set in &a.sets {
                let kind: SetKind = set.into();
                let cfg = SolverConfig::new(method.into());
                let (mut time, mut iters, mut card, mut pv) = (0.0, 0.0, 0.0, 0.0);
                for d in &data {
                    let input = SpcaInput::Data(d.clone());
                    let start = Instant::now();
                    let res = scotlass::solvers::spca(&input, 1, kind, &[t], &cfg)?;
                    time += start.elapsed().as_secs_f64();
                    iters += res.traces[0].iterations() as f64;
                    card += sparsity(res.loadings.view(), DEFAULT_ZERO_TOL).1 as f64;
                    pv += pev(d.view(), res.loadings.view())?;
                }
                let r = a.reps as f64;
                cells.push(Cell {
                    method: method.into(),
                    set: kind,
                    m,
                    n,
                    t,
                    mean_time_s: time / r,
                    mean_iterations: iters / r,
                    mean_cardinality: card / r,
                    mean_pev: pv / r,
                });
            }
        }
    }
    Ok(cells)
}

/// Radius whose AN-P3 first component has about `density · n` nonzeros,
/// by bisection on `t ∈ [1, √n]`.
pub fn calibrate_t(d: &DataMatrix<f64>, density: f64) -> CliResult<f64> {
    let n = d.ncols();
    let target = (density * n as f64).round().max(1.0) as usize;
    let input = SpcaInput::Data(d.clone());
    let cfg = SolverConfig::new(Method::An);
    let card = |t: f64| -> CliResult<usize> {
        let res = scotlass::solvers::spca(&input, 1, SetKind::Ball1Sphere2, &[t], &cfg)?;
        Ok(sparsity(res.loadings.view(), DEFAULT_ZERO_TOL).1)
    };
    let (mut lo, mut hi) = (1.0f64, (n as f64).sqrt());
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if card(mid)? > target {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-3 {
            break;
        }
    }
    Ok(lo)
}

pub fn to_csv(cells: &[Cell]) -> String {
    let mut s =
        String::from("method,set,m,n,t,mean_time_s,mean_iterations,mean_cardinality,mean_pev\n");
    for c in cells {
        s += &format!(
            "{},{},{},{},{},{},{},{},{}\n",
            c.method.tag(),
            c.set.tag(),
            c.m,
            c.n,
            c.t,
            c.mean_time_s,
            c.mean_iterations,
            c.mean_cardinality,
            c.mean_pev
        );
    }
    s
}

pub fn run(a: BenchArgs, seed: u64) -> CliResult<ExitCode> {
    let cells = bench(&a, seed)?;
    let csv = to_csv(&cells);
    emit(csv.trim_end())?;
    if let Some(p) = &a.out {
        std::fs::write(p, &csv)?;
    }
    // wall time is hardware dependent: report, never fail
    for &(m, n) in &a.sizes {
        for set in &a.sets {
            let kind: SetKind = (*set).into();
            let find = |method| {
                cells
                    .iter()
                    .find(|c| c.m == m && c.n == n && c.set == kind && c.method == method)
            };
            if let (Some(gp), Some(an)) = (find(Method::Gp), find(Method::An)) {
                if an.mean_time_s >= gp.mean_time_s {
                    eprintln!(
                        "warning: {m}x{n} {}: an ({:.3e} s) not faster than gp ({:.3e} s)",
                        kind.tag(),
                        an.mean_time_s,
                        gp.mean_time_s
                    );
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
