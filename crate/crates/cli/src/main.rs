//! `scotlass`: sparse PCA projections, solvers and diagnostics from the
//! command line.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 numeric error,
//! 4 a solver hit its iteration limit (output is still written).

mod bench;
mod common;
mod project;
mod rootcheck;
mod solve;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use common::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "scotlass",
    version,
    about = "Sparse PCA under l1/l2 constraints"
)]
struct Cli {
    /// Seed for every generator; falls back to SCOTLASS_SEED, then 0.
    #[arg(long, global = true, env = "SCOTLASS_SEED", default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Project one vector onto a constraint set.
    Project(project::ProjectArgs),
    /// Extract sparse components and report metrics.
    Solve(solve::SolveArgs),
    /// Compare the root finders on a vector or a synthetic instance.
    Rootcheck(rootcheck::RootcheckArgs),
    /// Time the solvers over a grid of problem sizes.
    Bench(bench::BenchArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Project(a) => project::run(a),
        Command::Solve(a) => solve::run(a, cli.seed),
        Command::Rootcheck(a) => rootcheck::run(a),
        Command::Bench(a) => bench::run(a, cli.seed),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.code())
    }
}
