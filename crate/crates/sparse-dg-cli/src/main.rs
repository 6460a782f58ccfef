//! Benchmark CLI for the sparse grid DG solver.
//!
//! Subcommands: `run <config>`, `converge <config>`, `dof <N> <K> <D>`,
//! `project-study <config>`. Exit codes: 0 success, 2 configuration error,
//! 3 numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod config;
mod runner;

use runner::AppError;

#[derive(Parser)]
#[command(name = "sparse-dg", about = "Sparse grid DG transport and kinetic benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute one benchmark run described by a config file.
    Run { config: PathBuf },
    /// Run a convergence study over a range of mesh levels.
    Converge { config: PathBuf },
    /// Print the degrees of freedom of the sparse space.
    Dof { n: usize, k: usize, d: usize },
    /// Projection-error study (no time stepping).
    #[command(name = "project-study")]
    ProjectStudy { config: PathBuf },
}

fn load_and(path: &PathBuf, f: impl FnOnce(&config::RunConfig) -> Result<(), AppError>) -> ExitCode {
    let cfg = match config::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if cfg.workers > 0 {
        // Worker count only affects scheduling; all reductions are ordered.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build_global();
    }
    match f(&cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(AppError::Numerical(m)) => {
            eprintln!("numerical failure: {m}");
            ExitCode::from(3)
        }
        Err(AppError::Other(m)) => {
            eprintln!("error: {m}");
            ExitCode::FAILURE
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => load_and(&config, runner::execute_run),
        Command::Converge { config } => load_and(&config, runner::execute_converge),
        Command::ProjectStudy { config } => load_and(&config, runner::execute_projection_study),
        Command::Dof { n, k, d } => {
            println!("{}", sparse_dg::sparse_space::dof_count(n, k, d));
            ExitCode::SUCCESS
        }
    }
}
