//! `lpcc`: solve LPCC1 files, generate instance families, run benchmark sweeps.

mod bench;
mod flags;
mod generate;
mod solve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::flags::SolveFlags;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] lpcc::model::ModelError),
    #[error(transparent)]
    Gen(#[from] lpcc::generators::GenError),
    #[error(transparent)]
    Solve(#[from] lpcc::bnb::BnbError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{path}:{line}: {msg}")]
    Manifest {
        path: String,
        line: usize,
        msg: String,
    },
}

#[derive(Debug, Parser)]
#[command(
    name = "lpcc",
    version,
    about = "Global solver for linear programs with complementarity constraints"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Solve one LPCC1 file.
    Solve {
        path: PathBuf,
        #[command(flatten)]
        flags: SolveFlags,
        /// Print a single JSON summary line instead of the text report.
        #[arg(long)]
        json_line: bool,
    },
    /// Write generated instances as LPCC1 files with a `.meta` sidecar.
    Generate {
        #[command(subcommand)]
        family: generate::Family,
        #[arg(long, global = true, default_value = ".")]
        out: PathBuf,
        /// Number of consecutive seeds starting at `--seed`.
        #[arg(long, global = true, default_value_t = 1)]
        count: u64,
    },
    /// Run every config of a manifest on every instance; writes `runs.csv`
    /// and `profile.csv`.
    Bench {
        manifest: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Parallel worker slots.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("LPCC_LOG")).init();
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Solve {
            path,
            flags,
            json_line,
        } => solve::run(&path, &flags, json_line),
        Cmd::Generate { family, out, count } => generate::run(&family, &out, count).map(|_| 0),
        Cmd::Bench {
            manifest,
            out,
            jobs,
        } => bench::run(&manifest, &out, jobs).map(|_| 0),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
