//! `pressure-lab`: command-line front end of the pressure-lab library.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod cache;
mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::{Lab, Verb};
use config::Overrides;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "pressure-lab", version, about = "Invariants of convex Anosov representations of free groups")]
struct Args {
    verb: Verb,
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Largest word length enumerated.
    #[arg(long)]
    max_len: Option<usize>,
    /// Cylinder depth of the transfer operator.
    #[arg(long)]
    depth: Option<usize>,
    /// Refinement depth of the sampled limit lines.
    #[arg(long)]
    flag_depth: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    threads: Option<usize>,
    /// Class cache file (JSON lines).
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

fn run(args: Args) -> Result<PathBuf, CliError> {
    let ov = Overrides {
        max_len: args.max_len,
        depth: args.depth,
        flag_depth: args.flag_depth,
        threads: args.threads,
        seed: args.seed,
        cache: args.cache,
        out: args.out,
    };
    let cfg = config::load(&args.config, &ov)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.run.threads)
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let mut lab = Lab::new(cfg)?;
    eprintln!("config {}", lab.config_hash());
    pool.install(|| lab.run(args.verb))
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(args) {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(h) = e.hint() {
                eprintln!("hint: {h}");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
