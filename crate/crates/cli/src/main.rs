//! `coexist`: run one analysis over a scenario file and write its artifacts.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use crate::commands::Command;
use crate::config::{Format, PolicyKind};
use crate::error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "coexist", version, about = "Radar / WiFi coexistence scenario runner")]
struct Args {
    #[arg(value_enum)]
    command: Command,

    /// Scenario file (JSON).
    #[arg(long)]
    config: PathBuf,

    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,

    /// Overrides `mc.seed`.
    #[arg(long)]
    seed: Option<u64>,

    /// Overrides `mc.samples`.
    #[arg(long)]
    samples: Option<usize>,

    /// Overrides `output.format`.
    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Overrides `policy.kind`.
    #[arg(long, value_enum)]
    policy: Option<PolicyKind>,
}

fn run(args: &Args) -> CliResult<Vec<PathBuf>> {
    let (mut cfg, base) = config::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.mc.seed = seed;
    }
    if let Some(n) = args.samples {
        cfg.mc.samples = n;
    }
    if let Some(f) = args.format {
        cfg.output.format = f;
    }
    cfg.mc.validate()?;
    let artifacts = commands::run(args.command, &cfg, &base, args.policy)?;
    output::write_all(&args.out, &artifacts, cfg.output.format)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
