//! `quatfrac`: batch runs of the constant checks, resolvent scans, solves and
//! fractional powers from a TOML config.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CliError, Context};

#[derive(Parser)]
#[command(
    name = "quatfrac",
    version,
    about = "Fractional powers of quaternionic differential operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; overrides `threads` in the config.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Derived constants, hypothesis verdict and coercivity probes.
    Check(Common),
    /// Solve `Q_s(T) u = F` at one `s`.
    Solve(Common),
    /// Resolvent operator norms along a slice.
    ResolventScan(Common),
    /// Fractional power `P_alpha(T) v`.
    Fracpow(Common),
    /// Iterative solves against a dense LU solve.
    OracleCompare(Common),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, cmd): (Common, fn(&Context) -> Result<(), CliError>) = match cli.command {
        Command::Check(c) => (c, commands::check),
        Command::Solve(c) => (c, commands::solve),
        Command::ResolventScan(c) => (c, commands::resolvent_scan),
        Command::Fracpow(c) => (c, commands::fracpow),
        Command::OracleCompare(c) => (c, commands::oracle_compare),
    };
    let mut cfg = config::load(&common.config).map_err(CliError::Config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(threads) = common.threads.or(cfg.threads) {
        if threads == 0 {
            return Err(CliError::Config(anyhow::anyhow!(
                "--threads must be positive"
            )));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(e.into()))?;
    }
    std::fs::create_dir_all(&common.out).map_err(|e| {
        CliError::Config(anyhow::anyhow!(
            "cannot create {}: {e}",
            common.out.display()
        ))
    })?;
    let ctx = Context::new(cfg, common.out)?;
    cmd(&ctx)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.code())
        }
    }
}
