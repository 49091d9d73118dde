//! Command-line front end for the `laserkit` library: time-series runs,
//! closed-form parameter sweeps and a self-verification suite.

// `!(x <= y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod simulate;
pub mod sweep;
pub mod verify;

use std::io::Write;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

pub use config::{Methods, Profile, RunArgs, RunConfig, SweepConfig};
pub use error::CliError;

/// Thread count for sweeps and per-time Kraus runs. Unset means serial.
pub const THREADS_ENV: &str = "LASERKIT_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "laserkit",
    version,
    about = "Gain/loss laser channel: simulate, sweep, verify"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Time series of photon number and entropy for one parameter point
    Simulate(RunArgs),
    /// Closed-form series for a list of gain values
    Sweep(RunArgs),
    /// Run the cross-validation suite and report each check
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Profile::Default)]
    pub profile: Profile,
}

pub fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(CliError::Config(format!("{THREADS_ENV}: {e}"))),
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Config(format!(
                "{THREADS_ENV} = {v:?}; expected a positive integer"
            ))),
        },
    }
}

/// `f(0..n)` in index order, on a dedicated pool when `threads > 1`.
pub fn parallel_map<T, F>(n: usize, threads: Option<usize>, f: F) -> Result<Vec<T>, CliError>
where
    T: Send,
    F: Fn(usize) -> Result<T, CliError> + Sync + Send,
{
    match threads {
        Some(k) if k > 1 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| CliError::Numerical(format!("thread pool: {e}")))?;
            pool.install(|| (0..n).into_par_iter().map(&f).collect())
        }
        _ => (0..n).map(f).collect(),
    }
}

fn cmd_simulate(args: &RunArgs) -> Result<(), CliError> {
    let merged = args.merge()?;
    let cfg = merged.run_config()?;
    let table = simulate::simulate(&cfg, threads_from_env()?)?;
    for w in &table.warnings {
        eprintln!("{w}");
    }
    output::write_csv_to(merged.out.as_deref(), &table.header, &table.formatted_rows())?;
    Ok(())
}

fn cmd_sweep(args: &RunArgs) -> Result<(), CliError> {
    let merged = args.merge()?;
    if merged.dim.is_some() || merged.methods.is_some() {
        eprintln!("warning: sweep uses closed forms only; dim and methods are ignored");
    }
    let cfg = merged.sweep_config()?;
    let rows = sweep::sweep(&cfg, threads_from_env()?)?;
    let formatted: Vec<Vec<String>> = rows.iter().map(|r| r.formatted()).collect();
    output::write_csv_to(merged.out.as_deref(), &sweep::SWEEP_HEADER, &formatted)?;
    Ok(())
}

fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let checks = verify::run_checks(args.profile);
    for check in &checks {
        writeln!(out, "{check}")?;
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    writeln!(out, "{} checks, {} failed", checks.len(), failed)?;
    if failed > 0 {
        return Err(CliError::Verification(failed));
    }
    Ok(())
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify(args) => cmd_verify(args, &mut std::io::stdout().lock()),
    };
    match result {
        Ok(()) => error::EXIT_OK,
        Err(e) => {
            eprintln!("laserkit: {e}");
            e.exit_code()
        }
    }
}
