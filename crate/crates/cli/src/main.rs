//! `spinlabor` command-line front end. Every subcommand writes CSV to
//! `--out` (stdout when omitted).
//!
//! Exit codes: 0 success, 1 usage error, 2 computation error, 3 verification
//! breach.

mod commands;
mod config;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{error::ErrorKind, Args, Parser, Subcommand};

use commands::{DistVariant, Quantity};
use config::Config;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(anyhow::Error),
    Breach(String),
}

impl CliError {
    fn io(e: std::io::Error) -> Self {
        CliError::Compute(anyhow::Error::new(e).context("writing output"))
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Compute(_) => 2,
            CliError::Breach(_) => 3,
        }
    }
}

impl From<spinlabor::Error> for CliError {
    fn from(e: spinlabor::Error) -> Self {
        CliError::Compute(e.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Compute(e) => write!(f, "computation failed: {e:#}"),
            CliError::Breach(m) => write!(f, "verification breach: {m}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "spinlabor", version, about = "Erasure with spin reservoirs: exact cost statistics")]
struct Cli {
    /// Output CSV path (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// key=value file; command-line flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for sweeps, scans and sampling
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Sampler seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Trace of one erasure run plus a cost summary
    Erase(EraseFlags),
    /// Spinlabor distribution (fin, inf or fin-reset)
    Dist(DistFlags),
    /// One quantity over an (alpha, N) grid, long format
    Sweep(SweepFlags),
    /// Smallest reservoir matching infinite-reservoir statistics
    Match(MatchFlags),
    /// Repeated erasures with one reservoir
    Reuse(ReuseFlags),
    /// Compare the recurrence engine with microstate enumeration
    OracleCheck(OracleFlags),
}

#[derive(Args, Debug)]
struct EraseFlags {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Defaults to N - 1
    #[arg(long)]
    cycles: Option<usize>,
}

#[derive(Args, Debug)]
struct DistFlags {
    #[arg(long)]
    variant: Option<DistVariant>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// CNOT steps; inf defaults to 10000, finite variants to N - 1
    #[arg(long)]
    m_max: Option<usize>,
}

#[derive(Args, Debug)]
struct SweepFlags {
    /// Comma list or from:to:step
    #[arg(long)]
    alphas: Option<String>,
    /// Comma list or from:to[:step]
    #[arg(long)]
    ns: Option<String>,
    #[arg(long)]
    quantity: Option<Quantity>,
    /// JSD tolerance for n_min, nats
    #[arg(long)]
    tolerance: Option<f64>,
    /// Iterations for reuse_series
    #[arg(long)]
    iterations: Option<usize>,
}

#[derive(Args, Debug)]
struct MatchFlags {
    #[arg(long)]
    alpha_from: Option<f64>,
    #[arg(long)]
    alpha_to: Option<f64>,
    #[arg(long)]
    alpha_step: Option<f64>,
    /// JSD tolerance, nats
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    n_max_scan: Option<usize>,
}

#[derive(Args, Debug)]
struct ReuseFlags {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
}

#[derive(Args, Debug)]
struct OracleFlags {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Also sample this many trajectories (0 skips sampling)
    #[arg(long)]
    runs: Option<usize>,
}

pub struct Global {
    out: Option<PathBuf>,
    seed: u64,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(w) = cfg.resolve(cli.workers, "workers")? {
        spinlabor::exec::set_workers(w).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let g = Global {
        out: cfg.resolve(cli.out, "out")?,
        seed: cfg.or(cli.seed, "seed", 0)?,
    };
    match cli.command {
        Command::Erase(f) => commands::erase(
            &g,
            commands::EraseArgs {
                n: cfg.require(f.n, "n")?,
                alpha: cfg.require(f.alpha, "alpha")?,
                cycles: cfg.resolve(f.cycles, "cycles")?,
            },
        ),
        Command::Dist(f) => commands::dist(
            &g,
            commands::DistArgs {
                variant: cfg.require(f.variant, "variant")?,
                n: cfg.resolve(f.n, "n")?,
                alpha: cfg.require(f.alpha, "alpha")?,
                m_max: cfg.resolve(f.m_max, "m-max")?,
            },
        ),
        Command::Sweep(f) => commands::sweep(
            &g,
            commands::SweepArgs {
                alphas: commands::parse_reals(&cfg.require(f.alphas, "alphas")?)?,
                sizes: commands::parse_sizes(&cfg.require(f.ns, "ns")?)?,
                quantity: cfg.require(f.quantity, "quantity")?,
                tolerance: cfg.or(f.tolerance, "tolerance", commands::DEFAULT_TOLERANCE)?,
                iterations: cfg.or(f.iterations, "iterations", 50)?,
            },
        ),
        Command::Match(f) => commands::match_cmd(
            &g,
            commands::MatchArgs {
                alphas: commands::real_range(
                    cfg.or(f.alpha_from, "alpha-from", 0.01)?,
                    cfg.or(f.alpha_to, "alpha-to", 0.40)?,
                    cfg.or(f.alpha_step, "alpha-step", 0.01)?,
                )?,
                tolerance: cfg.or(f.tolerance, "tolerance", commands::DEFAULT_TOLERANCE)?,
                n_max_scan: cfg.or(f.n_max_scan, "n-max-scan", commands::DEFAULT_N_MAX_SCAN)?,
            },
        ),
        Command::Reuse(f) => commands::reuse(
            &g,
            commands::ReuseArgs {
                n: cfg.or(f.n, "n", 50)?,
                alpha: cfg.or(f.alpha, "alpha", 0.2)?,
                iterations: cfg.or(f.iterations, "iterations", 50)?,
            },
        ),
        Command::OracleCheck(f) => commands::oracle_check(
            &g,
            commands::OracleArgs {
                n: cfg.require(f.n, "n")?,
                alpha: cfg.or(f.alpha, "alpha", 0.25)?,
                runs: cfg.or(f.runs, "runs", 0)?,
            },
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spinlabor: {e}");
            ExitCode::from(e.code())
        }
    }
}
