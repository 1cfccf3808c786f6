use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use stavskaya::config::{
    CertifyConfig, EnumerateConfig, ExperimentConfig, Family, SimulateConfig, SweepConfig, TableSource, VerifyConfig,
};

/// Stavskaya process: simulation, non-ergodicity certificates and contour tables.
#[derive(Parser)]
#[command(name = "stavskaya", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Density of 1s over time, started from all ones.
    Simulate(SimulateArgs),
    /// Final density across an α grid with coupled draws.
    Sweep(SweepArgs),
    /// Issue, bisect for, or re-validate a certificate.
    Certify(CertifyArgs),
    /// Run every cross-module oracle.
    Verify(VerifyArgs),
    /// Dump path tables S_r(i, t, n).
    Enumerate(EnumerateArgs),
}

#[derive(Args)]
struct ConfigFiles {
    /// Run from a saved config instead of flags.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Write the effective config before running.
    #[arg(long, value_name = "FILE")]
    save_config: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Observed cells.
    #[arg(long, default_value_t = 100)]
    m: usize,
    #[arg(long, default_value_t = 100)]
    t_max: usize,
    #[arg(long, default_value_t = 1)]
    replicas: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    files: ConfigFiles,
}

#[derive(Args)]
struct SweepArgs {
    /// α values, comma separated or `start:stop:count`.
    #[arg(long, default_value = "0.05,0.25,0.33,0.40")]
    grid: String,
    #[arg(long, default_value_t = 2000)]
    m: usize,
    #[arg(long, default_value_t = 2000)]
    t_max: usize,
    #[arg(long, default_value_t = 8)]
    replicas: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    files: ConfigFiles,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    alpha: Option<f64>,
    /// Print the largest α certified at p = φ, q = 1.
    #[arg(long)]
    max: bool,
    /// Bisection tolerance for --max.
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Points along p in the region search.
    #[arg(long, default_value_t = 200)]
    grid: usize,
    /// Interior points along q per p.
    #[arg(long, default_value_t = 16)]
    q_grid: usize,
    /// Re-validate this certificate file.
    #[arg(long, value_name = "FILE")]
    check: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    files: ConfigFiles,
}

#[derive(Args)]
struct VerifyArgs {
    /// Coupling trials per α.
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Monte Carlo replicas for the bound inequality.
    #[arg(long, default_value_t = 100_000)]
    replicas: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Add DELTA to M[1][1] before the eigenvalue oracles (negative control).
    #[arg(long, value_name = "DELTA")]
    inject_fault: Option<f64>,
    #[command(flatten)]
    files: ConfigFiles,
}

#[derive(Args)]
struct EnumerateArgs {
    /// Largest bond count.
    #[arg(long, default_value_t = 8)]
    max: usize,
    #[arg(long, value_enum, default_value_t = Family::FactorFree)]
    family: Family,
    #[arg(long, value_enum, default_value_t = TableSource::Enumeration)]
    source: TableSource,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    files: ConfigFiles,
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if let [start, stop, count] = parts[..] {
        let (a, b): (f64, f64) = (start.trim().parse()?, stop.trim().parse()?);
        let n: usize = count.trim().parse()?;
        return Ok(match n {
            0 => bail!("grid count must be positive"),
            1 => vec![a],
            _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
        });
    }
    text.split(',').map(|s| s.trim().parse::<f64>().with_context(|| format!("bad α {s:?}"))).collect()
}

impl Command {
    fn files(&self) -> &ConfigFiles {
        match self {
            Command::Simulate(a) => &a.files,
            Command::Sweep(a) => &a.files,
            Command::Certify(a) => &a.files,
            Command::Verify(a) => &a.files,
            Command::Enumerate(a) => &a.files,
        }
    }

    fn to_config(&self) -> Result<ExperimentConfig> {
        Ok(match self {
            Command::Simulate(a) => ExperimentConfig::Simulate(SimulateConfig {
                alpha: a.alpha,
                m: a.m,
                t_max: a.t_max,
                replicas: a.replicas,
                seed: a.seed,
                out: a.out.clone(),
            }),
            Command::Sweep(a) => ExperimentConfig::Sweep(SweepConfig {
                alphas: parse_grid(&a.grid)?,
                m: a.m,
                t_max: a.t_max,
                replicas: a.replicas,
                seed: a.seed,
                out: a.out.clone(),
            }),
            Command::Certify(a) => ExperimentConfig::Certify(CertifyConfig {
                alpha: a.alpha,
                max: a.max,
                tol: a.tol,
                p_grid: a.grid,
                q_grid: a.q_grid,
                check: a.check.clone(),
                out: a.out.clone(),
            }),
            Command::Verify(a) => ExperimentConfig::Verify(VerifyConfig {
                trials: a.trials,
                replicas: a.replicas,
                seed: a.seed,
                inject_fault: a.inject_fault,
            }),
            Command::Enumerate(a) => ExperimentConfig::Enumerate(EnumerateConfig {
                bonds: a.max,
                family: a.family,
                source: a.source,
                out: a.out.clone(),
            }),
        })
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Sweep(_) => "sweep",
            Command::Certify(_) => "certify",
            Command::Verify(_) => "verify",
            Command::Enumerate(_) => "enumerate",
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let files = cli.command.files();
    let config = match &files.config {
        Some(path) => ExperimentConfig::load(path)?.expect_command(cli.command.name())?,
        None => cli.command.to_config()?,
    };
    if let Some(path) = &files.save_config {
        config.save(path)?;
    }
    let status = stavskaya::execute(&config, &mut io::stdout().lock())?;
    Ok(status.exit_code())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
