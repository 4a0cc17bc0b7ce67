use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use irs_secrecy::harness::{
    emit_csv, oracle_gap_report, run_selftest, run_sweep, write_csv, ExperimentConfig, SweepParam, SweepResult,
    FULL_TRIALS,
};
use irs_secrecy::Error;

/// Secrecy-rate simulator for IRS-assisted mmWave/THz links.
#[derive(Debug, Parser)]
#[command(name = "irs-secrecy", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by the configuration.
    Run(Common),
    /// Sweep one parameter over a list of values.
    Sweep {
        /// lp | power | elements | rho
        #[arg(long)]
        param: String,
        /// Comma-separated values, e.g. 2,4,8,16
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        values: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Report the gap of BCD and SDP to exhaustive search.
    OracleCheck(Common),
    /// Run the invariant suite.
    Selftest(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Configuration file (key = value lines).
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. --set tx.power_dbm=20
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Number of Monte Carlo trials per point.
    #[arg(long)]
    trials: Option<usize>,
    /// Use the long trial count (1000).
    #[arg(long, conflicts_with = "trials")]
    full: bool,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated solver list.
    #[arg(long)]
    solvers: Option<String>,
    /// Record wall-clock solver times (output is then not reproducible).
    #[arg(long)]
    timing: bool,
    /// CSV destination; stdout when omitted.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(anyhow::Error),
    Solver(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Io { .. } | Error::EnumerationCap { .. } => Failure::Config(e.into()),
            other => Failure::Solver(other.into()),
        }
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(Failure::Config)?;
            ExperimentConfig::parse(&text)
                .with_context(|| format!("in {}", path.display()))
                .map_err(Failure::Config)?
        }
        None => ExperimentConfig::default(),
    };
    for kv in &common.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Config(anyhow::anyhow!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(s) = &common.solvers {
        cfg.set("solvers", s)?;
    }
    if common.full {
        cfg.num_trials = FULL_TRIALS;
    }
    if let Some(t) = common.trials {
        cfg.num_trials = t;
    }
    if let Some(s) = common.seed {
        cfg.master_seed = s;
    }
    cfg.timing |= common.timing;
    cfg.validate()?;
    Ok(cfg)
}

fn write_output(result: &SweepResult, out: &Option<PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => emit_csv(result, path)?,
        None => {
            let stdout = io::stdout();
            write_csv(result, stdout.lock())
                .context("writing CSV to stdout")
                .map_err(Failure::Config)?;
        }
    }
    Ok(())
}

fn report_sweep(result: &SweepResult) -> Result<(), Failure> {
    let mut err = io::stderr().lock();
    for p in &result.points {
        if let Some(gap) = p.mean_hybrid_gap() {
            let _ = writeln!(err, "{} = {}: mean hybrid-vs-digital rate gap {gap:.3e}", result.param, p.value);
        }
    }
    let failures = result.failure_messages();
    if failures.is_empty() {
        return Ok(());
    }
    for f in &failures {
        let _ = writeln!(err, "solver failure: {f}");
    }
    Err(Failure::Solver(anyhow::anyhow!("{} solver failures", failures.len())))
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run(common) => {
            let cfg = load_config(&common)?;
            let result = run_sweep(&cfg)?;
            write_output(&result, &common.out)?;
            report_sweep(&result)
        }
        Command::Sweep { param, values, common } => {
            let mut cfg = load_config(&common)?;
            let param: SweepParam = param.parse()?;
            cfg.sweep = Some(irs_secrecy::harness::Sweep { param, values });
            cfg.validate()?;
            let result = run_sweep(&cfg)?;
            write_output(&result, &common.out)?;
            report_sweep(&result)
        }
        Command::OracleCheck(common) => {
            let cfg = load_config(&common)?;
            let report = oracle_gap_report(&cfg)?;
            println!(
                "N = {}, L_P = {}, {} trials, mean exhaustive rate {:.6} bit/s/Hz",
                cfg.irs_elements, cfg.phase_levels, cfg.num_trials, report.mean_exhaustive_rate
            );
            println!("{:<16} {:>12} {:>12} {:>10}", "solver", "mean gap", "max gap", "optimal");
            for g in &report.gaps {
                println!(
                    "{:<16} {:>11.3}% {:>11.3}% {:>9.1}%",
                    g.solver.name(),
                    100.0 * g.mean_relative_gap,
                    100.0 * g.max_relative_gap,
                    100.0 * g.optimal_fraction
                );
            }
            if report.dominance_violations > 0 {
                return Err(Failure::Solver(anyhow::anyhow!(
                    "{} trials where a heuristic beat exhaustive search",
                    report.dominance_violations
                )));
            }
            Ok(())
        }
        Command::Selftest(common) => {
            let cfg = load_config(&common)?;
            let checks = run_selftest(&cfg, cfg.num_trials.min(20))?;
            let mut failed = 0;
            for c in &checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                println!("{tag} {:<42} {}", c.name, c.detail);
                failed += usize::from(!c.passed);
            }
            if failed > 0 {
                return Err(Failure::Solver(anyhow::anyhow!("{failed} selftest checks failed")));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
