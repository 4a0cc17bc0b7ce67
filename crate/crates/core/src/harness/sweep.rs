//! Monte Carlo sweeps: trials in parallel, statistics in a fixed order.

use rayon::prelude::*;

use super::config::{ExperimentConfig, Solver, SweepParam};
use super::trial::{run_trial, TrialRecord};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSummary {
    pub solver: Solver,
    pub mean_rate: f64,
    /// Standard error of the mean, sample standard deviation / √n.
    pub stderr_rate: f64,
    pub mean_time_s: f64,
    /// Trials that produced a rate.
    pub trials: usize,
    pub failures: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub summaries: Vec<SolverSummary>,
    pub records: Vec<TrialRecord>,
}

impl SweepPoint {
    pub fn summary(&self, solver: Solver) -> Option<&SolverSummary> {
        self.summaries.iter().find(|s| s.solver == solver)
    }

    pub fn mean_hybrid_gap(&self) -> Option<f64> {
        mean(self.records.iter().filter_map(|r| r.hybrid_gap))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// `lp`, `power`, `elements`, `rho`, or `none` for a single run.
    pub param: &'static str,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn failure_count(&self) -> usize {
        self.points.iter().flat_map(|p| &p.summaries).map(|s| s.failures).sum()
    }

    pub fn failure_messages(&self) -> Vec<String> {
        let mut out = Vec::new();
        for p in &self.points {
            for r in &p.records {
                for (s, o) in &r.outcomes {
                    if let super::trial::SolverOutcome::Failed(msg) = o {
                        out.push(format!("{} = {}, trial {}, {s}: {msg}", self.param, p.value, r.trial_index));
                    }
                }
            }
        }
        out
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Mean and standard error, summed in input order.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let m = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (m, 0.0);
    }
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
    (m, (var / n as f64).sqrt())
}

fn summarize(solver: Solver, records: &[TrialRecord]) -> SolverSummary {
    let mut rates = Vec::with_capacity(records.len());
    let mut times = Vec::with_capacity(records.len());
    let (mut failures, mut skipped) = (0, 0);
    for r in records {
        match r.outcome(solver) {
            Some(super::trial::SolverOutcome::Solved { rate, time_s, .. }) => {
                rates.push(*rate);
                times.push(*time_s);
            }
            Some(super::trial::SolverOutcome::Failed(_)) => failures += 1,
            Some(super::trial::SolverOutcome::Skipped(_)) | None => skipped += 1,
        }
    }
    let (mean_rate, stderr_rate) = mean_stderr(&rates);
    SolverSummary {
        solver,
        mean_rate,
        stderr_rate,
        mean_time_s: mean(times.into_iter()).unwrap_or(0.0),
        trials: rates.len(),
        failures,
        skipped,
    }
}

/// Runs `num_trials` trials at one configuration.
pub fn run_point(config: &ExperimentConfig, value: f64) -> Result<SweepPoint> {
    let trials = 0..config.num_trials;
    let records: Vec<TrialRecord> = if config.parallel {
        trials.into_par_iter().map(|t| run_trial(config, value, t)).collect::<Result<_>>()?
    } else {
        trials.map(|t| run_trial(config, value, t)).collect::<Result<_>>()?
    };
    let summaries = config.solvers.iter().map(|&s| summarize(s, &records)).collect();
    Ok(SweepPoint {
        value,
        summaries,
        records,
    })
}

/// Runs the configured sweep, or a single point when none is configured.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    match &config.sweep {
        None => Ok(SweepResult {
            param: "none",
            points: vec![run_point(config, 0.0)?],
        }),
        Some(sweep) => {
            let points = sweep
                .values
                .iter()
                .map(|&v| run_point(&config.at(sweep.param, v)?, v))
                .collect::<Result<_>>()?;
            Ok(SweepResult {
                param: sweep.param.name(),
                points,
            })
        }
    }
}

/// Sweeps `param` over `values`, overriding any sweep in `config`.
pub fn run_param_sweep(config: &ExperimentConfig, param: SweepParam, values: &[f64]) -> Result<SweepResult> {
    let mut cfg = config.clone();
    cfg.sweep = Some(super::config::Sweep {
        param,
        values: values.to_vec(),
    });
    run_sweep(&cfg)
}
