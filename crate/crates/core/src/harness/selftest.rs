//! Runtime verification: solver gaps against enumeration and an invariant suite.

use std::f64::consts::PI;

use super::config::{ExperimentConfig, Solver};
use super::sweep::run_point;
use super::trial::{prepare_trial, run_trial};
use crate::bcd::{initial_phases, run_bcd};
use crate::channel::{steering_ula, steering_ura, ArrayGeometry};
use crate::error::Result;
use crate::exhaustive::within_cap;
use crate::sdp::{sdr_matrices_from_cascades, solve_sdp};
use crate::secrecy::{PhaseDomain, PhaseVector};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverGap {
    pub solver: Solver,
    /// Mean of (R_exh − R_solver) / R_exh over trials with R_exh > 0.
    pub mean_relative_gap: f64,
    pub max_relative_gap: f64,
    /// Share of trials where the solver matched the optimum to 1e-9.
    pub optimal_fraction: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub mean_exhaustive_rate: f64,
    pub gaps: Vec<SolverGap>,
    /// Trials where a heuristic exceeded the enumerated optimum.
    pub dominance_violations: usize,
}

/// Compares every selected discrete solver with exhaustive search.
pub fn oracle_gap_report(config: &ExperimentConfig) -> Result<GapReport> {
    config.validate()?;
    if !within_cap(config.phase_levels, config.irs_elements, config.exhaustive_cap) {
        return Err(crate::Error::EnumerationCap {
            candidates: crate::exhaustive::candidate_count(config.phase_levels, config.irs_elements)
                .unwrap_or(u128::MAX),
            cap: config.exhaustive_cap,
        });
    }
    let mut cfg = config.clone();
    cfg.solvers = [Solver::BcdDiscrete, Solver::Sdp, Solver::SecrecyOblivious, Solver::Exhaustive]
        .into_iter()
        .filter(|s| *s == Solver::Exhaustive || config.solvers.contains(s))
        .collect();
    let point = run_point(&cfg, 0.0)?;

    let mut violations = 0;
    let mut ex_rates = Vec::new();
    let mut gaps = Vec::new();
    for &solver in cfg.solvers.iter().filter(|s| **s != Solver::Exhaustive) {
        let (mut sum, mut max, mut optimal, mut n) = (0.0, 0.0f64, 0usize, 0usize);
        for r in &point.records {
            let (Some(ex), Some(rate)) = (r.rate(Solver::Exhaustive), r.rate(solver)) else {
                continue;
            };
            if rate > ex + 1e-12 {
                violations += 1;
            }
            if (ex - rate).abs() <= 1e-9 * ex.max(1.0) {
                optimal += 1;
            }
            if ex > 0.0 {
                let g = (ex - rate) / ex;
                sum += g;
                max = max.max(g);
                n += 1;
            }
        }
        gaps.push(SolverGap {
            solver,
            mean_relative_gap: if n > 0 { sum / n as f64 } else { 0.0 },
            max_relative_gap: max,
            optimal_fraction: optimal as f64 / point.records.len() as f64,
            trials: n,
        });
    }
    for r in &point.records {
        if let Some(ex) = r.rate(Solver::Exhaustive) {
            ex_rates.push(ex);
        }
    }
    Ok(GapReport {
        mean_exhaustive_rate: ex_rates.iter().sum::<f64>() / ex_rates.len().max(1) as f64,
        gaps,
        dominance_violations: violations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

/// Runs the invariant suite on `trials` channel draws of `config`.
pub fn run_selftest(config: &ExperimentConfig, trials: usize) -> Result<Vec<CheckResult>> {
    config.validate()?;
    let mut out = Vec::new();

    let mut worst = 0.0f64;
    let ula = ArrayGeometry::ula(16, 0.5)?;
    let ura = ArrayGeometry::ura(4, 5, 0.5)?;
    for k in 0..64 {
        let a = -PI / 2.0 + PI * k as f64 / 64.0;
        worst = worst.max((steering_ula(&ula, a)?.norm() - 1.0).abs());
        worst = worst.max((steering_ura(&ura, a, a / 3.0)?.norm() - 1.0).abs());
    }
    out.push(check("steering vectors unit norm", worst <= 1e-12, format!("max deviation {worst:.2e}")));

    let mut cfg = config.clone();
    cfg.solvers = Solver::ALL.to_vec();
    cfg.num_trials = trials.max(1);
    let (mut negative, mut dominance, mut monotone, mut kkt_worst, mut bound_violations) = (0, 0, 0, 0.0f64, 0);
    let mut solved = 0;
    for t in 0..cfg.num_trials {
        let rec = run_trial(&cfg, 0.0, t)?;
        for (_, o) in &rec.outcomes {
            if let Some(r) = o.rate() {
                solved += 1;
                if r < 0.0 {
                    negative += 1;
                }
            }
        }
        if let Some(ex) = rec.rate(Solver::Exhaustive) {
            for s in [Solver::BcdDiscrete, Solver::Sdp, Solver::SecrecyOblivious] {
                if rec.rate(s).is_some_and(|r| r > ex + 1e-12) {
                    dominance += 1;
                }
            }
        }
        let setup = prepare_trial(&cfg, t)?;
        let domain = PhaseDomain::Discrete(setup.set.clone());
        let state = run_bcd(
            &setup.cascades,
            initial_phases(&setup.cascades, &domain, cfg.bcd.init),
            &cfg.bcd,
        )?;
        if state.update_trace.windows(2).any(|w| w[1] < w[0] * (1.0 - 1e-12)) {
            monotone += 1;
        }
        if let Ok(m) = sdr_matrices_from_cascades(&setup.cascades) {
            let sol = solve_sdp(&m, cfg.sdp.tolerance)?;
            kkt_worst = kkt_worst.max(sol.kkt_residuals.max());
            let ex_ratio = rec.outcome(Solver::Exhaustive).and_then(|o| match o {
                super::trial::SolverOutcome::Solved { ratio, .. } => Some(*ratio),
                _ => None,
            });
            let cont = PhaseVector::continuous(
                match rec.outcome(Solver::BcdContinuous) {
                    Some(super::trial::SolverOutcome::Solved { phase, .. }) => phase.thetas().to_vec(),
                    _ => vec![0.0; setup.cascades.len()],
                },
            );
            let ratios = [ex_ratio.unwrap_or(0.0), m.ratio(&cont)];
            if ratios.iter().any(|r| *r > sol.objective * (1.0 + 1e-6)) {
                bound_violations += 1;
            }
        }
    }
    out.push(check("secrecy rate non-negative", negative == 0, format!("{negative} of {solved} negative")));
    out.push(check(
        "exhaustive dominates discrete heuristics",
        dominance == 0,
        format!("{dominance} violations"),
    ));
    out.push(check(
        "BCD objective monotone per update",
        monotone == 0,
        format!("{monotone} non-monotone runs"),
    ));
    out.push(check(
        "SDP KKT residuals within tolerance",
        kkt_worst <= cfg.sdp.tolerance,
        format!("worst residual {kkt_worst:.2e}"),
    ));
    out.push(check(
        "SDP relaxation bounds the ratio",
        bound_violations == 0,
        format!("{bound_violations} violations"),
    ));

    let a = run_trial(&cfg, 0.0, 0)?;
    let b = run_trial(&cfg, 0.0, 0)?;
    out.push(check("trial determinism", a == b, String::new()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selftest_passes_on_defaults() {
        let results = run_selftest(&ExperimentConfig::default(), 4).unwrap();
        for r in &results {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }

    #[test]
    fn gap_report_has_no_violations() {
        let cfg = ExperimentConfig {
            num_trials: 8,
            solvers: vec![Solver::BcdDiscrete, Solver::Sdp],
            ..Default::default()
        };
        let rep = oracle_gap_report(&cfg).unwrap();
        assert_eq!(rep.dominance_violations, 0);
        assert_eq!(rep.gaps.len(), 2);
    }
}
