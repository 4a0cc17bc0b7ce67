//! One Monte Carlo trial: channel draw, beamformer design, every selected solver.

use std::time::Instant;

use num_complex::Complex64;

use super::config::{ExperimentConfig, Solver};
use crate::bcd::{bob_aligned_phases, initial_phases, run_bcd};
use crate::beamforming::{gevd_beamformer, mrt_beamformer, BeamformerSolution, SteeringDictionary};
use crate::channel::{build_channel_set, CVector, ChannelSet, EveSite};
use crate::error::{Error, Result};
use crate::exhaustive::{exhaustive_search, within_cap};
use crate::rng::{derive_seed, stream};
use crate::sdp::sdp_pipeline_from_cascades;
use crate::secrecy::{build_cascades, dbm_to_watts, rate_from_ratio, CascadeVectors, DiscretePhaseSet, PhaseDomain, PhaseVector};

const CHANNEL_DOMAIN: u64 = 0xC4A7_0001;
const ALGORITHM_DOMAIN: u64 = 0xA160_0002;

/// Seed of the channel realization for `trial`. It does not depend on the
/// sweep value, so every sweep point sees the same channels.
pub fn channel_seed(master: u64, trial: usize) -> u64 {
    derive_seed(master, &[CHANNEL_DOMAIN, trial as u64])
}

/// Seed of the randomized solvers for (`sweep_value`, `trial`).
pub fn algorithm_seed(master: u64, sweep_value: f64, trial: usize) -> u64 {
    derive_seed(master, &[ALGORITHM_DOMAIN, sweep_value.to_bits(), trial as u64])
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolverOutcome {
    Solved {
        phase: PhaseVector,
        ratio: f64,
        rate: f64,
        /// Seconds; zero unless timing is enabled.
        time_s: f64,
        /// BCD sweeps, IPM iterations or enumerated candidates.
        work: u128,
    },
    /// Not run, e.g. enumeration above the cap.
    Skipped(String),
    Failed(String),
}

impl SolverOutcome {
    pub fn rate(&self) -> Option<f64> {
        match self {
            SolverOutcome::Solved { rate, .. } => Some(*rate),
            _ => None,
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, SolverOutcome::Failed(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub sweep_value: f64,
    pub outcomes: Vec<(Solver, SolverOutcome)>,
    /// Rate of the discrete-BCD phases under the fully digital beamformer
    /// minus the same phases under its hybrid approximation.
    pub hybrid_gap: Option<f64>,
    pub hybrid_relative_error: f64,
    /// Relaxation value tr(R̂_D X)/tr(R̂_E X), an upper bound on the ratio.
    pub sdp_bound: Option<f64>,
    pub alternation_rounds: usize,
}

impl TrialRecord {
    pub fn outcome(&self, solver: Solver) -> Option<&SolverOutcome> {
        self.outcomes.iter().find(|(s, _)| *s == solver).map(|(_, o)| o)
    }

    pub fn rate(&self, solver: Solver) -> Option<f64> {
        self.outcome(solver).and_then(SolverOutcome::rate)
    }
}

/// Everything a trial needs before the phase solvers run.
#[derive(Debug, Clone)]
pub struct TrialSetup {
    pub channels: ChannelSet,
    pub beamformer: BeamformerSolution,
    pub cascades: CascadeVectors,
    pub set: DiscretePhaseSet,
    pub alternation_rounds: usize,
}

/// Draws the channels of `trial` and designs the beamformer.
pub fn prepare_trial(config: &ExperimentConfig, trial: usize) -> Result<TrialSetup> {
    let bs = config.bs_geometry()?;
    let irs = config.irs_geometry()?;
    let mut rng = stream(channel_seed(config.master_seed, trial));
    let channels = build_channel_set(
        &config.path_gain_model(),
        &bs,
        &irs,
        &config.geometry,
        config.num_paths,
        &mut rng,
    )?;
    let set = DiscretePhaseSet::new(config.phase_levels)?;
    let power = dbm_to_watts(config.power_dbm);
    let noise = config.noise();

    let (w, rounds) = match config.geometry.eve_site {
        EveSite::Irs => (mrt_beamformer(&channels.bs_irs.bs_steering, power)?, 0),
        EveSite::Bs => alternate_beamformer(config, &channels, &set, power)?,
    };
    let dictionary = SteeringDictionary::for_array(&bs)?;
    let beamformer = BeamformerSolution::new(w, &dictionary, config.rf_chains, power)?;
    let cascades = build_cascades(&channels, &beamformer.digital_full, noise)?;
    Ok(TrialSetup {
        channels,
        beamformer,
        cascades,
        set,
        alternation_rounds: rounds,
    })
}

/// Bob's end-to-end BS-side channel h with hᴴw equal to his effective gain.
fn bob_bs_channel(channels: &ChannelSet, phase: &PhaseVector) -> CVector {
    let ch = &channels.bs_irs;
    let s: Complex64 = phase
        .thetas()
        .iter()
        .zip(channels.irs_bob.vector.iter())
        .zip(ch.irs_steering.iter())
        .map(|((&t, g), a)| Complex64::cis(t) * g.conj() * ch.gain * a)
        .sum();
    &ch.bs_steering * s.conj()
}

/// Alternates discrete BCD over Θ and GEVD over w until the secrecy rate
/// settles. Used when Eve listens to the BS directly.
fn alternate_beamformer(
    config: &ExperimentConfig,
    channels: &ChannelSet,
    set: &DiscretePhaseSet,
    power: f64,
) -> Result<(CVector, usize)> {
    let noise = config.noise();
    let h_eve = &channels
        .bs_eve
        .as_ref()
        .ok_or(Error::DegenerateChannel("BS interception without a direct Eve link"))?
        .vector;
    let domain = PhaseDomain::Discrete(set.clone());
    let mut w = mrt_beamformer(&channels.bs_irs.bs_steering, power)?;
    let mut previous = f64::NEG_INFINITY;
    let mut rounds = 0;
    while rounds < config.alternation_max_rounds {
        rounds += 1;
        let cascades = build_cascades(channels, &w, noise)?;
        let state = run_bcd(&cascades, initial_phases(&cascades, &domain, config.bcd.init), &config.bcd)?;
        let h_bob = bob_bs_channel(channels, &state.phase);
        let candidate = gevd_beamformer(&h_bob, h_eve, noise.bob, noise.eve, power)?;
        let rate = build_cascades(channels, &candidate, noise)?.secrecy_rate(&state.phase)?;
        let current = cascades.secrecy_rate(&state.phase)?;
        if rate >= current {
            w = candidate;
        }
        let best = rate.max(current);
        if (best - previous).abs() < config.alternation_tolerance {
            break;
        }
        previous = best;
    }
    Ok((w, rounds))
}

fn solved(phase: PhaseVector, ratio: f64, started: Option<Instant>, work: u128) -> SolverOutcome {
    SolverOutcome::Solved {
        phase,
        ratio,
        rate: rate_from_ratio(ratio),
        time_s: started.map_or(0.0, |t| t.elapsed().as_secs_f64()),
        work,
    }
}

/// Runs trial `trial` at one sweep point. Solver errors are recorded per
/// solver; only setup errors abort the trial.
pub fn run_trial(config: &ExperimentConfig, sweep_value: f64, trial: usize) -> Result<TrialRecord> {
    let setup = prepare_trial(config, trial)?;
    let cascades = &setup.cascades;
    let set = &setup.set;
    let discrete = PhaseDomain::Discrete(set.clone());
    let mut rng = stream(algorithm_seed(config.master_seed, sweep_value, trial));
    let mut sdp_bound = None;
    let mut hybrid_gap = None;

    let mut outcomes = Vec::with_capacity(config.solvers.len());
    for &solver in &config.solvers {
        let started = config.timing.then(Instant::now);
        let outcome = match solver {
            Solver::BcdDiscrete | Solver::BcdContinuous => {
                let domain = if solver == Solver::BcdDiscrete {
                    discrete.clone()
                } else {
                    PhaseDomain::Continuous
                };
                run_bcd(cascades, initial_phases(cascades, &domain, config.bcd.init), &config.bcd)
                    .map(|s| {
                        let ratio = s.objective();
                        solved(s.phase, ratio, started, s.iterations as u128)
                    })
                    .unwrap_or_else(|e| SolverOutcome::Failed(e.to_string()))
            }
            Solver::Sdp => match sdp_pipeline_from_cascades(cascades, set, &config.sdp, &mut rng) {
                Ok(r) => {
                    sdp_bound = Some(r.relaxed.objective);
                    solved(r.phase, r.objective, started, r.relaxed.iterations as u128)
                }
                Err(e) => SolverOutcome::Failed(e.to_string()),
            },
            Solver::Exhaustive => {
                if within_cap(set.num_levels(), cascades.len(), config.exhaustive_cap) {
                    exhaustive_search(cascades, set, config.exhaustive_cap)
                        .map(|r| solved(r.phase, r.objective, started, r.candidates))
                        .unwrap_or_else(|e| SolverOutcome::Failed(e.to_string()))
                } else {
                    SolverOutcome::Skipped(format!(
                        "{}^{} candidates exceed the cap of {}",
                        set.num_levels(),
                        cascades.len(),
                        config.exhaustive_cap
                    ))
                }
            }
            Solver::SecrecyOblivious => {
                let phase = bob_aligned_phases(cascades, &discrete);
                cascades
                    .ratio(&phase)
                    .map(|r| solved(phase, r, started, 0))
                    .unwrap_or_else(|e| SolverOutcome::Failed(e.to_string()))
            }
        };
        if solver == Solver::BcdDiscrete {
            if let SolverOutcome::Solved { phase, rate, .. } = &outcome {
                let hybrid = build_cascades(&setup.channels, &setup.beamformer.hybrid(), config.noise())?;
                hybrid_gap = Some(rate - hybrid.secrecy_rate(phase)?);
            }
        }
        outcomes.push((solver, outcome));
    }

    Ok(TrialRecord {
        trial_index: trial,
        sweep_value,
        outcomes,
        hybrid_gap,
        hybrid_relative_error: setup.beamformer.relative_reconstruction_error(),
        sdp_bound,
        alternation_rounds: setup.alternation_rounds,
    })
}
