//! Fixtures shared by the solver benchmarks.

use irs_secrecy::harness::{prepare_trial, ExperimentConfig};
use irs_secrecy::{CascadeVectors, DiscretePhaseSet};

/// Cascades and phase set of one seeded default-scenario trial.
pub fn fixture(elements: usize, levels: usize, trial: usize) -> (CascadeVectors, DiscretePhaseSet) {
    let cfg = ExperimentConfig {
        irs_elements: elements,
        phase_levels: levels,
        ..Default::default()
    };
    let setup = prepare_trial(&cfg, trial).expect("default scenario is valid");
    (setup.cascades, setup.set)
}
