//! Seeded Monte Carlo experiments over the phase optimizers.

pub mod config;
pub mod csv;
pub mod selftest;
pub mod sweep;
pub mod trial;

pub use config::{ExperimentConfig, Solver, Sweep, SweepParam, CI_TRIALS, FULL_TRIALS};
pub use csv::{csv_string, emit_csv, format_g9, write_csv, CSV_HEADER};
pub use selftest::{oracle_gap_report, run_selftest, CheckResult, GapReport, SolverGap};
pub use sweep::{mean_stderr, run_param_sweep, run_point, run_sweep, SolverSummary, SweepPoint, SweepResult};
pub use trial::{algorithm_seed, channel_seed, prepare_trial, run_trial, SolverOutcome, TrialRecord, TrialSetup};
