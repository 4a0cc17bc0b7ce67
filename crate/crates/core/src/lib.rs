//! Secrecy-rate maximization for an IRS-assisted mmWave/THz downlink with a
//! passive eavesdropper.
//!
//! The crate synthesizes channels ([`channel`]), evaluates the secrecy rate
//! ([`secrecy`]), designs the BS beamformer ([`beamforming`]) and optimizes
//! discrete IRS phases with three methods: element-wise BCD ([`bcd`]),
//! semidefinite relaxation ([`sdp`]) and exhaustive enumeration
//! ([`exhaustive`]). [`harness`] runs seeded Monte Carlo sweeps over them.

pub mod bcd;
pub mod beamforming;
pub mod channel;
pub mod error;
pub mod exhaustive;
pub mod harness;
pub mod rng;
pub mod sdp;
pub mod secrecy;

pub use bcd::{bcd_phase_update, element_coefficients, quantize_phase, run_algorithm1, run_bcd, BcdConfig, BcdInit, BcdState, ElementCoefficients};
pub use beamforming::{gevd_beamformer, mrt_beamformer, omp_hybrid_decompose, BeamformerSolution, SteeringDictionary};
pub use channel::{ArrayGeometry, BlockingTarget, CMatrix, CVector, ChannelSet, EveSite, PathGainModel, ScenarioGeometry};
pub use error::{Error, Result};
pub use exhaustive::{exhaustive_search, ExhaustiveResult};
pub use sdp::{gaussian_randomize, sdp_pipeline, solve_sdp, SdpSolution, SdrMatrices};
pub use secrecy::{build_cascades, effective_gain, secrecy_rate, CascadeVectors, DiscretePhaseSet, NoisePowers, PhaseDomain, PhaseVector};
