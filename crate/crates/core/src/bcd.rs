//! Element-wise block coordinate descent over the IRS phases.
//!
//! With all other elements fixed, the objective as a function of θᵢ is
//!
//! ```text
//! f(θ) = (c_D + d_D cos(θ + p_D)) / (c_E + d_E cos(θ + p_E))
//! ```
//!
//! whose unique maximizer has a closed form. A full sweep updates every
//! element once; sweeps repeat until the reflecting matrix stops moving.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::channel::{CVector, ChannelSet};
use crate::error::{Error, Result};
use crate::secrecy::{
    build_cascades, snr_ratio, wrap_phase, CascadeVectors, DiscretePhaseSet, NoisePowers, PhaseDomain,
    PhaseVector,
};

/// Coefficients of the single-element objective f(θᵢ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementCoefficients {
    pub c_bob: f64,
    pub c_eve: f64,
    pub d_bob: f64,
    pub d_eve: f64,
    pub p_bob: f64,
    pub p_eve: f64,
}

impl ElementCoefficients {
    pub fn objective(&self, theta: f64) -> f64 {
        (self.c_bob + self.d_bob * (theta + self.p_bob).cos())
            / (self.c_eve + self.d_eve * (theta + self.p_eve).cos())
    }

    fn from_parts(own: Complex64, rest: Complex64, noise: f64) -> (f64, f64, f64) {
        let cross = own * rest.conj();
        (
            1.0 + (own.norm_sqr() + rest.norm_sqr()) / noise,
            2.0 * cross.norm() / noise,
            cross.arg(),
        )
    }
}

fn partial_sum(phase: &PhaseVector, cascade: &CVector) -> Complex64 {
    phase
        .thetas()
        .iter()
        .zip(cascade.iter())
        .map(|(&t, &c)| Complex64::cis(t) * c)
        .sum()
}

/// c/d/p coefficients of element `i` given the current phases of all others.
pub fn element_coefficients(i: usize, phase: &PhaseVector, cascades: &CascadeVectors) -> Result<ElementCoefficients> {
    let n = cascades.len();
    if phase.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: phase.len(),
        });
    }
    if i >= n {
        return Err(Error::IndexOutOfRange { index: i, len: n });
    }
    let own_phase = Complex64::cis(phase.thetas()[i]);
    let rest_bob = partial_sum(phase, &cascades.bob) - own_phase * cascades.bob[i];
    let rest_eve = partial_sum(phase, &cascades.eve) + cascades.eve_direct - own_phase * cascades.eve[i];
    Ok(coefficients_from_rest(i, cascades, rest_bob, rest_eve))
}

fn coefficients_from_rest(
    i: usize,
    cascades: &CascadeVectors,
    rest_bob: Complex64,
    rest_eve: Complex64,
) -> ElementCoefficients {
    let (c_bob, d_bob, p_bob) = ElementCoefficients::from_parts(cascades.bob[i], rest_bob, cascades.noise.bob);
    let (c_eve, d_eve, p_eve) = ElementCoefficients::from_parts(cascades.eve[i], rest_eve, cascades.noise.eve);
    ElementCoefficients {
        c_bob,
        c_eve,
        d_bob,
        d_eve,
        p_bob,
        p_eve,
    }
}

/// Closed-form maximizer of f(θᵢ), wrapped to `[0, 2π)`.
///
/// The sign of f′ follows h(θ) = √(A² + B²) sin(θ + φ) + C, and the maximum
/// sits where h crosses zero downwards. Returns `None` when f does not depend
/// on θᵢ, in which case the caller keeps the current phase.
pub fn bcd_phase_update(k: &ElementCoefficients) -> Option<f64> {
    if k.d_bob == 0.0 && k.d_eve == 0.0 {
        return None;
    }
    let a = k.c_bob * k.d_eve * k.p_eve.cos() - k.c_eve * k.d_bob * k.p_bob.cos();
    let b = k.c_bob * k.d_eve * k.p_eve.sin() - k.c_eve * k.d_bob * k.p_bob.sin();
    let c = k.d_bob * k.d_eve * (k.p_eve - k.p_bob).sin();
    let r = a.hypot(b);
    let scale = k.c_bob * k.d_eve + k.c_eve * k.d_bob;
    if r <= 1e-14 * scale {
        return None;
    }
    let shift = (-c / r).clamp(-1.0, 1.0).asin();
    let theta = if a > 0.0 {
        PI - (b / a).atan() - shift
    } else if a < 0.0 {
        -(b / a).atan() - shift
    } else {
        PI - FRAC_PI_2.copysign(b) - shift
    };
    Some(wrap_phase(theta))
}

/// Nearest member of F in chord distance |e^{jθ̃} − e^{jθ}|; exact ties go to
/// the smaller phase value.
pub fn quantize_phase(theta: f64, set: &DiscretePhaseSet) -> f64 {
    let levels = set.num_levels();
    let t = wrap_phase(theta) / set.step();
    let lo = t.floor();
    let frac = t - lo;
    let lo = lo as usize % levels;
    let hi = (lo + 1) % levels;
    let idx = if frac > 0.5 {
        hi
    } else if frac < 0.5 {
        lo
    } else {
        lo.min(hi)
    };
    set.values()[idx]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BcdInit {
    /// θᵢ⁰ = −∠cascade_bobᵢ, quantized in discrete mode.
    #[default]
    BobAligned,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BcdConfig {
    pub epsilon: f64,
    pub max_iters: usize,
    pub init: BcdInit,
}

impl Default for BcdConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-4,
            max_iters: 100,
            init: BcdInit::BobAligned,
        }
    }
}

/// Phases that co-phase every element toward Bob, ignoring Eve.
pub fn bob_aligned_phases(cascades: &CascadeVectors, domain: &PhaseDomain) -> PhaseVector {
    let raw: Vec<f64> = cascades.bob.iter().map(|c| wrap_phase(-c.arg())).collect();
    match domain {
        PhaseDomain::Continuous => PhaseVector::continuous(raw),
        PhaseDomain::Discrete(set) => {
            let q: Vec<f64> = raw.iter().map(|&t| quantize_phase(t, set)).collect();
            PhaseVector::discrete(q, set).expect("quantized phases are members of the set")
        }
    }
}

pub fn initial_phases(cascades: &CascadeVectors, domain: &PhaseDomain, init: BcdInit) -> PhaseVector {
    match init {
        BcdInit::BobAligned => bob_aligned_phases(cascades, domain),
        BcdInit::Zero => PhaseVector::zeros(cascades.len(), domain.clone()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BcdState {
    pub phase: PhaseVector,
    /// Objective before the first sweep, then after every full sweep.
    pub objective_history: Vec<f64>,
    /// Objective after every single-element update.
    pub update_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl BcdState {
    pub fn objective(&self) -> f64 {
        *self.objective_history.last().expect("history starts with the initial objective")
    }
}

/// Runs the sweep loop from `init`. The domain of `init` selects continuous or
/// discrete mode. In discrete mode the quantized candidate is accepted only if
/// it strictly improves the objective.
pub fn run_bcd(cascades: &CascadeVectors, init: PhaseVector, config: &BcdConfig) -> Result<BcdState> {
    if config.epsilon.is_nan() || config.epsilon <= 0.0 {
        return Err(Error::Domain(format!("epsilon must be > 0, got {}", config.epsilon)));
    }
    let n = cascades.len();
    if init.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: init.len(),
        });
    }
    let noise = cascades.noise;
    let mut phase = init;
    let mut history = vec![cascades.ratio(&phase)?];
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < config.max_iters {
        iterations += 1;
        let previous = phase.unit_vector();
        let mut sum_bob = partial_sum(&phase, &cascades.bob);
        let mut sum_eve = partial_sum(&phase, &cascades.eve) + cascades.eve_direct;

        for i in 0..n {
            let current = phase.thetas()[i];
            let own = Complex64::cis(current);
            let rest_bob = sum_bob - own * cascades.bob[i];
            let rest_eve = sum_eve - own * cascades.eve[i];
            let coeffs = coefficients_from_rest(i, cascades, rest_bob, rest_eve);
            if let Some(opt) = bcd_phase_update(&coeffs) {
                let candidate = match phase.domain() {
                    PhaseDomain::Continuous => Some(opt),
                    PhaseDomain::Discrete(set) => {
                        let q = quantize_phase(opt, set);
                        (coeffs.objective(q) > coeffs.objective(current)).then_some(q)
                    }
                };
                if let Some(theta) = candidate {
                    phase.set(i, theta)?;
                }
            }
            let updated = Complex64::cis(phase.thetas()[i]);
            sum_bob = rest_bob + updated * cascades.bob[i];
            sum_eve = rest_eve + updated * cascades.eve[i];
            trace.push(snr_ratio(sum_bob, sum_eve, noise.bob, noise.eve));
        }

        history.push(cascades.ratio(&phase)?);
        let moved = (phase.unit_vector() - previous).norm();
        if moved <= config.epsilon {
            converged = true;
            break;
        }
    }

    Ok(BcdState {
        phase,
        objective_history: history,
        update_trace: trace,
        iterations,
        converged,
    })
}

/// Builds the cascades for `w` and runs BCD, continuous when `set` is `None`.
pub fn run_algorithm1(
    channels: &ChannelSet,
    w: &CVector,
    noise: NoisePowers,
    set: Option<&DiscretePhaseSet>,
    config: &BcdConfig,
) -> Result<BcdState> {
    let cascades = build_cascades(channels, w, noise)?;
    let domain = match set {
        Some(s) => PhaseDomain::Discrete(s.clone()),
        None => PhaseDomain::Continuous,
    };
    let init = initial_phases(&cascades, &domain, config.init);
    run_bcd(&cascades, init, config)
}
