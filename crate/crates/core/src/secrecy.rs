//! Phase-shift representation, the reflect operation and the secrecy-rate
//! objective shared by all phase optimizers.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::channel::{CVector, ChannelSet};
use crate::error::{Error, Result};

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_phase(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// The uniform phase alphabet F = {0, Δθ, …, (L_P − 1)Δθ}.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePhaseSet {
    num_levels: usize,
    step: f64,
    values: Vec<f64>,
}

impl DiscretePhaseSet {
    pub fn new(num_levels: usize) -> Result<Self> {
        if num_levels == 0 {
            return Err(Error::Domain("phase set needs at least one level".into()));
        }
        let step = TAU / num_levels as f64;
        let values = (0..num_levels).map(|l| l as f64 * step).collect();
        Ok(Self {
            num_levels,
            step,
            values,
        })
    }

    pub fn num_levels(&self) -> usize {
        self.num_levels
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Index of the member closest to `theta`, or `None` if no member is
    /// within `tol` (circular distance).
    pub fn index_of(&self, theta: f64, tol: f64) -> Option<usize> {
        let t = wrap_phase(theta);
        self.values.iter().position(|&v| {
            let d = (t - v).abs();
            d.min(TAU - d) <= tol
        })
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.index_of(theta, 1e-9).is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhaseDomain {
    Continuous,
    Discrete(DiscretePhaseSet),
}

/// Phase shifts θ₁…θ_N of the IRS elements, each in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    thetas: Vec<f64>,
    domain: PhaseDomain,
}

impl PhaseVector {
    pub fn continuous(thetas: Vec<f64>) -> Self {
        Self {
            thetas: thetas.into_iter().map(wrap_phase).collect(),
            domain: PhaseDomain::Continuous,
        }
    }

    /// Builds a discrete vector; every phase must already be a member of `set`.
    pub fn discrete(thetas: Vec<f64>, set: &DiscretePhaseSet) -> Result<Self> {
        let snapped = thetas
            .iter()
            .map(|&t| {
                set.index_of(t, 1e-9)
                    .map(|i| set.values()[i])
                    .ok_or_else(|| Error::Domain(format!("phase {t} is not in the discrete set")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            thetas: snapped,
            domain: PhaseDomain::Discrete(set.clone()),
        })
    }

    pub fn from_indices(indices: &[usize], set: &DiscretePhaseSet) -> Self {
        Self {
            thetas: indices.iter().map(|&i| set.values()[i]).collect(),
            domain: PhaseDomain::Discrete(set.clone()),
        }
    }

    pub fn zeros(n: usize, domain: PhaseDomain) -> Self {
        Self {
            thetas: vec![0.0; n],
            domain,
        }
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn domain(&self) -> &PhaseDomain {
        &self.domain
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.domain, PhaseDomain::Discrete(_))
    }

    /// Sets one phase. Discrete vectors only accept members of their set.
    pub fn set(&mut self, i: usize, theta: f64) -> Result<()> {
        let len = self.thetas.len();
        let slot = self
            .thetas
            .get_mut(i)
            .ok_or(Error::IndexOutOfRange { index: i, len })?;
        *slot = match &self.domain {
            PhaseDomain::Continuous => wrap_phase(theta),
            PhaseDomain::Discrete(set) => set
                .index_of(theta, 1e-9)
                .map(|k| set.values()[k])
                .ok_or_else(|| Error::Domain(format!("phase {theta} is not in the discrete set")))?,
        };
        Ok(())
    }

    /// θ̂ = [e^{jθ₁}, …, e^{jθ_N}]ᵀ.
    pub fn unit_vector(&self) -> CVector {
        CVector::from_iterator(self.len(), self.thetas.iter().map(|&t| Complex64::cis(t)))
    }
}

/// Σᵢ e^{jθᵢ} cascadeᵢ, i.e. gᴴ Θ H_BIᴴ w for the cascade of that link.
pub fn effective_gain(phase: &PhaseVector, cascade: &CVector) -> Result<Complex64> {
    if phase.len() != cascade.len() {
        return Err(Error::Dimension {
            expected: cascade.len(),
            got: phase.len(),
        });
    }
    Ok(phase
        .thetas
        .iter()
        .zip(cascade.iter())
        .map(|(&t, &c)| Complex64::cis(t) * c)
        .sum())
}

/// [log₂((1 + |eff_D|²/σ_D²) / (1 + |eff_E|²/σ_E²))]⁺ in bits/s/Hz.
pub fn secrecy_rate(
    phase: &PhaseVector,
    cascade_bob: &CVector,
    cascade_eve: &CVector,
    noise_bob: f64,
    noise_eve: f64,
) -> Result<f64> {
    let eff_d = effective_gain(phase, cascade_bob)?;
    let eff_e = effective_gain(phase, cascade_eve)?;
    Ok(rate_from_ratio(snr_ratio(eff_d, eff_e, noise_bob, noise_eve)))
}

pub(crate) fn snr_ratio(eff_bob: Complex64, eff_eve: Complex64, noise_bob: f64, noise_eve: f64) -> f64 {
    (1.0 + eff_bob.norm_sqr() / noise_bob) / (1.0 + eff_eve.norm_sqr() / noise_eve)
}

/// Maps the SNR ratio to the clipped secrecy rate.
pub fn rate_from_ratio(ratio: f64) -> f64 {
    ratio.log2().max(0.0)
}

/// Receiver noise powers in W.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoisePowers {
    pub bob: f64,
    pub eve: f64,
}

impl NoisePowers {
    pub fn from_dbm(bob_dbm: f64, eve_dbm: f64) -> Self {
        Self {
            bob: dbm_to_watts(bob_dbm),
            eve: dbm_to_watts(eve_dbm),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bob > 0.0 && self.eve > 0.0 && self.bob.is_finite() && self.eve.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain("noise powers must be > 0".into()))
        }
    }
}

impl Default for NoisePowers {
    fn default() -> Self {
        Self::from_dbm(-85.0, -85.0)
    }
}

/// Per-element cascaded gains g_{k,i}* (H_BIᴴ w)ᵢ for Bob and Eve.
///
/// `eve_direct` is Eve's phase-independent term hᴴw from a direct BS link;
/// it is zero when Eve only listens to the IRS.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeVectors {
    pub bob: CVector,
    pub eve: CVector,
    pub eve_direct: Complex64,
    pub noise: NoisePowers,
}

impl CascadeVectors {
    pub fn new(bob: CVector, eve: CVector, noise: NoisePowers) -> Result<Self> {
        if bob.len() != eve.len() {
            return Err(Error::Dimension {
                expected: bob.len(),
                got: eve.len(),
            });
        }
        noise.validate()?;
        Ok(Self {
            bob,
            eve,
            eve_direct: Complex64::new(0.0, 0.0),
            noise,
        })
    }

    pub fn len(&self) -> usize {
        self.bob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bob.is_empty()
    }

    /// (eff_D, eff_E) at `phase`, including Eve's direct term.
    pub fn effective_gains(&self, phase: &PhaseVector) -> Result<(Complex64, Complex64)> {
        Ok((
            effective_gain(phase, &self.bob)?,
            effective_gain(phase, &self.eve)? + self.eve_direct,
        ))
    }

    /// The fractional objective (1 + SNR_D) / (1 + SNR_E).
    pub fn ratio(&self, phase: &PhaseVector) -> Result<f64> {
        let (d, e) = self.effective_gains(phase)?;
        Ok(snr_ratio(d, e, self.noise.bob, self.noise.eve))
    }

    pub fn secrecy_rate(&self, phase: &PhaseVector) -> Result<f64> {
        self.ratio(phase).map(rate_from_ratio)
    }
}

/// Cascades for beamformer `w`: entry i is conj(g_{k,i}) · (H_BIᴴ w)ᵢ.
pub fn build_cascades(channels: &ChannelSet, w: &CVector, noise: NoisePowers) -> Result<CascadeVectors> {
    let m = channels.num_bs();
    let n = channels.num_irs();
    if w.len() != m {
        return Err(Error::Dimension {
            expected: m,
            got: w.len(),
        });
    }
    let check = |v: &CVector, dim: usize| {
        if v.len() == dim {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: dim,
                got: v.len(),
            })
        }
    };
    check(&channels.irs_bob.vector, n)?;
    let hw = channels.bs_irs.apply(w);
    let cascade = |g: &CVector| g.conjugate().component_mul(&hw);

    let bob = cascade(&channels.irs_bob.vector);
    let eve = match &channels.irs_eve {
        Some(ch) => {
            check(&ch.vector, n)?;
            cascade(&ch.vector)
        }
        None => CVector::zeros(n),
    };
    let mut out = CascadeVectors::new(bob, eve, noise)?;
    if let Some(direct) = &channels.bs_eve {
        check(&direct.vector, m)?;
        out.eve_direct = direct.vector.dotc(w);
    }
    Ok(out)
}
