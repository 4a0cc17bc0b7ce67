//! Semidefinite relaxation of the phase design.
//!
//! With Φ = θ̂*θ̂*ᴴ and the Charnes-Cooper substitution X = μΦ the fractional
//! objective becomes the linear SDP
//!
//! ```text
//! max tr(R̂_D X)  s.t.  tr(R̂_E X) = 1,  X_ii = μ ∀i,  X ⪰ 0.
//! ```
//!
//! The complex problem is solved through its 2N×2N real embedding, a phase
//! vector is recovered by Gaussian randomization and finally quantized.

pub mod ipm;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;

use crate::bcd::quantize_phase;
use crate::channel::{CMatrix, CVector, ChannelSet};
use crate::error::{Error, Result};
use crate::rng::complex_gaussian;
use crate::secrecy::{build_cascades, CascadeVectors, DiscretePhaseSet, NoisePowers, PhaseVector};

pub use ipm::{DenseSdp, IpmOptions, IpmSolution, KktResiduals};

pub const DEFAULT_GAUSSIAN_SAMPLES: usize = 100;

/// σ₂/σ₁ below which Φ is treated as rank one.
const RANK_ONE_THRESHOLD: f64 = 1e-6;

/// R̂_k = (1/N) I + v_k v_kᴴ / σ_k², with v_k the cascade of link k.
#[derive(Debug, Clone, PartialEq)]
pub struct SdrMatrices {
    pub r_bob: CMatrix,
    pub r_eve: CMatrix,
}

impl SdrMatrices {
    pub fn dim(&self) -> usize {
        self.r_bob.nrows()
    }

    /// θ̂ᵀ R θ̂* for both matrices.
    pub fn quadratic_forms(&self, phase: &PhaseVector) -> (f64, f64) {
        let psi = phase.unit_vector().conjugate();
        let q = |r: &CMatrix| psi.dotc(&(r * &psi)).re;
        (q(&self.r_bob), q(&self.r_eve))
    }

    pub fn ratio(&self, phase: &PhaseVector) -> f64 {
        let (d, e) = self.quadratic_forms(phase);
        d / e
    }
}

/// Builds R̂_D, R̂_E from cascades.
///
/// A direct BS→Eve term is representable only when Eve sees no IRS path; it
/// then folds into the identity term of R̂_E.
pub fn sdr_matrices_from_cascades(cascades: &CascadeVectors) -> Result<SdrMatrices> {
    let n = cascades.len();
    if n == 0 {
        return Err(Error::Domain("no reflecting elements".into()));
    }
    let direct = cascades.eve_direct.norm_sqr();
    if direct > 0.0 && cascades.eve.iter().any(|c| c.norm_sqr() > 0.0) {
        return Err(Error::Unsupported(
            "SDR with both a direct and an IRS-reflected eavesdropper path",
        ));
    }
    let eye = CMatrix::identity(n, n);
    let build = |v: &CVector, noise: f64, base: f64| {
        &eye * Complex64::from(base / n as f64) + v * v.adjoint() * Complex64::from(1.0 / noise)
    };
    Ok(SdrMatrices {
        r_bob: build(&cascades.bob, cascades.noise.bob, 1.0),
        r_eve: build(&cascades.eve, cascades.noise.eve, 1.0 + direct / cascades.noise.eve),
    })
}

pub fn build_sdr_matrices(channels: &ChannelSet, w: &CVector, noise: NoisePowers) -> Result<SdrMatrices> {
    sdr_matrices_from_cascades(&build_cascades(channels, w, noise)?)
}

/// Real symmetric embedding [[Re, −Im], [Im, Re]] of a Hermitian matrix.
pub fn real_embedding(h: &CMatrix) -> DMatrix<f64> {
    let n = h.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let v = h[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => v.re,
            (true, false) => -v.im,
            (false, true) => v.im,
        }
    })
}

/// Hermitian matrix recovered from a (possibly unstructured) real embedding by
/// averaging the two copies of each block.
pub fn complex_from_embedding(y: &DMatrix<f64>) -> CMatrix {
    let n = y.nrows() / 2;
    CMatrix::from_fn(n, n, |r, c| {
        let re = 0.5 * (y[(r, c)] + y[(r + n, c + n)]);
        let im = 0.5 * (y[(r + n, c)] - y[(r, c + n)]);
        Complex64::new(re, im)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub x: CMatrix,
    pub mu: f64,
    /// tr(R̂_D X)
    pub objective: f64,
    pub kkt_residuals: KktResiduals,
    pub iterations: usize,
}

impl SdpSolution {
    /// Φ = X / μ, the relaxed phase Gram matrix with unit diagonal.
    pub fn gram(&self) -> CMatrix {
        &self.x * Complex64::from(1.0 / self.mu)
    }
}

/// Largest λ with R̂_D v = λ R̂_E v, an upper bound on the ratio for any
/// phase, together with its eigenvector v.
pub fn generalized_max_eigenpair(r_bob: &CMatrix, r_eve: &CMatrix) -> Result<(f64, CVector)> {
    let chol = Cholesky::new(r_eve.clone()).ok_or(Error::DegenerateChannel("R_E is not positive definite"))?;
    let l = chol.l();
    let la = l
        .solve_lower_triangular(r_bob)
        .expect("Cholesky factor has a nonzero diagonal");
    let m = l
        .solve_lower_triangular(&la.adjoint())
        .expect("Cholesky factor has a nonzero diagonal");
    let m = (&m + m.adjoint()) * Complex64::from(0.5);
    let eig = SymmetricEigen::new(m);
    let top = eig.eigenvalues.imax();
    let v = l
        .adjoint()
        .solve_upper_triangular(&eig.eigenvectors.column(top).into_owned())
        .expect("Cholesky factor has a nonzero diagonal");
    Ok((eig.eigenvalues[top], v))
}

/// Solves the Charnes-Cooper SDP. `tolerance` bounds every relative KKT residual.
pub fn solve_sdp(matrices: &SdrMatrices, tolerance: f64) -> Result<SdpSolution> {
    let n = matrices.dim();
    if matrices.r_eve.nrows() != n {
        return Err(Error::Dimension {
            expected: n,
            got: matrices.r_eve.nrows(),
        });
    }
    // The optimum lies between the ratio at the unit-modulus projection of the
    // principal generalized eigenvector and that eigenvalue. Dividing the
    // objective by the upper end keeps the normalization multiplier O(1); the
    // lower end sets the scale of the duality-gap test.
    let (upper, v) = generalized_max_eigenpair(&matrices.r_bob, &matrices.r_eve)?;
    let projected = v.map(|z| if z.norm() > 0.0 { z / z.norm() } else { Complex64::from(1.0) });
    let form = |r: &CMatrix| projected.dotc(&(r * &projected)).re;
    let lower = form(&matrices.r_bob) / form(&matrices.r_eve);
    let a_eve = real_embedding(&matrices.r_eve) * 0.5;
    let c_scale = 1.0 / (upper * a_eve.norm());
    let c = real_embedding(&matrices.r_bob) * (-0.5 * c_scale);
    let mut a = vec![a_eve];
    let mut b = vec![1.0];
    for i in 1..n {
        let mut e = DMatrix::<f64>::zeros(2 * n, 2 * n);
        e[(i, i)] = 0.5;
        e[(i + n, i + n)] = 0.5;
        e[(0, 0)] = -0.5;
        e[(n, n)] = -0.5;
        a.push(e);
        b.push(0.0);
    }
    let problem = DenseSdp {
        c,
        a,
        b: DVector::from_vec(b),
    };
    let sol = problem.solve(&IpmOptions {
        tolerance,
        normalize_objective: false,
        gap_floor: lower * c_scale,
        ..IpmOptions::default()
    })?;

    let x = complex_from_embedding(&sol.x);
    let x = (&x + x.adjoint()) * Complex64::from(0.5);
    // restore tr(R̂_E X) = 1 exactly; the ratio objective is scale invariant
    let x = &x * Complex64::from(1.0 / (&matrices.r_eve * &x).trace().re);
    let mu = x.diagonal().iter().map(|d| d.re).sum::<f64>() / n as f64;
    let objective = (&matrices.r_bob * &x).trace().re;
    Ok(SdpSolution {
        x,
        mu,
        objective,
        kkt_residuals: sol.residuals,
        iterations: sol.iterations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomizationResult {
    pub phase: PhaseVector,
    /// θ̂ᵀR̂_Dθ̂* / θ̂ᵀR̂_Eθ̂* at `phase`.
    pub objective: f64,
    /// Samples actually drawn; zero when the rank-one shortcut applied.
    pub samples_drawn: usize,
}

fn phases_of(psi: &CVector) -> PhaseVector {
    // Φ ≈ ψψᴴ with ψ = θ̂*, hence θᵢ = −∠ψᵢ
    PhaseVector::continuous(psi.iter().map(|z| -z.arg()).collect())
}

/// Recovers a unit-modulus vector from the relaxed solution.
///
/// Draws ψ ~ CN(0, Φ), maps each draw to θᵢ = −∠ψᵢ and keeps the best ratio.
/// When Φ is numerically rank one the principal eigenvector is used directly.
pub fn gaussian_randomize<R: Rng + ?Sized>(
    solution: &SdpSolution,
    num_samples: usize,
    matrices: &SdrMatrices,
    rng: &mut R,
) -> Result<RandomizationResult> {
    if num_samples == 0 {
        return Err(Error::Domain("need at least one randomization sample".into()));
    }
    let n = matrices.dim();
    let gram = solution.gram();
    let eig = SymmetricEigen::new((&gram + gram.adjoint()) * Complex64::from(0.5));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let top = eig.eigenvalues[order[0]].max(0.0);
    let second = if n > 1 { eig.eigenvalues[order[1]].max(0.0) } else { 0.0 };

    if top > 0.0 && second / top < RANK_ONE_THRESHOLD {
        let phase = phases_of(&eig.eigenvectors.column(order[0]).into_owned());
        let objective = matrices.ratio(&phase);
        return Ok(RandomizationResult {
            phase,
            objective,
            samples_drawn: 0,
        });
    }

    // L = U Λ^{1/2}, so L z ~ CN(0, Φ)
    let mut factor = eig.eigenvectors.clone();
    for (k, mut col) in factor.column_iter_mut().enumerate() {
        col *= Complex64::from(eig.eigenvalues[k].max(0.0).sqrt());
    }
    let mut best: Option<(PhaseVector, f64)> = None;
    for _ in 0..num_samples {
        let z = CVector::from_fn(n, |_, _| complex_gaussian(rng));
        let phase = phases_of(&(&factor * z));
        let objective = matrices.ratio(&phase);
        if best.as_ref().is_none_or(|(_, b)| objective > *b) {
            best = Some((phase, objective));
        }
    }
    let (phase, objective) = best.expect("at least one sample");
    Ok(RandomizationResult {
        phase,
        objective,
        samples_drawn: num_samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdpOptions {
    pub tolerance: f64,
    pub num_samples: usize,
}

impl Default for SdpOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            num_samples: DEFAULT_GAUSSIAN_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpPipelineResult {
    /// Quantized phases, members of F.
    pub phase: PhaseVector,
    /// Exact ratio objective of `phase`.
    pub objective: f64,
    pub relaxed: SdpSolution,
    pub continuous: RandomizationResult,
}

/// Build → solve → randomize → quantize each element to the nearest member of F.
pub fn sdp_pipeline_from_cascades<R: Rng + ?Sized>(
    cascades: &CascadeVectors,
    set: &DiscretePhaseSet,
    options: &SdpOptions,
    rng: &mut R,
) -> Result<SdpPipelineResult> {
    let matrices = sdr_matrices_from_cascades(cascades)?;
    let relaxed = solve_sdp(&matrices, options.tolerance)?;
    let continuous = gaussian_randomize(&relaxed, options.num_samples, &matrices, rng)?;
    let quantized: Vec<f64> = continuous
        .phase
        .thetas()
        .iter()
        .map(|&t| quantize_phase(t, set))
        .collect();
    let phase = PhaseVector::discrete(quantized, set)?;
    let objective = cascades.ratio(&phase)?;
    Ok(SdpPipelineResult {
        phase,
        objective,
        relaxed,
        continuous,
    })
}

pub fn sdp_pipeline<R: Rng + ?Sized>(
    channels: &ChannelSet,
    w: &CVector,
    noise: NoisePowers,
    set: &DiscretePhaseSet,
    options: &SdpOptions,
    rng: &mut R,
) -> Result<SdpPipelineResult> {
    sdp_pipeline_from_cascades(&build_cascades(channels, w, noise)?, set, options, rng)
}
