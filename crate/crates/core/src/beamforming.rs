//! Transmit beamforming at the BS: the closed-form MRT solution, the
//! generalized-eigenvector beamformer used when Eve has a direct BS link, and
//! the OMP split of a digital beamformer into analog and baseband parts.

use nalgebra::{Cholesky, SymmetricEigen};
use num_complex::Complex64;

use crate::channel::{steering_ula, ArrayGeometry, CMatrix, CVector};
use crate::error::{Error, Result};

/// Grid of candidate ULA responses, one column per spatial frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringDictionary {
    atoms: CMatrix,
    angles: Vec<f64>,
}

impl SteeringDictionary {
    /// `num_atoms` responses with sin(angle) uniform on [−1, 1).
    pub fn uniform(geometry: &ArrayGeometry, num_atoms: usize) -> Result<Self> {
        if num_atoms == 0 {
            return Err(Error::Config("dictionary needs at least one atom".into()));
        }
        let angles: Vec<f64> = (0..num_atoms)
            .map(|k| (-1.0 + 2.0 * k as f64 / num_atoms as f64).asin())
            .collect();
        let columns = angles
            .iter()
            .map(|&a| steering_ula(geometry, a))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            atoms: CMatrix::from_columns(&columns),
            angles,
        })
    }

    /// The default 2M-point grid.
    pub fn for_array(geometry: &ArrayGeometry) -> Result<Self> {
        Self::uniform(geometry, 2 * geometry.num_elements())
    }

    pub fn atoms(&self) -> &CMatrix {
        &self.atoms
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.ncols()
    }

    pub fn angle(&self, k: usize) -> f64 {
        self.angles[k]
    }
}

/// w^opt = √P_s · b / ‖b‖.
pub fn mrt_beamformer(b: &CVector, power: f64) -> Result<CVector> {
    if !(power.is_finite() && power > 0.0) {
        return Err(Error::Domain(format!("transmit power must be > 0, got {power}")));
    }
    let norm = b.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::DegenerateChannel("BS steering vector is zero"));
    }
    Ok(b * Complex64::new(power.sqrt() / norm, 0.0))
}

/// (σ_D² + |h_Dᴴw|²) / (σ_E² + |h_Eᴴw|²).
pub fn direct_link_ratio(w: &CVector, h_bob: &CVector, h_eve: &CVector, noise_bob: f64, noise_eve: f64) -> f64 {
    (noise_bob + h_bob.dotc(w).norm_sqr()) / (noise_eve + h_eve.dotc(w).norm_sqr())
}

/// Beamformer maximizing [`direct_link_ratio`] over ‖w‖² ≤ P_s.
///
/// Principal generalized eigenvector of (σ_D²/P·I + h_D h_Dᴴ, σ_E²/P·I + h_E h_Eᴴ),
/// obtained by Cholesky whitening of the second matrix.
pub fn gevd_beamformer(
    h_bob: &CVector,
    h_eve: &CVector,
    noise_bob: f64,
    noise_eve: f64,
    power: f64,
) -> Result<CVector> {
    if !(power.is_finite() && power > 0.0) {
        return Err(Error::Domain(format!("transmit power must be > 0, got {power}")));
    }
    let m = h_bob.len();
    if h_eve.len() != m {
        return Err(Error::Dimension {
            expected: m,
            got: h_eve.len(),
        });
    }
    let eye = CMatrix::identity(m, m);
    let a = &eye * Complex64::from(noise_bob / power) + h_bob * h_bob.adjoint();
    let b = &eye * Complex64::from(noise_eve / power) + h_eve * h_eve.adjoint();

    let chol = Cholesky::new(b).ok_or(Error::DegenerateChannel("noise-plus-leakage matrix is not positive definite"))?;
    let l = chol.l();
    // C = L⁻¹ A L⁻ᴴ
    let la = l
        .solve_lower_triangular(&a)
        .expect("Cholesky factor has a nonzero diagonal");
    let c = l
        .solve_lower_triangular(&la.adjoint())
        .expect("Cholesky factor has a nonzero diagonal")
        .adjoint();
    let c = (&c + c.adjoint()) * Complex64::from(0.5);
    let eig = SymmetricEigen::new(c);
    let top = eig.eigenvalues.imax();
    let u = eig.eigenvectors.column(top).into_owned();
    let dir = l
        .adjoint()
        .solve_upper_triangular(&u)
        .expect("Cholesky factor has a nonzero diagonal");
    Ok(&dir * Complex64::from(power.sqrt() / dir.norm()))
}

/// Analog/baseband split w ≈ F_RF f_BB with `analog` columns drawn from a
/// steering dictionary.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridFactorization {
    pub analog: CMatrix,
    pub baseband: CVector,
    pub selected: Vec<usize>,
    /// Residual norm after each OMP iteration (before the final rescale).
    pub residual_norms: Vec<f64>,
}

impl HybridFactorization {
    pub fn combined(&self) -> CVector {
        &self.analog * &self.baseband
    }
}

/// Orthogonal matching pursuit over `dictionary` with `rf_chains` atoms.
///
/// Each iteration picks the atom most correlated with the residual, refits the
/// baseband by least squares over all picked atoms, and updates the residual.
/// The final baseband is rescaled so ‖F_RF f_BB‖ = ‖w‖.
pub fn omp_hybrid_decompose(
    w: &CVector,
    dictionary: &SteeringDictionary,
    rf_chains: usize,
) -> Result<HybridFactorization> {
    let atoms = dictionary.atoms();
    if rf_chains == 0 {
        return Err(Error::Config("need at least one RF chain".into()));
    }
    if rf_chains > dictionary.num_atoms() {
        return Err(Error::Config(format!(
            "{rf_chains} RF chains exceed the {} dictionary atoms",
            dictionary.num_atoms()
        )));
    }
    if atoms.nrows() != w.len() {
        return Err(Error::Dimension {
            expected: atoms.nrows(),
            got: w.len(),
        });
    }

    let mut selected: Vec<usize> = Vec::with_capacity(rf_chains);
    let mut residual = w.clone();
    let mut residual_norms = Vec::with_capacity(rf_chains);
    let mut analog = CMatrix::zeros(w.len(), 0);
    let mut baseband = CVector::zeros(0);

    for _ in 0..rf_chains {
        let correlation = atoms.ad_mul(&residual);
        let best = (0..atoms.ncols())
            .filter(|k| !selected.contains(k))
            .fold(None::<(usize, f64)>, |acc, k| {
                let c = correlation[k].norm();
                match acc {
                    Some((_, bc)) if bc >= c => acc,
                    _ => Some((k, c)),
                }
            })
            .map(|(k, _)| k)
            .expect("rf_chains <= num_atoms leaves a candidate");
        selected.push(best);
        analog = CMatrix::from_columns(
            &selected.iter().map(|&k| atoms.column(k)).collect::<Vec<_>>(),
        );
        baseband = analog
            .clone()
            .svd(true, true)
            .solve(w, 1e-12)
            .map_err(|e| Error::Config(format!("least-squares refit failed: {e}")))?;
        residual = w - &analog * &baseband;
        residual_norms.push(residual.norm());
    }

    let achieved = (&analog * &baseband).norm();
    if achieved > 0.0 {
        baseband *= Complex64::from(w.norm() / achieved);
    }
    Ok(HybridFactorization {
        analog,
        baseband,
        selected,
        residual_norms,
    })
}

/// Fully digital beamformer together with its hybrid factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSolution {
    pub digital_full: CVector,
    pub analog: CMatrix,
    pub baseband: CVector,
    pub power_budget: f64,
}

impl BeamformerSolution {
    pub fn new(
        digital_full: CVector,
        dictionary: &SteeringDictionary,
        rf_chains: usize,
        power_budget: f64,
    ) -> Result<Self> {
        let hybrid = omp_hybrid_decompose(&digital_full, dictionary, rf_chains)?;
        Ok(Self {
            digital_full,
            analog: hybrid.analog,
            baseband: hybrid.baseband,
            power_budget,
        })
    }

    pub fn hybrid(&self) -> CVector {
        &self.analog * &self.baseband
    }

    pub fn relative_reconstruction_error(&self) -> f64 {
        (self.hybrid() - &self.digital_full).norm() / self.digital_full.norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{complex_gaussian, stream};
    use approx::assert_relative_eq;

    fn random_vector(m: usize, seed: u64) -> CVector {
        let mut rng = stream(seed);
        CVector::from_fn(m, |_, _| complex_gaussian(&mut rng))
    }

    #[test]
    fn mrt_on_unit_vector() {
        let mut b = CVector::zeros(4);
        b[0] = Complex64::from(1.0);
        let w = mrt_beamformer(&b, 4.0).unwrap();
        assert_relative_eq!(w[0].re, 2.0);
        assert!(w.iter().skip(1).all(|x| x.norm() == 0.0));
        assert!(matches!(mrt_beamformer(&CVector::zeros(3), 1.0), Err(Error::DegenerateChannel(_))));
        assert!(mrt_beamformer(&b, 0.0).is_err());
    }

    #[test]
    fn mrt_power_and_gain() {
        let b = random_vector(16, 4);
        let w = mrt_beamformer(&b, 0.3).unwrap();
        assert_relative_eq!(w.norm_squared(), 0.3, max_relative = 1e-12);
        assert_relative_eq!(b.dotc(&w).norm_sqr(), 0.3 * b.norm_squared(), max_relative = 1e-12);
    }

    #[test]
    fn gevd_without_eve_is_mrt() {
        let h = random_vector(8, 1);
        let w = gevd_beamformer(&h, &CVector::zeros(8), 1e-3, 1e-3, 2.0).unwrap();
        let mrt = mrt_beamformer(&h, 2.0).unwrap();
        assert_relative_eq!(w.norm_squared(), 2.0, max_relative = 1e-12);
        assert_relative_eq!(mrt.dotc(&w).norm(), 2.0, max_relative = 1e-10);
    }

    #[test]
    fn gevd_beats_mrt() {
        let hd = random_vector(6, 2);
        let he = random_vector(6, 3);
        let w = gevd_beamformer(&hd, &he, 0.1, 0.1, 1.0).unwrap();
        let mrt = mrt_beamformer(&hd, 1.0).unwrap();
        assert!(direct_link_ratio(&w, &hd, &he, 0.1, 0.1) >= direct_link_ratio(&mrt, &hd, &he, 0.1, 0.1));
        assert!(gevd_beamformer(&hd, &CVector::zeros(5), 0.1, 0.1, 1.0).is_err());
    }

    #[test]
    fn omp_recovers_single_atom() {
        let g = ArrayGeometry::ula(8, 0.5).unwrap();
        let dict = SteeringDictionary::for_array(&g).unwrap();
        let w = dict.atoms().column(5).into_owned() * Complex64::new(0.3, -1.2);
        let h = omp_hybrid_decompose(&w, &dict, 1).unwrap();
        assert_eq!(h.selected, vec![5]);
        assert!((h.combined() - &w).norm() <= 1e-10);
        let modulus = 1.0 / 8f64.sqrt();
        assert!(h.analog.iter().all(|x| (x.norm() - modulus).abs() < 1e-10));
    }

    #[test]
    fn omp_residual_non_increasing() {
        let g = ArrayGeometry::ula(16, 0.5).unwrap();
        let dict = SteeringDictionary::for_array(&g).unwrap();
        let w = random_vector(16, 9);
        let h = omp_hybrid_decompose(&w, &dict, 10).unwrap();
        assert!(h.residual_norms.windows(2).all(|p| p[1] <= p[0] + 1e-12));
        assert_relative_eq!(h.combined().norm(), w.norm(), max_relative = 1e-12);
    }

    #[test]
    fn omp_rejects_too_many_chains() {
        let g = ArrayGeometry::ula(2, 0.5).unwrap();
        let dict = SteeringDictionary::for_array(&g).unwrap();
        let w = random_vector(2, 1);
        assert!(matches!(omp_hybrid_decompose(&w, &dict, 5), Err(Error::Config(_))));
    }
}
