//! Dense primal-dual interior-point method for small real SDPs in standard form
//!
//! ```text
//! min ⟨C, X⟩  s.t.  ⟨A_k, X⟩ = b_k,  X ⪰ 0
//! max bᵀy     s.t.  Σ y_k A_k + Z = C,  Z ⪰ 0
//! ```
//!
//! Search directions are HKM (X ΔZ Z⁻¹ linearization, symmetrized) with a
//! Mehrotra predictor-corrector. Starts infeasible; all factorizations dense.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpmOptions {
    pub tolerance: f64,
    pub max_iters: usize,
    /// Rescale C to unit Frobenius norm. Disable when the caller has already
    /// scaled C so that the optimal multipliers are O(1).
    pub normalize_objective: bool,
    /// Additive term κ in the gap denominator κ + |⟨C,X⟩| + |bᵀy|, in the
    /// solver's scaled units. Set it to the expected objective magnitude when
    /// that is far from 1.
    pub gap_floor: f64,
}

impl Default for IpmOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iters: 100,
            normalize_objective: true,
            gap_floor: 1.0,
        }
    }
}

/// Relative KKT residuals on the normalized problem.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KktResiduals {
    /// ‖b − A(X)‖ / (1 + ‖b‖)
    pub primal: f64,
    /// ‖C − Z − Aᵀy‖_F / (1 + ‖C‖_F)
    pub dual: f64,
    /// |⟨C,X⟩ − bᵀy| / (κ + |⟨C,X⟩| + |bᵀy|)
    pub gap: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IpmSolution {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub z: DMatrix<f64>,
    /// ⟨C, X⟩ in the caller's (unnormalized) units.
    pub primal_objective: f64,
    /// bᵀy in the caller's units.
    pub dual_objective: f64,
    pub residuals: KktResiduals,
    pub iterations: usize,
}

/// Problem data. Constraint matrices must be symmetric and linearly independent.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSdp {
    pub c: DMatrix<f64>,
    pub a: Vec<DMatrix<f64>>,
    pub b: DVector<f64>,
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest α with X + αΔX ⪰ 0 (∞ if ΔX ⪰ 0 direction never leaves the cone).
fn max_step(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> Option<f64> {
    let lmax = match Cholesky::new(x.clone()) {
        Some(chol) => {
            let l = chol.l();
            let t = l.solve_lower_triangular(&(-dx))?;
            let t = l.solve_lower_triangular(&t.transpose())?;
            SymmetricEigen::new(symmetrize(&t)).eigenvalues.max()
        }
        None => {
            // X^{-1/2} from a clamped eigendecomposition
            let w = inverse_sqrt(x)?;
            SymmetricEigen::new(symmetrize(&(&w * (-dx) * &w))).eigenvalues.max()
        }
    };
    Some(if lmax > 0.0 { 1.0 / lmax } else { f64::INFINITY })
}

fn clamped_eigen(m: &DMatrix<f64>) -> Option<SymmetricEigen<f64, nalgebra::Dyn>> {
    let eig = SymmetricEigen::new(symmetrize(m));
    let top = eig.eigenvalues.max();
    (top > 0.0 && top.is_finite()).then_some(eig)
}

fn spectral_map(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> Option<DMatrix<f64>> {
    let eig = clamped_eigen(m)?;
    let floor = eig.eigenvalues.max() * f64::EPSILON;
    let d = eig.eigenvalues.map(|l| f(l.max(floor)));
    let q = &eig.eigenvectors;
    Some(q * DMatrix::from_diagonal(&d) * q.transpose())
}

fn inverse_sqrt(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    spectral_map(m, |l| 1.0 / l.sqrt())
}

fn spd_inverse(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    match Cholesky::new(m.clone()) {
        Some(c) => Some(c.inverse()),
        None => spectral_map(m, |l| 1.0 / l),
    }
}

enum SchurFactor {
    Cholesky(Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl SchurFactor {
    fn new(m: DMatrix<f64>) -> Option<Self> {
        match Cholesky::new(m.clone()) {
            Some(c) => Some(SchurFactor::Cholesky(c)),
            None => {
                let lu = m.lu();
                lu.is_invertible().then_some(SchurFactor::Lu(lu))
            }
        }
    }

    fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        match self {
            SchurFactor::Cholesky(c) => c.solve(rhs),
            SchurFactor::Lu(lu) => lu.solve(rhs).unwrap_or_else(|| DVector::zeros(rhs.len())),
        }
    }
}

struct Scaled {
    c: DMatrix<f64>,
    a: Vec<DMatrix<f64>>,
    b: DVector<f64>,
    c_scale: f64,
    row_scale: Vec<f64>,
}

impl DenseSdp {
    pub fn dim(&self) -> usize {
        self.c.nrows()
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim();
        if self.c.ncols() != n {
            return Err(Error::Dimension {
                expected: n,
                got: self.c.ncols(),
            });
        }
        if self.a.len() != self.b.len() {
            return Err(Error::Dimension {
                expected: self.a.len(),
                got: self.b.len(),
            });
        }
        for a in &self.a {
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: a.nrows(),
                });
            }
        }
        Ok(())
    }

    fn scaled(&self, normalize_objective: bool) -> Scaled {
        let c_norm = self.c.norm();
        let c_scale = if normalize_objective && c_norm > 0.0 { 1.0 / c_norm } else { 1.0 };
        let row_scale: Vec<f64> = self
            .a
            .iter()
            .map(|a| {
                let n = a.norm();
                if n > 0.0 {
                    1.0 / n
                } else {
                    1.0
                }
            })
            .collect();
        Scaled {
            c: &self.c * c_scale,
            a: self.a.iter().zip(&row_scale).map(|(a, s)| a * *s).collect(),
            b: DVector::from_iterator(self.b.len(), self.b.iter().zip(&row_scale).map(|(b, s)| b * s)),
            c_scale,
            row_scale,
        }
    }

    pub fn solve(&self, opts: &IpmOptions) -> Result<IpmSolution> {
        self.validate()?;
        let n = self.dim();
        let m = self.a.len();
        let p = self.scaled(opts.normalize_objective);
        let nf = n as f64;

        let op_a = |x: &DMatrix<f64>| DVector::from_iterator(m, p.a.iter().map(|a| inner(a, x)));
        let op_at = |y: &DVector<f64>| {
            p.a.iter()
                .zip(y.iter())
                .fold(DMatrix::zeros(n, n), |acc, (a, &yk)| acc + a * yk)
        };

        let b_norm = p.b.norm();
        let c_norm = p.c.norm();
        let a_max = p.a.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let xi = (1..=m)
            .map(|k| (1.0 + p.b[k - 1].abs()) / (1.0 + p.a[k - 1].norm()))
            .fold(10f64.max(nf.sqrt()), f64::max);
        let eta = (1.0 + a_max.max(c_norm)) / nf.sqrt();
        let eta = eta.max(10f64.max(nf.sqrt()));
        let mut x = DMatrix::<f64>::identity(n, n) * xi;
        let mut z = DMatrix::<f64>::identity(n, n) * eta;
        let mut y = DVector::<f64>::zeros(m);

        let residuals = |x: &DMatrix<f64>, y: &DVector<f64>, z: &DMatrix<f64>| {
            let rp = &p.b - op_a(x);
            let rd = &p.c - z - op_at(y);
            let pobj = inner(&p.c, x);
            let dobj = p.b.dot(y);
            let dual = rd.norm() / (1.0 + c_norm);
            (
                rd,
                KktResiduals {
                    primal: rp.norm() / (1.0 + b_norm),
                    dual,
                    gap: (pobj - dobj).abs() / (opts.gap_floor + pobj.abs() + dobj.abs()),
                },
            )
        };

        let mut iterations = 0;
        loop {
            let (rd, kkt) = residuals(&x, &y, &z);
            if kkt.max() <= opts.tolerance {
                let pobj = inner(&p.c, &x) / p.c_scale;
                let y_orig = DVector::from_iterator(
                    m,
                    y.iter().zip(&p.row_scale).map(|(v, s)| v * s / p.c_scale),
                );
                let dobj = self.b.dot(&y_orig);
                return Ok(IpmSolution {
                    x,
                    y: y_orig,
                    z: z / p.c_scale,
                    primal_objective: pobj,
                    dual_objective: dobj,
                    residuals: kkt,
                    iterations,
                });
            }
            let done = iterations;
            let fail = move || Error::SolverFailure {
                iterations: done,
                primal: kkt.primal,
                dual: kkt.dual,
                gap: kkt.gap,
            };
            if iterations >= opts.max_iters {
                return Err(fail());
            }
            iterations += 1;

            let mu = inner(&x, &z) / nf;
            let z_inv = spd_inverse(&z).ok_or_else(fail)?;

            // Schur complement M_ij = ⟨A_i, X A_j Z⁻¹⟩
            let g: Vec<DMatrix<f64>> = p.a.iter().map(|a| &x * a * &z_inv).collect();
            let mut schur = DMatrix::<f64>::zeros(m, m);
            for j in 0..m {
                for i in 0..m {
                    schur[(i, j)] = inner(&p.a[i], &g[j]);
                }
            }
            let schur = symmetrize(&schur);
            let schur = SchurFactor::new(schur).ok_or_else(fail)?;

            let x_rd_zinv = &x * &rd * &z_inv;
            let a_x_rd_zinv = op_a(&x_rd_zinv);
            let a_zinv = op_a(&z_inv);

            let direction = |sigma: f64, corr: Option<&DMatrix<f64>>| {
                let mut rhs = &p.b - &a_zinv * (sigma * mu) + &a_x_rd_zinv;
                if let Some(c) = corr {
                    rhs += op_a(c);
                }
                let dy = schur.solve(&rhs);
                let dz = symmetrize(&(&rd - op_at(&dy)));
                let mut dx = &z_inv * (sigma * mu) - &x - &x * &dz * &z_inv;
                if let Some(c) = corr {
                    dx -= c;
                }
                (symmetrize(&dx), dy, dz)
            };
            let steps = |dx: &DMatrix<f64>, dz: &DMatrix<f64>| -> Option<(f64, f64)> {
                Some((max_step(&x, dx)?, max_step(&z, dz)?))
            };

            // predictor
            let (dx_a, _, dz_a) = direction(0.0, None);
            let (ap, ad) = steps(&dx_a, &dz_a).ok_or_else(fail)?;
            let (ap, ad) = (ap.min(1.0), ad.min(1.0));
            let mu_aff = inner(&(&x + &dx_a * ap), &(&z + &dz_a * ad)) / nf;
            let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

            // corrector
            let corr = &dx_a * &dz_a * &z_inv;
            let (dx, dy, dz) = direction(sigma, Some(&corr));
            let (ap, ad) = steps(&dx, &dz).ok_or_else(fail)?;
            let tau = 0.98;
            let ap = (tau * ap).min(1.0);
            let ad = (tau * ad).min(1.0);

            x = symmetrize(&(&x + &dx * ap));
            y += &dy * ad;
            z = symmetrize(&(&z + &dz * ad));
        }
    }
}
