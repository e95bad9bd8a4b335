use faer::{Mat, MatRef};
use rayon::prelude::*;

use super::{pcg_solve, CsrMatrix, LdltFactor, SolveError};

/// Relative residual every solve must reach.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SolverKind {
    /// Sparse LDLᵀ, factorized once.
    #[default]
    Direct,
    /// Jacobi-preconditioned conjugate gradients.
    ConjugateGradient,
}

#[derive(Clone, Debug)]
enum Backend {
    Direct(LdltFactor),
    Cg { inv_diag: Vec<f64> },
}

/// A symmetric positive-definite sparse system prepared for repeated solves.
///
/// Immutable once built; `solve` takes `&self` and may be called from
/// several threads at once.
#[derive(Clone, Debug)]
pub struct SpdSystem {
    matrix: CsrMatrix,
    backend: Backend,
}

/// Prepares `A + tW` for repeated solves with the direct solver.
pub fn factorize(mass: &[f64], stiffness: &CsrMatrix, t: f64) -> Result<SpdSystem, SolveError> {
    factorize_with(mass, stiffness, t, SolverKind::Direct)
}

pub fn factorize_with(
    mass: &[f64],
    stiffness: &CsrMatrix,
    t: f64,
    kind: SolverKind,
) -> Result<SpdSystem, SolveError> {
    if mass.len() != stiffness.n() {
        return Err(SolveError::Dimension {
            expected: stiffness.n(),
            got: mass.len(),
        });
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(SolveError::Invalid(format!(
            "diffusion step must be positive, got {t}"
        )));
    }
    if let Some(i) = mass.iter().position(|&m| !(m > 0.0)) {
        return Err(SolveError::Invalid(format!(
            "mass entry {i} is not positive ({})",
            mass[i]
        )));
    }
    SpdSystem::new(stiffness.scaled_plus_diagonal(t, mass), kind)
}

impl SpdSystem {
    pub fn new(matrix: CsrMatrix, kind: SolverKind) -> Result<Self, SolveError> {
        let asym = matrix.asymmetry();
        if asym > 1e-12 * matrix.max_abs() {
            return Err(SolveError::Invalid(format!(
                "matrix is not symmetric (max |a_ij - a_ji| = {asym:e})"
            )));
        }
        let backend = match kind {
            SolverKind::Direct => Backend::Direct(LdltFactor::new(&matrix)?),
            SolverKind::ConjugateGradient => {
                let diag = matrix.diag();
                if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
                    return Err(SolveError::Breakdown {
                        pivot: i,
                        value: diag[i],
                    });
                }
                Backend::Cg {
                    inv_diag: diag.iter().map(|d| 1.0 / d).collect(),
                }
            }
        };
        Ok(Self { matrix, backend })
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn kind(&self) -> SolverKind {
        match self.backend {
            Backend::Direct(_) => SolverKind::Direct,
            Backend::Cg { .. } => SolverKind::ConjugateGradient,
        }
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Fill of the direct factor, if any.
    pub fn factor_nnz(&self) -> Option<usize> {
        match &self.backend {
            Backend::Direct(f) => Some(f.nnz_l()),
            Backend::Cg { .. } => None,
        }
    }

    /// Solves for a single right-hand side.
    pub fn solve_vec(&self, b: &[f64]) -> Result<Vec<f64>, SolveError> {
        let n = self.n();
        if b.len() != n {
            return Err(SolveError::Dimension {
                expected: n,
                got: b.len(),
            });
        }
        let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        match &self.backend {
            Backend::Direct(f) => {
                let mut x = b.to_vec();
                f.solve_in_place(&mut x);
                // iterative refinement until the residual contract holds
                let mut r = vec![0.0; n];
                for _ in 0..3 {
                    self.matrix.mul_vec_into(&x, &mut r);
                    let mut r_norm = 0.0;
                    for (ri, bi) in r.iter_mut().zip(b) {
                        *ri = bi - *ri;
                        r_norm += *ri * *ri;
                    }
                    if r_norm.sqrt() <= SOLVE_TOLERANCE * b_norm {
                        break;
                    }
                    f.solve_in_place(&mut r);
                    for (xi, ri) in x.iter_mut().zip(&r) {
                        *xi += ri;
                    }
                }
                Ok(x)
            }
            Backend::Cg { inv_diag } => {
                let mut x = vec![0.0; n];
                pcg_solve(&self.matrix, inv_diag, b, &mut x, SOLVE_TOLERANCE, 10 * n)?;
                Ok(x)
            }
        }
    }

    /// Solves `M X = B` column by column. Columns are independent, so the
    /// result does not depend on how they are scheduled across threads.
    pub fn solve(&self, rhs: MatRef<'_, f64>) -> Result<Mat<f64>, SolveError> {
        if rhs.nrows() != self.n() {
            return Err(SolveError::Dimension {
                expected: self.n(),
                got: rhs.nrows(),
            });
        }
        let cols: Vec<Vec<f64>> = (0..rhs.ncols())
            .into_par_iter()
            .map(|j| {
                let b: Vec<f64> = rhs.col(j).iter().copied().collect();
                self.solve_vec(&b)
            })
            .collect::<Result<_, _>>()?;
        Ok(Mat::from_fn(self.n(), rhs.ncols(), |i, j| cols[j][i]))
    }
}
