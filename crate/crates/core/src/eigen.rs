//! Generalized eigenpairs `W Φ = λ A Φ` of a Laplacian pair.
//!
//! The dense path symmetrizes to `A^{-1/2} W A^{-1/2}` and calls a dense
//! symmetric eigensolver; it is the reference oracle on small meshes. Above
//! the dense cap, [`krylov_generalized_eigs`] runs a shift-inverted block
//! Krylov iteration on top of the sparse factorization.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par, Side};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::sparse::{CsrMatrix, SolveError, SolverKind, SpdSystem};

pub const DEFAULT_DENSE_CAP: usize = 5000;

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("dense eigensolver limited to {cap} vertices, mesh has {n}")]
    TooLarge { n: usize, cap: usize },
    #[error("requested {k} eigenpairs from a {n}-dimensional problem")]
    TooMany { k: usize, n: usize },
    #[error("mass has {mass} entries but stiffness is {n}x{n}")]
    Dimension { mass: usize, n: usize },
    #[error("dense eigendecomposition failed to converge")]
    Dense,
    #[error("krylov iteration stopped with {converged} of {wanted} eigenpairs converged")]
    NotConverged { converged: usize, wanted: usize },
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigCount {
    All,
    Smallest(usize),
}

/// Eigenvalues in non-decreasing order with `A`-orthonormal eigenvectors
/// stored as the columns of an `n × count` matrix.
#[derive(Clone, Debug)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: Mat<f64>,
}

impl Spectrum {
    pub fn new(eigenvalues: Vec<f64>, eigenvectors: Mat<f64>) -> Self {
        assert_eq!(eigenvalues.len(), eigenvectors.ncols());
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn count(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.eigenvectors.nrows()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> MatRef<'_, f64> {
        self.eigenvectors.as_ref()
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        self.eigenvectors.col_as_slice(k)
    }

    /// The first `k` eigenpairs.
    pub fn truncated(&self, k: usize) -> Spectrum {
        let k = k.min(self.count());
        Spectrum {
            eigenvalues: self.eigenvalues[..k].to_vec(),
            eigenvectors: self.eigenvectors.subcols(0, k).to_owned(),
        }
    }
}

/// Flips each eigenvector so that its first entry with magnitude above
/// `1e-8` is positive.
fn fix_signs(vectors: &mut Mat<f64>) {
    for j in 0..vectors.ncols() {
        let col = vectors.col_as_slice_mut(j);
        if let Some(&v) = col.iter().find(|v| v.abs() > 1e-8) {
            if v < 0.0 {
                col.iter_mut().for_each(|x| *x = -*x);
            }
        }
    }
}

fn check_dims(mass: &[f64], stiffness: &CsrMatrix) -> Result<(), EigenError> {
    if mass.len() != stiffness.n() {
        return Err(EigenError::Dimension {
            mass: mass.len(),
            n: stiffness.n(),
        });
    }
    Ok(())
}

fn resolve_count(count: EigCount, n: usize) -> Result<usize, EigenError> {
    match count {
        EigCount::All => Ok(n),
        EigCount::Smallest(k) if k <= n => Ok(k),
        EigCount::Smallest(k) => Err(EigenError::TooMany { k, n }),
    }
}

/// Dense generalized eigensolver with the default size cap.
pub fn generalized_eigs(
    mass: &[f64],
    stiffness: &CsrMatrix,
    count: EigCount,
) -> Result<Spectrum, EigenError> {
    generalized_eigs_capped(mass, stiffness, count, DEFAULT_DENSE_CAP)
}

pub fn generalized_eigs_capped(
    mass: &[f64],
    stiffness: &CsrMatrix,
    count: EigCount,
    dense_cap: usize,
) -> Result<Spectrum, EigenError> {
    check_dims(mass, stiffness)?;
    let n = mass.len();
    if n > dense_cap {
        return Err(EigenError::TooLarge { n, cap: dense_cap });
    }
    let k = resolve_count(count, n)?;
    let inv_sqrt: Vec<f64> = mass.iter().map(|a| a.sqrt().recip()).collect();
    let mut sym = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        let (cols, vals) = stiffness.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            sym[(i, j)] = v * inv_sqrt[i] * inv_sqrt[j];
        }
    }
    let evd = sym
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| EigenError::Dense)?;
    let values = evd.S().column_vector();
    let u = evd.U();
    let eigenvalues: Vec<f64> = (0..k).map(|j| values[j]).collect();
    let mut vectors = Mat::from_fn(n, k, |i, j| u[(i, j)] * inv_sqrt[i]);
    fix_signs(&mut vectors);
    Ok(Spectrum::new(eigenvalues, vectors))
}

#[derive(Clone, Debug)]
pub struct KrylovOptions {
    pub block_size: usize,
    /// Convergence requires `‖WΦ - λAΦ‖₂ ≤ tolerance · (1 + λ)`.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            block_size: 8,
            tolerance: 1e-8,
            seed: 0x5eed,
        }
    }
}

/// Smallest `k` generalized eigenpairs via a shift-inverted block Krylov
/// subspace with full `A`-reorthogonalization and Rayleigh–Ritz on the
/// original pencil. Suited to large meshes where the dense path is too slow.
pub fn krylov_generalized_eigs(
    mass: &[f64],
    stiffness: &CsrMatrix,
    k: usize,
    opts: &KrylovOptions,
) -> Result<Spectrum, EigenError> {
    check_dims(mass, stiffness)?;
    let n = mass.len();
    if k > n {
        return Err(EigenError::TooMany { k, n });
    }
    if k == 0 {
        return Ok(Spectrum::new(Vec::new(), Mat::zeros(n, 0)));
    }
    let b = opts.block_size.max(1).min(n);
    let scale = (0..n).map(|i| stiffness.get(i, i) / mass[i]).sum::<f64>() / n as f64;
    let shift = 1e-6 * scale.max(f64::MIN_POSITIVE);
    let op = SpdSystem::new(
        stiffness.scaled_plus_diagonal(1.0, &scaled(mass, shift)),
        SolverKind::Direct,
    )?;

    let max_m = n.min(3 * k + 4 * b + 64);
    let mut basis = Mat::<f64>::zeros(n, max_m);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut m = 0usize;
    let mut block = Mat::from_fn(n, b.min(max_m), |_, _| rng.random::<f64>() - 0.5);
    let mut next_check = (k + k / 2 + 2 * b).min(max_m);

    loop {
        let prev = m;
        m = append_block(&mut basis, m, &mut block, mass, &mut rng);
        if m >= next_check || m == max_m {
            let complete = m == n;
            if let Some(spec) = rayleigh_ritz(
                basis.subcols(0, m),
                mass,
                stiffness,
                k,
                opts.tolerance,
                complete,
            )? {
                return Ok(spec);
            }
            if m == max_m {
                let converged =
                    rayleigh_ritz_count(basis.subcols(0, m), mass, stiffness, k, opts.tolerance);
                return Err(EigenError::NotConverged {
                    converged,
                    wanted: k,
                });
            }
            next_check = (m + k / 2 + b).min(max_m);
        }
        // expand with (W + σA)⁻¹ A applied to the block just added
        block = if m > prev {
            let fresh = basis.subcols(prev, m - prev);
            let rhs = Mat::from_fn(n, fresh.ncols(), |i, j| mass[i] * fresh[(i, j)]);
            op.solve(rhs.as_ref())?
        } else {
            Mat::from_fn(n, b, |_, _| rng.random::<f64>() - 0.5)
        };
    }
}

fn scaled(mass: &[f64], s: f64) -> Vec<f64> {
    mass.iter().map(|a| a * s).collect()
}

fn a_dot(mass: &[f64], x: &[f64], y: &[f64]) -> f64 {
    mass.iter().zip(x).zip(y).map(|((a, u), v)| a * u * v).sum()
}

/// `A`-orthonormalizes `block` against the first `m` basis columns and
/// itself, then appends it. Returns the new basis size.
fn append_block(
    basis: &mut Mat<f64>,
    m: usize,
    block: &mut Mat<f64>,
    mass: &[f64],
    rng: &mut ChaCha8Rng,
) -> usize {
    let n = basis.nrows();
    let room = basis.ncols() - m;
    let width = block.ncols().min(room);
    for _pass in 0..2 {
        if m > 0 {
            let ab = Mat::from_fn(n, width, |i, j| mass[i] * block[(i, j)]);
            let mut coeff = Mat::<f64>::zeros(m, width);
            matmul(
                coeff.as_mut(),
                Accum::Replace,
                basis.subcols(0, m).transpose(),
                ab.as_ref(),
                1.0,
                Par::rayon(0),
            );
            matmul(
                block.subcols_mut(0, width),
                Accum::Add,
                basis.subcols(0, m),
                coeff.as_ref(),
                -1.0,
                Par::rayon(0),
            );
        }
    }
    let mut filled = m;
    for j in 0..width {
        let mut v: Vec<f64> = block.col_as_slice(j).to_vec();
        let reference = a_dot(mass, &v, &v).sqrt();
        let mut accepted = false;
        for _attempt in 0..3 {
            // earlier blocks were projected out above; only the columns
            // accepted from this block remain
            let from = if _attempt == 0 { m } else { 0 };
            for _pass in 0..2 {
                for c in from..filled {
                    let q = basis.col_as_slice(c);
                    let h = a_dot(mass, q, &v);
                    v.iter_mut().zip(q).for_each(|(x, y)| *x -= h * y);
                }
            }
            let nrm = a_dot(mass, &v, &v).sqrt();
            if nrm > 1e-10 * reference.max(f64::MIN_POSITIVE) && nrm > 0.0 {
                let dst = basis.col_as_slice_mut(filled);
                dst.iter_mut().zip(&v).for_each(|(d, x)| *d = x / nrm);
                filled += 1;
                accepted = true;
                break;
            }
            // deflated direction: restart it randomly
            v = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        }
        if !accepted || filled == basis.ncols() {
            break;
        }
    }
    filled
}

struct Ritz {
    values: Vec<f64>,
    vectors: Mat<f64>,
    residuals: Vec<f64>,
}

fn ritz_pairs(
    v: MatRef<'_, f64>,
    mass: &[f64],
    stiffness: &CsrMatrix,
    k: usize,
) -> Result<Ritz, EigenError> {
    let (n, m) = (v.nrows(), v.ncols());
    let mut wv = Mat::<f64>::zeros(n, m);
    let mut tmp = vec![0.0; n];
    for j in 0..m {
        let col: Vec<f64> = v.col(j).iter().copied().collect();
        stiffness.mul_vec_into(&col, &mut tmp);
        wv.col_as_slice_mut(j).copy_from_slice(&tmp);
    }
    let mut h = Mat::<f64>::zeros(m, m);
    matmul(
        h.as_mut(),
        Accum::Replace,
        v.transpose(),
        wv.as_ref(),
        1.0,
        Par::rayon(0),
    );
    let hs = Mat::from_fn(m, m, |i, j| 0.5 * (h[(i, j)] + h[(j, i)]));
    let evd = hs
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| EigenError::Dense)?;
    let k = k.min(m);
    let y = evd.U().subcols(0, k);
    let s = evd.S().column_vector();
    let values: Vec<f64> = (0..k).map(|j| s[j]).collect();
    let mut vectors = Mat::<f64>::zeros(n, k);
    matmul(vectors.as_mut(), Accum::Replace, v, y, 1.0, Par::rayon(0));
    let mut wphi = Mat::<f64>::zeros(n, k);
    matmul(
        wphi.as_mut(),
        Accum::Replace,
        wv.as_ref(),
        y,
        1.0,
        Par::rayon(0),
    );
    let residuals = (0..k)
        .map(|j| {
            let lam = values[j];
            (0..n)
                .map(|i| {
                    let r = wphi[(i, j)] - lam * mass[i] * vectors[(i, j)];
                    r * r
                })
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    Ok(Ritz {
        values,
        vectors,
        residuals,
    })
}

fn rayleigh_ritz(
    v: MatRef<'_, f64>,
    mass: &[f64],
    stiffness: &CsrMatrix,
    k: usize,
    tol: f64,
    complete: bool,
) -> Result<Option<Spectrum>, EigenError> {
    let ritz = ritz_pairs(v, mass, stiffness, k)?;
    let ok = ritz
        .values
        .iter()
        .zip(&ritz.residuals)
        .all(|(l, r)| *r <= tol * (1.0 + l.abs()));
    if !(ok || complete) || ritz.values.len() < k {
        return Ok(None);
    }
    let mut vectors = ritz.vectors;
    fix_signs(&mut vectors);
    Ok(Some(Spectrum::new(ritz.values, vectors)))
}

fn rayleigh_ritz_count(
    v: MatRef<'_, f64>,
    mass: &[f64],
    stiffness: &CsrMatrix,
    k: usize,
    tol: f64,
) -> usize {
    ritz_pairs(v, mass, stiffness, k)
        .map(|r| {
            r.values
                .iter()
                .zip(&r.residuals)
                .take_while(|(l, res)| **res <= tol * (1.0 + l.abs()))
                .count()
        })
        .unwrap_or(0)
}

/// Smallest `k` eigenpairs: the dense solver up to `dense_cap` vertices,
/// shift-inverted Krylov above it.
pub fn smallest_eigenpairs(
    mass: &[f64],
    stiffness: &CsrMatrix,
    k: usize,
    dense_cap: usize,
) -> Result<Spectrum, EigenError> {
    if mass.len() <= dense_cap {
        generalized_eigs_capped(mass, stiffness, EigCount::Smallest(k), dense_cap)
    } else {
        krylov_generalized_eigs(mass, stiffness, k, &KrylovOptions::default())
    }
}
