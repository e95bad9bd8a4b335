use super::{CsrMatrix, SolveError};

#[derive(Clone, Debug, PartialEq)]
pub struct PcgOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients on an SPD matrix, starting from
/// the contents of `x`. Stops once `‖b - A x‖ ≤ rel_tol · ‖b‖` or after
/// `max_iter` iterations.
pub fn pcg_solve(
    a: &CsrMatrix,
    inv_diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<PcgOutcome, SolveError> {
    let n = a.n();
    if b.len() != n || x.len() != n {
        return Err(SolveError::Dimension {
            expected: n,
            got: b.len(),
        });
    }
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.fill(0.0);
        return Ok(PcgOutcome {
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let mut r = a.mul_vec(x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut z: Vec<f64> = r.iter().zip(inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut res = dot(&r, &r).sqrt() / b_norm;
    for it in 0..max_iter {
        if res <= rel_tol {
            return Ok(PcgOutcome {
                iterations: it,
                relative_residual: res,
            });
        }
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(SolveError::Breakdown {
                pivot: it,
                value: pap,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        // recompute the true residual now and then to avoid drift
        if (it + 1) % 50 == 0 {
            let ax = a.mul_vec(x);
            for i in 0..n {
                r[i] = b[i] - ax[i];
            }
        }
        res = dot(&r, &r).sqrt() / b_norm;
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    if res <= rel_tol {
        return Ok(PcgOutcome {
            iterations: max_iter,
            relative_residual: res,
        });
    }
    Err(SolveError::NotConverged {
        iterations: max_iter,
        residual: res,
    })
}
