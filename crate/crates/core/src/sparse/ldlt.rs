use super::{nested_dissection, CsrMatrix, SolveError};

/// Sparse `P A Pᵀ = L D Lᵀ` factorization with unit lower-triangular `L`
/// stored by columns.
///
/// Uses the up-looking row-by-row algorithm driven by the elimination tree,
/// after a nested-dissection ordering of the matrix graph.
#[derive(Clone, Debug)]
pub struct LdltFactor {
    n: usize,
    perm: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
    d: Vec<f64>,
}

impl LdltFactor {
    pub fn new(a: &CsrMatrix) -> Result<Self, SolveError> {
        let perm = nested_dissection(a);
        Self::with_ordering(a, perm)
    }

    /// Factorizes with an explicit ordering, `perm[new] = old`.
    pub fn with_ordering(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self, SolveError> {
        let n = a.n();
        if perm.len() != n {
            return Err(SolveError::Invalid(format!(
                "ordering has {} entries for a {n}x{n} matrix",
                perm.len()
            )));
        }
        let mut pinv = vec![usize::MAX; n];
        for (k, &old) in perm.iter().enumerate() {
            if old >= n || pinv[old] != usize::MAX {
                return Err(SolveError::Invalid("ordering is not a permutation".into()));
            }
            pinv[old] = k;
        }

        // symbolic: elimination tree and column counts
        let mut parent = vec![usize::MAX; n];
        let mut flag = vec![usize::MAX; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            let (cols, _) = a.row(perm[k]);
            for &j in cols {
                let mut i = pinv[j];
                if i >= k {
                    continue;
                }
                while flag[i] != k {
                    if parent[i] == usize::MAX {
                        parent[i] = k;
                    }
                    lnz[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
        let mut col_ptr = vec![0usize; n + 1];
        for k in 0..n {
            col_ptr[k + 1] = col_ptr[k] + lnz[k];
        }
        let total = col_ptr[n];
        let mut row_idx = vec![0usize; total];
        let mut values = vec![0f64; total];
        let mut d = vec![0f64; n];

        // numeric
        let mut y = vec![0f64; n];
        let mut pattern = vec![0usize; n];
        let mut fill = vec![0usize; n];
        flag.fill(usize::MAX);
        for k in 0..n {
            y[k] = 0.0;
            let mut top = n;
            flag[k] = k;
            let (cols, vals) = a.row(perm[k]);
            for (&j, &v) in cols.iter().zip(vals) {
                let mut i = pinv[j];
                if i > k {
                    continue;
                }
                y[i] += v;
                let mut len = 0;
                while flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = parent[i];
                }
                while len > 0 {
                    top -= 1;
                    len -= 1;
                    pattern[top] = pattern[len];
                }
            }
            let mut dk = y[k];
            y[k] = 0.0;
            for &i in &pattern[top..n] {
                let yi = y[i];
                y[i] = 0.0;
                let start = col_ptr[i];
                let end = start + fill[i];
                for p in start..end {
                    y[row_idx[p]] -= values[p] * yi;
                }
                let l_ki = yi / d[i];
                dk -= l_ki * yi;
                row_idx[end] = k;
                values[end] = l_ki;
                fill[i] += 1;
            }
            if !(dk > 0.0) || !dk.is_finite() {
                return Err(SolveError::Breakdown {
                    pivot: perm[k],
                    value: dk,
                });
            }
            d[k] = dk;
        }

        Ok(Self {
            n,
            perm,
            col_ptr,
            row_idx,
            values,
            d,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored off-diagonal entries of `L`.
    pub fn nnz_l(&self) -> usize {
        self.values.len()
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let mut x: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for j in 0..self.n {
            let xj = x[j];
            if xj != 0.0 {
                for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                    x[self.row_idx[p]] -= self.values[p] * xj;
                }
            }
        }
        for (xi, di) in x.iter_mut().zip(&self.d) {
            *xi /= di;
        }
        for j in (0..self.n).rev() {
            let mut acc = x[j];
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                acc -= self.values[p] * x[self.row_idx[p]];
            }
            x[j] = acc;
        }
        for (k, &old) in self.perm.iter().enumerate() {
            b[old] = x[k];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.5));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, &t)
    }

    #[test]
    fn solves_tridiagonal() {
        let a = tridiag(200);
        let f = LdltFactor::new(&a).unwrap();
        let x_true: Vec<f64> = (0..200).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut b = a.mul_vec(&x_true);
        f.solve_in_place(&mut b);
        for (x, e) in b.iter().zip(&x_true) {
            assert!((x - e).abs() < 1e-12);
        }
    }

    #[test]
    fn natural_and_dissected_orderings_agree() {
        let a = tridiag(50);
        let f1 = LdltFactor::with_ordering(&a, (0..50).collect()).unwrap();
        let f2 = LdltFactor::new(&a).unwrap();
        let mut b1: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let mut b2 = b1.clone();
        f1.solve_in_place(&mut b1);
        f2.solve_in_place(&mut b2);
        for (x, y) in b1.iter().zip(&b2) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_matrix_breaks_down() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        let err = LdltFactor::with_ordering(&a, vec![0, 1]).unwrap_err();
        assert!(matches!(err, SolveError::Breakdown { pivot: 1, .. }));
    }
}
