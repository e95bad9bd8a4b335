//! Point-to-point maps from wavelet dictionaries.
//!
//! Two recovery modes are provided: δ-reconstruction on a single shape
//! (ridge-regularized least squares followed by a per-column argmax) and
//! transfer between two shapes by nearest-neighbour search over dictionary
//! rows.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;

use faer::linalg::matmul::matmul;
use faer::linalg::solvers::Solve;
use faer::{Accum, Mat, MatRef, Par, Side};
use rayon::prelude::*;
use thiserror::Error;

use crate::wavelet::Dictionary;

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("dictionaries have {source_cols} and {target_cols} columns")]
    ColumnMismatch {
        source_cols: usize,
        target_cols: usize,
    },
    #[error("cannot transfer between a {source_kind} and a {target_kind} dictionary")]
    KindMismatch {
        source_kind: &'static str,
        target_kind: &'static str,
    },
    #[error("regularizer has {got} weights but the dictionary has {expected} columns")]
    RegularizerSize { expected: usize, got: usize },
    #[error("normal matrix is singular (pivot ratio {ratio:e})")]
    Singular { ratio: f64 },
    #[error("invalid point map: {0}")]
    InvalidMap(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// `targets[i]` is the image of source vertex `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointMap {
    targets: Vec<usize>,
    target_size: usize,
}

impl PointMap {
    pub fn new(targets: Vec<usize>, target_size: usize) -> Result<Self, MatchError> {
        if let Some((i, &t)) = targets.iter().enumerate().find(|(_, &t)| t >= target_size) {
            return Err(MatchError::InvalidMap(format!(
                "vertex {i} maps to {t}, target has {target_size} vertices"
            )));
        }
        Ok(Self {
            targets,
            target_size,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            targets: (0..n).collect(),
            target_size: n,
        }
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn source_size(&self) -> usize {
        self.targets.len()
    }

    pub fn target_size(&self) -> usize {
        self.target_size
    }

    /// Number of source vertices whose image differs from `other`.
    pub fn mismatches(&self, other: &PointMap) -> usize {
        self.targets
            .iter()
            .zip(&other.targets)
            .filter(|(a, b)| a != b)
            .count()
            + self.targets.len().abs_diff(other.targets.len())
    }

    /// Reads one 0-based index per line. Blank lines and `#` comments are
    /// skipped. With `target_size = None` the size is taken as `max + 1`.
    pub fn read(reader: impl BufRead, target_size: Option<usize>) -> Result<Self, MatchError> {
        let mut targets = Vec::new();
        for (no, line) in reader.lines().enumerate() {
            let line = line?;
            let text = line.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let t = text.parse::<usize>().map_err(|e| MatchError::Parse {
                line: no + 1,
                message: format!("`{text}`: {e}"),
            })?;
            targets.push(t);
        }
        if targets.is_empty() {
            return Err(MatchError::InvalidMap("map file has no entries".into()));
        }
        let size = target_size.unwrap_or_else(|| targets.iter().max().map_or(0, |m| m + 1));
        Self::new(targets, size)
    }

    pub fn read_path(
        path: impl AsRef<Path>,
        target_size: Option<usize>,
    ) -> Result<Self, MatchError> {
        Self::read(io::BufReader::new(fs::File::open(path)?), target_size)
    }

    pub fn write(&self, mut out: impl Write) -> io::Result<()> {
        for t in &self.targets {
            writeln!(out, "{t}")?;
        }
        out.flush()
    }

    pub fn write_path(&self, path: impl AsRef<Path>) -> io::Result<()> {
        self.write(io::BufWriter::new(fs::File::create(path)?))
    }
}

/// Diagonal ridge weights `1/k²` for scale `k`, laid out scale-major like
/// the dictionary columns.
#[derive(Clone, Debug, PartialEq)]
pub struct TikhonovRegularizer {
    weights: Vec<f64>,
    n_samples: usize,
    n_scales: usize,
}

impl TikhonovRegularizer {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_scales(&self) -> usize {
        self.n_scales
    }
}

pub fn build_gamma(n_samples: usize, n_scales: usize) -> Result<TikhonovRegularizer, MatchError> {
    if n_samples == 0 || n_scales == 0 {
        return Err(MatchError::InvalidMap(format!(
            "regularizer needs at least one sample and scale, got {n_samples} x {n_scales}"
        )));
    }
    let weights = (1..=n_scales)
        .flat_map(|k| std::iter::repeat_n(1.0 / (k * k) as f64, n_samples))
        .collect();
    Ok(TikhonovRegularizer {
        weights,
        n_samples,
        n_scales,
    })
}

/// `ΨᵀΨ + diag(γ)²`; pass an all-zero `gamma` for the plain normal matrix.
pub fn normal_matrix(psi: MatRef<'_, f64>, gamma: &[f64]) -> Mat<f64> {
    let d = psi.ncols();
    assert_eq!(gamma.len(), d, "one weight per column");
    let mut g = Mat::zeros(d, d);
    matmul(
        g.as_mut(),
        Accum::Replace,
        psi.transpose(),
        psi,
        1.0,
        Par::rayon(0),
    );
    for (j, w) in gamma.iter().enumerate() {
        g[(j, j)] += w * w;
    }
    g
}

/// 2-norm condition number of a symmetric matrix; `+∞` when it is singular
/// or indefinite.
pub fn condition_number(sym: MatRef<'_, f64>) -> f64 {
    let Ok(values) = sym.self_adjoint_eigenvalues(Side::Lower) else {
        return f64::INFINITY;
    };
    let lo = values.first().copied().unwrap_or(0.0);
    let hi = values.last().copied().unwrap_or(0.0);
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Columns handled per block when forming `n × n` products.
const BLOCK: usize = 256;

/// For every row `j` of `right`, the row `i` of `left` maximizing
/// `left[i]·right[j]`; ties go to the lowest `i`. The `n_left × n_right`
/// product is formed block by block and never stored whole.
pub fn argmax_of_product(left: MatRef<'_, f64>, right: MatRef<'_, f64>) -> Vec<usize> {
    assert_eq!(left.ncols(), right.ncols());
    let n_right = right.nrows();
    let starts: Vec<usize> = (0..n_right).step_by(BLOCK).collect();
    let blocks: Vec<Vec<usize>> = starts
        .par_iter()
        .map(|&start| {
            let len = BLOCK.min(n_right - start);
            let mut prod = Mat::zeros(left.nrows(), len);
            matmul(
                prod.as_mut(),
                Accum::Replace,
                left,
                right.subrows(start, len).transpose(),
                1.0,
                Par::Seq,
            );
            (0..len)
                .map(|j| {
                    let col = prod.col_as_slice(j);
                    let mut best = 0;
                    for (i, &v) in col.iter().enumerate() {
                        if v > col[best] {
                            best = i;
                        }
                    }
                    best
                })
                .collect()
        })
        .collect();
    blocks.concat()
}

/// Solves the ridge problem `(ΨᵀΨ + Γ²) α = Ψᵀ` and sends every vertex `k`
/// to the row maximizing column `k` of `Ψα`.
pub fn reconstruct_columns(psi: MatRef<'_, f64>, gamma: &[f64]) -> Result<Vec<usize>, MatchError> {
    if gamma.len() != psi.ncols() {
        return Err(MatchError::RegularizerSize {
            expected: psi.ncols(),
            got: gamma.len(),
        });
    }
    let g = normal_matrix(psi, gamma);
    let llt = g
        .llt(Side::Lower)
        .map_err(|_| MatchError::Singular { ratio: 0.0 })?;
    let diag: Vec<f64> = (0..g.nrows()).map(|i| llt.L()[(i, i)].powi(2)).collect();
    let hi = diag.iter().copied().fold(0.0, f64::max);
    let lo = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let ratio = lo / hi;
    if !(ratio > 1e-15) {
        return Err(MatchError::Singular { ratio });
    }
    // Ψα = Ψ G⁻¹ Ψᵀ; the rows of Ψ G⁻¹ are the rows of (G⁻¹ Ψᵀ)ᵀ.
    let coeffs = llt.solve(psi.transpose());
    Ok(argmax_of_product(psi, coeffs.transpose()))
}

/// δ-reconstruction map of a wavelet dictionary onto its own mesh.
pub fn reconstruct_delta_map(
    dict: &Dictionary,
    reg: &TikhonovRegularizer,
) -> Result<PointMap, MatchError> {
    let targets = reconstruct_columns(dict.columns.as_ref(), reg.weights())?;
    PointMap::new(targets, dict.n_vertices())
}

/// Exact nearest row of `target` for every row of `source`, ties to the
/// lowest index.
///
/// Candidates are screened with the expanded form `‖s‖² + ‖t‖² − 2 s·t` and
/// every candidate within its rounding bound of the best is re-measured
/// directly, so the result equals a brute-force scan.
pub fn nearest_rows(source: MatRef<'_, f64>, target: MatRef<'_, f64>) -> Vec<usize> {
    assert_eq!(source.ncols(), target.ncols());
    let d = source.ncols();
    let sq = |m: MatRef<'_, f64>| -> Vec<f64> {
        (0..m.nrows())
            .map(|i| (0..d).map(|k| m[(i, k)] * m[(i, k)]).sum())
            .collect()
    };
    let s_norm = sq(source);
    let t_norm = sq(target);
    let t_max = t_norm.iter().copied().fold(0.0, f64::max);
    let n_source = source.nrows();
    let starts: Vec<usize> = (0..n_source).step_by(BLOCK).collect();
    let blocks: Vec<Vec<usize>> = starts
        .par_iter()
        .map(|&start| {
            let len = BLOCK.min(n_source - start);
            let mut dots = Mat::zeros(target.nrows(), len);
            matmul(
                dots.as_mut(),
                Accum::Replace,
                target,
                source.subrows(start, len).transpose(),
                1.0,
                Par::Seq,
            );
            (0..len)
                .map(|j| {
                    let i_src = start + j;
                    let col = dots.col_as_slice(j);
                    let approx: Vec<f64> = col
                        .iter()
                        .zip(&t_norm)
                        .map(|(&dot, &tn)| s_norm[i_src] + tn - 2.0 * dot)
                        .collect();
                    let best = approx.iter().copied().fold(f64::INFINITY, f64::min);
                    let slack = 8.0 * (d as f64 + 2.0) * f64::EPSILON * (s_norm[i_src] + t_max);
                    let mut winner = (f64::INFINITY, usize::MAX);
                    for (i, &a) in approx.iter().enumerate() {
                        if a <= best + 2.0 * slack {
                            let exact: f64 = (0..d)
                                .map(|k| (source[(i_src, k)] - target[(i, k)]).powi(2))
                                .sum();
                            if exact < winner.0 {
                                winner = (exact, i);
                            }
                        }
                    }
                    winner.1
                })
                .collect()
        })
        .collect();
    blocks.concat()
}

/// Maps every vertex of the source shape to the target vertex whose
/// dictionary row is nearest. Columns must correspond one-to-one, i.e. the
/// two sample sets are matched landmarks in the same order.
pub fn transfer_pointmap(source: &Dictionary, target: &Dictionary) -> Result<PointMap, MatchError> {
    if source.kind != target.kind {
        return Err(MatchError::KindMismatch {
            source_kind: source.kind.as_str(),
            target_kind: target.kind.as_str(),
        });
    }
    if source.n_columns() != target.n_columns() || source.n_scales != target.n_scales {
        return Err(MatchError::ColumnMismatch {
            source_cols: source.n_columns(),
            target_cols: target.n_columns(),
        });
    }
    let targets = nearest_rows(source.columns.as_ref(), target.columns.as_ref());
    PointMap::new(targets, target.n_vertices())
}

/// Kind-agnostic transfer on raw embeddings, e.g. spectral coordinates.
pub fn transfer_rows(
    source: MatRef<'_, f64>,
    target: MatRef<'_, f64>,
) -> Result<PointMap, MatchError> {
    if source.ncols() != target.ncols() {
        return Err(MatchError::ColumnMismatch {
            source_cols: source.ncols(),
            target_cols: target.ncols(),
        });
    }
    PointMap::new(nearest_rows(source, target), target.nrows())
}
