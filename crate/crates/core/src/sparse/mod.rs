//! Sparse symmetric positive-definite solves for the backward-Euler step.
//!
//! The direct path is a fill-reducing sparse LDLᵀ factorization that is
//! computed once per `(A + tW)` and reused for every right-hand side; the
//! fallback path is Jacobi-preconditioned conjugate gradients.

mod csr;
mod ldlt;
mod ordering;
mod pcg;
mod system;

pub use csr::CsrMatrix;
pub use ldlt::LdltFactor;
pub use ordering::nested_dissection;
pub use pcg::{pcg_solve, PcgOutcome};
pub use system::{factorize, factorize_with, SolverKind, SpdSystem};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("factorization broke down at pivot {pivot} (value {value:e}); matrix is not positive definite")]
    Breakdown { pivot: usize, value: f64 },
    #[error("conjugate gradients stalled after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("dimension mismatch: expected {expected} rows, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid system: {0}")]
    Invalid(String),
}
