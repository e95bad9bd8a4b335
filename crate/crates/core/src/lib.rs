//! Multi-scale Mexican-hat wavelet dictionaries on triangle meshes, built by
//! repeated backward-Euler heat diffusion of Laplacian-filtered point
//! indicators, together with spectral baselines, point-to-point map recovery
//! and geodesic-error evaluation.

// `!(x > 0.0)` is used on purpose throughout: it rejects NaN along with
// non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod eigen;
pub mod error;
pub mod eval;
pub mod matching;
pub mod mesh;
pub mod pipeline;
pub mod sparse;
pub mod spectral;
pub mod wavelet;

pub use error::Error;
