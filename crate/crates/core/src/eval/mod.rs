//! Geodesic-error evaluation of point maps and the experiment drivers.
//!
//! Errors are graph-geodesic distances on the target mesh between the
//! predicted and ground-truth images, divided by the square root of the
//! target area. Curves report the share of vertices within each threshold.

mod config;
mod experiment;
mod report;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind, RhoSetting};
pub use experiment::{run_experiment, ExperimentReport};
pub use report::{
    write_curves_csv, write_errors_csv, write_summary, write_sweep_csv, SweepRow, CURVE_SCHEMA,
    ERROR_SCHEMA, SWEEP_SCHEMA,
};

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::matching::PointMap;
use crate::mesh::{MeshError, MeshGraph, TriangleMesh};

/// Default number of evenly spaced curve thresholds.
pub const DEFAULT_THRESHOLDS: usize = 100;
/// Default largest curve threshold.
pub const DEFAULT_MAX_THRESHOLD: f64 = 0.5;
/// Threshold at which the area-under-curve summary is read off.
pub const AUC_THRESHOLD: f64 = 0.25;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("maps cover {map} and {gt} source vertices")]
    SourceMismatch { map: usize, gt: usize },
    #[error("map targets {index} but the target mesh has {n_vertices} vertices")]
    TargetOutOfRange { index: usize, n_vertices: usize },
    #[error("no errors to summarize")]
    Empty,
    #[error("a curve needs at least 2 thresholds and a positive maximum, got {n} up to {max}")]
    BadThresholds { n: usize, max: f64 },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Normalized geodesic error of every source vertex.
///
/// Vertices are grouped by ground-truth image so that each group needs one
/// early-stopping Dijkstra run. Unreachable pairs give `+∞` and a warning.
pub fn geodesic_errors(
    map: &PointMap,
    gt: &PointMap,
    target_mesh: &TriangleMesh,
) -> Result<Vec<f64>, EvalError> {
    if map.source_size() != gt.source_size() {
        return Err(EvalError::SourceMismatch {
            map: map.source_size(),
            gt: gt.source_size(),
        });
    }
    let nv = target_mesh.n_vertices();
    if let Some(&index) = map.targets().iter().chain(gt.targets()).find(|&&t| t >= nv) {
        return Err(EvalError::TargetOutOfRange {
            index,
            n_vertices: nv,
        });
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, (&m, &g)) in map.targets().iter().zip(gt.targets()).enumerate() {
        if m != g {
            groups.entry(g).or_default().push(i);
        }
    }
    let graph = MeshGraph::new(target_mesh);
    let groups: Vec<(usize, Vec<usize>)> = groups.into_iter().collect();
    let solved: Vec<Vec<(usize, f64)>> = groups
        .par_iter()
        .map(|(g, members)| {
            let wanted: Vec<usize> = members.iter().map(|&i| map.targets()[i]).collect();
            let d = graph.distances_until(*g, &wanted)?;
            Ok(members.iter().map(|&i| (i, d[map.targets()[i]])).collect())
        })
        .collect::<Result<_, MeshError>>()?;

    let scale = target_mesh.total_area().sqrt().recip();
    let mut errors = vec![0.0; map.source_size()];
    for (i, d) in solved.into_iter().flatten() {
        errors[i] = d * scale;
    }
    let unreachable = errors.iter().filter(|e| e.is_infinite()).count();
    if unreachable > 0 {
        log::warn!("{unreachable} vertices map to a different component; excluded from means");
    }
    Ok(errors)
}

/// Cumulative error curve and its scalar summaries.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalCurve {
    pub thresholds: Vec<f64>,
    pub fractions: Vec<f64>,
    /// Mean over finite errors.
    pub mean_error: f64,
    /// Share of all vertices with error at most 0.25.
    pub auc_025: f64,
}

pub fn curve(
    errors: &[f64],
    n_thresholds: usize,
    max_threshold: f64,
) -> Result<EvalCurve, EvalError> {
    if errors.is_empty() {
        return Err(EvalError::Empty);
    }
    if n_thresholds < 2 || !(max_threshold > 0.0) {
        return Err(EvalError::BadThresholds {
            n: n_thresholds,
            max: max_threshold,
        });
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let total = sorted.len() as f64;
    let share = |th: f64| sorted.partition_point(|&e| e <= th) as f64 / total;
    let thresholds: Vec<f64> = (0..n_thresholds)
        .map(|i| max_threshold * i as f64 / (n_thresholds - 1) as f64)
        .collect();
    let fractions = thresholds.iter().map(|&t| share(t)).collect();
    let finite: Vec<f64> = errors.iter().copied().filter(|e| e.is_finite()).collect();
    let mean_error = if finite.is_empty() {
        f64::INFINITY
    } else {
        finite.iter().sum::<f64>() / finite.len() as f64
    };
    Ok(EvalCurve {
        thresholds,
        fractions,
        mean_error,
        auc_025: share(AUC_THRESHOLD),
    })
}

/// [`geodesic_errors`] followed by [`curve`] with the default grid.
pub fn evaluate(
    map: &PointMap,
    gt: &PointMap,
    target_mesh: &TriangleMesh,
) -> Result<EvalCurve, EvalError> {
    curve(
        &geodesic_errors(map, gt, target_mesh)?,
        DEFAULT_THRESHOLDS,
        DEFAULT_MAX_THRESHOLD,
    )
}
