//! Prints factorization and eigensolver timings on icospheres.
use std::time::Instant;

use diffwave::eigen::{krylov_generalized_eigs, KrylovOptions};
use diffwave::mesh::{build_laplacian, normalize_unit_area, shapes};
use diffwave::sparse::factorize;

fn main() {
    let level: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(5);
    let k: usize = std::env::args()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or(300);
    let mesh = shapes::jitter_radial(&shapes::icosphere(level), 0.02, 1);
    let (mesh, _) = normalize_unit_area(&mesh).unwrap();
    let lap = build_laplacian(&mesh).unwrap();
    let t = Instant::now();
    let sys = factorize(&lap.mass, &lap.stiffness, 1e-3).unwrap();
    println!(
        "n={} factorize {:?} nnz(L)={:?}",
        lap.n(),
        t.elapsed(),
        sys.factor_nnz()
    );
    let t = Instant::now();
    let spec =
        krylov_generalized_eigs(&lap.mass, &lap.stiffness, k, &KrylovOptions::default()).unwrap();
    println!(
        "krylov k={k} {:?} λ_max={}",
        t.elapsed(),
        spec.eigenvalues()[k - 1]
    );
}
