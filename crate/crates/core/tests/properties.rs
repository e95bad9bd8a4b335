//! Structural properties of the operators and the matching pipeline on
//! synthetic meshes.

use diffwave::eigen::{generalized_eigs, EigCount};
use diffwave::eval::evaluate;
use diffwave::matching::{build_gamma, condition_number, normal_matrix, PointMap};
use diffwave::mesh::{
    build_laplacian, normalize_unit_area, sample, shapes, LaplacianPair, SampleSet,
    SamplingStrategy, TriangleMesh,
};
use diffwave::pipeline::{self_match, PreparedMesh};
use diffwave::sparse::factorize;
use diffwave::spectral::spectral_mexican_hat;
use diffwave::wavelet::{
    build_dictionary, mother_wavelets, propagate, raw_heat, raw_wavelets, DictionaryParams,
};
use faer::Mat;
use proptest::prelude::*;

fn test_mesh(level: usize, seed: u64) -> TriangleMesh {
    shapes::jitter_radial(&shapes::icosphere(level), 0.05, seed)
}

fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().chain(b).fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        / scale
}

fn stiffness_entries(lap: &LaplacianPair) -> Vec<f64> {
    let n = lap.n();
    let mut out = Vec::new();
    for i in 0..n {
        let (cols, vals) = lap.stiffness.row(i);
        out.extend(cols.iter().map(|&c| c as f64));
        out.extend_from_slice(vals);
    }
    out
}

fn l2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn laplacian_is_rigid_invariant(
        ax in -1.0f64..1.0, ay in -1.0f64..1.0, az in 0.1f64..1.0,
        angle in 0.0f64..std::f64::consts::TAU,
        shift in prop::array::uniform3(-5.0f64..5.0),
    ) {
        let mesh = test_mesh(2, 4);
        let moved = shapes::rigid_motion(&mesh, [ax, ay, az], angle, shift);
        let a = build_laplacian(&mesh).unwrap();
        let b = build_laplacian(&moved).unwrap();
        prop_assert!(max_rel_diff(&a.mass, &b.mass) < 1e-10);
        prop_assert!(max_rel_diff(&stiffness_entries(&a), &stiffness_entries(&b)) < 1e-10);
    }

    #[test]
    fn mass_scales_quadratically_stiffness_is_scale_free(c in 0.05f64..20.0) {
        let mesh = test_mesh(2, 8);
        let scaled = mesh.map_vertices(|p| p.map(|x| c * x));
        let a = build_laplacian(&mesh).unwrap();
        let b = build_laplacian(&scaled).unwrap();
        let expected: Vec<f64> = a.mass.iter().map(|m| m * c * c).collect();
        prop_assert!(max_rel_diff(&expected, &b.mass) < 1e-10);
        prop_assert!(max_rel_diff(&stiffness_entries(&a), &stiffness_entries(&b)) < 1e-10);
    }
}

#[test]
fn laplacian_commutes_with_diffusion() {
    let prep = PreparedMesh::new(&test_mesh(3, 2)).unwrap();
    let lap = &prep.lap;
    let samples = SampleSet::explicit(vec![5, 300, 611], lap.n()).unwrap();
    let params = DictionaryParams::new(8, 1.0, 1.0);
    // diffuse Lδ versus L applied to the diffused δ
    let (waves, _) = raw_wavelets(lap, &samples, &params).unwrap();
    let (heat, _) = raw_heat(lap, &samples, &params).unwrap();
    for c in 0..waves.ncols() {
        let lhs = waves.col_as_slice(c);
        let rhs = lap.apply_operator(heat.col_as_slice(c));
        let err = lhs
            .iter()
            .zip(&rhs)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(
            err <= 1e-8 * l2(lhs),
            "column {c}: {err:e} vs {:e}",
            l2(lhs)
        );
    }
}

#[test]
fn dictionary_is_rigid_invariant() {
    let mesh = test_mesh(3, 6);
    let moved = shapes::rigid_motion(&mesh, [0.3, -1.0, 0.5], 2.1, [10.0, 0.0, -4.0]);
    let a = PreparedMesh::new(&mesh).unwrap();
    let b = PreparedMesh::new(&moved).unwrap();
    let samples = SampleSet::explicit(vec![0, 77, 200, 421, 590, 641], a.n_vertices()).unwrap();
    let params = DictionaryParams::new(25, 1.0, 1.0);
    let da = build_dictionary(&a.lap, &samples, &params).unwrap();
    let db = build_dictionary(&b.lap, &samples, &params).unwrap();
    let mut worst: f64 = 0.0;
    for j in 0..da.n_columns() {
        for i in 0..da.n_vertices() {
            worst = worst.max((da.columns[(i, j)] - db.columns[(i, j)]).abs());
        }
    }
    assert!(worst <= 1e-8, "max deviation {worst:e}");
}

/// At a fixed total diffusion time, more and shorter Euler steps approach
/// the full-spectrum Mexican hat monotonically.
#[test]
fn euler_wavelets_converge_to_spectral() {
    let (mesh, _) = normalize_unit_area(&test_mesh(2, 3)).unwrap();
    let lap = build_laplacian(&mesh).unwrap();
    let spec = generalized_eigs(&lap.mass, &lap.stiffness, EigCount::All).unwrap();
    let s = 40;
    let samples = SampleSet::explicit(vec![s], lap.n()).unwrap();
    let total = 0.02;
    let reference: Vec<f64> = spectral_mexican_hat(&spec, total, s, spec.count())
        .iter()
        .map(|v| lap.mass[s] * v)
        .collect();
    let mut errors = Vec::new();
    for steps in [5, 10, 20, 40, 80] {
        let t = total / steps as f64;
        let sys = factorize(&lap.mass, &lap.stiffness, t).unwrap();
        let block = propagate(
            &lap,
            &sys,
            mother_wavelets(&lap, &samples).unwrap(),
            &[0.0],
            steps,
        )
        .unwrap();
        let last = block.col_as_slice(steps - 1);
        let diff: Vec<f64> = last.iter().zip(&reference).map(|(a, b)| a - b).collect();
        errors.push(l2(&diff) / l2(&reference));
    }
    for w in errors.windows(2) {
        assert!(w[1] < w[0], "errors not decreasing: {errors:?}");
    }
    assert!(errors.last().unwrap() < &0.1, "{errors:?}");
}

#[test]
fn more_samples_do_not_hurt_self_matching() {
    let prep = PreparedMesh::new(&test_mesh(3, 5)).unwrap();
    let gt = PointMap::identity(prep.n_vertices());
    let params = DictionaryParams::new(25, 1.0, 1.0);
    let errors: Vec<f64> = [2, 4, 6]
        .iter()
        .map(|&n| {
            let s = sample(&prep.mesh, n, SamplingStrategy::FpsEuclidean, 0, None).unwrap();
            let map = self_match(&prep, &s, &params).unwrap();
            evaluate(&map, &gt, &prep.mesh).unwrap().mean_error
        })
        .collect();
    for w in errors.windows(2) {
        assert!(w[1] <= 1.1 * w[0], "error grew: {errors:?}");
    }
}

/// Repeating every column makes the dictionary rank deficient: without
/// regularization its normal matrix is numerically singular, with the
/// scale-decaying ridge it is well posed.
#[test]
fn regularization_is_necessary() {
    let prep = PreparedMesh::new(&test_mesh(2, 1)).unwrap();
    let samples = sample(&prep.mesh, 3, SamplingStrategy::FpsEuclidean, 0, None).unwrap();
    let dict = build_dictionary(&prep.lap, &samples, &DictionaryParams::new(5, 1.0, 1.0)).unwrap();
    let (n, k) = (dict.n_vertices(), dict.n_columns());
    let psi = Mat::from_fn(n, 2 * k, |i, j| dict.columns[(i, j % k)]);
    let unregularized = condition_number(normal_matrix(psi.as_ref(), &vec![0.0; 2 * k]).as_ref());
    assert!(unregularized > 1e12, "cond {unregularized:e}");
    let gamma = build_gamma(samples.len(), 10).unwrap();
    let regularized = condition_number(normal_matrix(psi.as_ref(), gamma.weights()).as_ref());
    assert!(
        regularized.is_finite() && regularized < 1e12,
        "cond {regularized:e}"
    );
    assert!(
        diffwave::matching::reconstruct_columns(psi.as_ref(), gamma.weights()).is_ok(),
        "regularized solve failed"
    );
}
