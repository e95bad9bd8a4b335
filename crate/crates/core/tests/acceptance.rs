//! Acceptance checks. Each criterion prints exactly one line
//!
//! ```text
//! [PASS] 3 zero-mean wavelets: max |mean|/‖col‖ = 1.2e-15
//! ```
//!
//! straight to the process stdout (bypassing the test harness capture), so
//! the verdicts show up in `cargo test` logs whether or not the run passes.
//! Criterion 12 needs external data and never gates the suite.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use diffwave::eigen::{generalized_eigs, EigCount, DEFAULT_DENSE_CAP};
use diffwave::eval::RhoSetting;
use diffwave::eval::{curve, evaluate};
use diffwave::matching::PointMap;
use diffwave::mesh::{
    build_laplacian, load_mesh_path, normalize_unit_area, sample, shapes, LaplacianPair, SampleSet,
    SamplingStrategy, TriangleMesh,
};
use diffwave::pipeline::{
    compare_wavelets, eigenbasis_self_match, pair_match, self_match, time_against_spectral,
    PreparedMesh,
};
use diffwave::spectral::{exponential_sum, spectral_mexican_hat, GtTimeMode, DEFAULT_TRUNCATION};
use diffwave::wavelet::{
    build_dictionary, diffusion_step, mother_wavelets, raw_wavelets, DictionaryKind,
    DictionaryParams,
};
use faer::Mat;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcome detail on success, reason on failure.
type Check = Result<String, String>;

fn report(id: &str, name: &str, outcome: &Check) {
    let line = match outcome {
        Ok(detail) => format!("[PASS] {id} {name}: {detail}"),
        Err(reason) => format!("[FAIL] {id} {name}: {reason}"),
    };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

/// Runs `check`, turning panics and library errors into `FAIL` lines.
fn run(id: &str, name: &str, check: impl FnOnce() -> Check) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(format!("panicked: {msg}"))
    });
    report(id, name, &outcome);
    outcome.is_ok()
}

fn ensure(cond: bool, detail: String) -> Check {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fail(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn unit_lap(mesh: &TriangleMesh) -> LaplacianPair {
    let (m, _) = normalize_unit_area(mesh).unwrap();
    build_laplacian(&m).unwrap()
}

fn l2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn column(m: &Mat<f64>, j: usize) -> Vec<f64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

fn fps(mesh: &TriangleMesh, n: usize) -> SampleSet {
    sample(mesh, n, SamplingStrategy::FpsEuclidean, 0, None).unwrap()
}

fn mass_conservation() -> Check {
    let lap = build_laplacian(&shapes::icosphere(3)).map_err(fail)?;
    if lap.n() != 642 {
        return Err(format!("icosphere has {} vertices", lap.n()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let f = Mat::from_fn(lap.n(), 1, |_, _| rng.random::<f64>());
    let clock = Instant::now();
    let g = diffusion_step(&lap, 1e-2, f.as_ref(), None).map_err(fail)?;
    let secs = clock.elapsed().as_secs_f64();
    let before = lap.integrate(&column(&f, 0));
    let after = lap.integrate(&column(&g, 0));
    let rel = (after - before).abs() / before.abs();
    ensure(
        rel <= 1e-10 && secs < 1.0,
        format!("relative drift {rel:.2e} (≤ 1e-10) in {secs:.3}s"),
    )
}

/// Backward Euler against `Σ e^{-tλ}Φ Φᵀ A f` on the unit-radius icosphere
/// for a smooth field. The error is measured relative to the exact change
/// `‖e^{-tL}f − f‖`, i.e. as a consistency error, which is what halves with
/// the step; the error relative to the solution itself is second order
/// for a single step and is printed for reference.
fn euler_consistency() -> Check {
    let clock = Instant::now();
    let mesh = shapes::icosphere(3);
    let lap = build_laplacian(&mesh).map_err(fail)?;
    let spec = generalized_eigs(&lap.mass, &lap.stiffness, EigCount::All).map_err(fail)?;
    let f: Vec<f64> = mesh
        .vertices()
        .iter()
        .map(|[x, y, z]| 1.0 + x + y * z + z.powi(3))
        .collect();
    let n = lap.n();
    let phi = spec.eigenvectors();
    let coeffs: Vec<f64> = (0..spec.count())
        .map(|k| (0..n).map(|i| phi[(i, k)] * lap.mass[i] * f[i]).sum())
        .collect();
    let errors = |t: f64| -> Result<(f64, f64), String> {
        let fm = Mat::from_fn(n, 1, |i, _| f[i]);
        let step = column(
            &diffusion_step(&lap, t, fm.as_ref(), None).map_err(fail)?,
            0,
        );
        let mut exact = vec![0.0; n];
        for (k, (c, l)) in coeffs.iter().zip(spec.eigenvalues()).enumerate() {
            let w = c * (-t * l).exp();
            for (i, e) in exact.iter_mut().enumerate() {
                *e += w * phi[(i, k)];
            }
        }
        let diff: Vec<f64> = step.iter().zip(&exact).map(|(a, b)| a - b).collect();
        let change: Vec<f64> = exact.iter().zip(&f).map(|(a, b)| a - b).collect();
        Ok((l2(&diff) / l2(&change), l2(&diff) / l2(&exact)))
    };
    let (e1, s1) = errors(1e-3)?;
    let (e2, s2) = errors(5e-4)?;
    let ratio = e1 / e2;
    let secs = clock.elapsed().as_secs_f64();
    ensure(
        e1 <= 5e-3 && (1.8..=2.2).contains(&ratio) && secs < 30.0,
        format!(
            "error {e1:.3e} (≤ 5e-3), ratio t:t/2 = {ratio:.3} (in [1.8, 2.2]); \
             solution-relative {s1:.2e}/{s2:.2e}; {secs:.1}s"
        ),
    )
}

fn zero_mean_wavelets() -> Check {
    let lap = unit_lap(&shapes::icosphere(3));
    let (mesh, _) = normalize_unit_area(&shapes::icosphere(3)).unwrap();
    let samples = fps(&mesh, 6);
    let (raw, _) =
        raw_wavelets(&lap, &samples, &DictionaryParams::new(25, 1.0, 1.0)).map_err(fail)?;
    let worst = (0..raw.ncols())
        .map(|j| {
            let c = column(&raw, j);
            lap.integrate(&c).abs() / l2(&c)
        })
        .fold(0.0, f64::max);
    ensure(
        raw.ncols() == 150 && worst <= 1e-8,
        format!(
            "{} columns, max |mean|/‖col‖ = {worst:.2e} (≤ 1e-8)",
            raw.ncols()
        ),
    )
}

/// The mother wavelet `A⁻¹Wδ_s` equals `A_ss · Σ λΦ(s)Φ` because the unit
/// indicator carries mass `A_ss`.
fn mother_matches_spectrum() -> Check {
    let mesh = shapes::jitter_radial(&shapes::icosphere(2), 0.05, 3);
    let lap = unit_lap(&mesh);
    if lap.n() > 300 {
        return Err(format!("{} vertices", lap.n()));
    }
    let spec = generalized_eigs(&lap.mass, &lap.stiffness, EigCount::All).map_err(fail)?;
    let samples = SampleSet::explicit(vec![0, 17, 101], lap.n()).map_err(fail)?;
    let mother = mother_wavelets(&lap, &samples).map_err(fail)?;
    let mut worst_abs: f64 = 0.0;
    let mut worst_rel: f64 = 0.0;
    for (j, &s) in samples.indices().iter().enumerate() {
        let hat = spectral_mexican_hat(&spec, 0.0, s, spec.count());
        let ours = column(&mother, j);
        let diff: Vec<f64> = ours
            .iter()
            .zip(&hat)
            .map(|(a, b)| a - lap.mass[s] * b)
            .collect();
        worst_abs = worst_abs.max(l2(&diff));
        worst_rel = worst_rel.max(l2(&diff) / l2(&ours));
    }
    ensure(
        worst_rel <= 1e-6,
        format!(
            "{} vertices, relative L2 {worst_rel:.2e} (≤ 1e-6), absolute {worst_abs:.2e}",
            lap.n()
        ),
    )
}

fn identity_and_rigid_transfer() -> Check {
    let mesh = shapes::jitter_radial(&shapes::icosphere(3), 0.05, 11);
    let moved = shapes::rigid_motion(&mesh, [1.0, 2.0, -0.5], 0.9, [3.0, -1.0, 2.0]);
    let a = PreparedMesh::new(&mesh).map_err(fail)?;
    let b = PreparedMesh::new(&moved).map_err(fail)?;
    let landmarks = fps(&a.mesh, 6);
    let identity = PointMap::identity(a.n_vertices());
    let mut counts = Vec::new();
    for target in [&a, &b] {
        let map = pair_match(
            &a,
            target,
            &landmarks,
            &landmarks,
            25,
            1.0,
            RhoSetting::Auto,
            DictionaryKind::Wavelet,
        )
        .map_err(fail)?;
        counts.push(map.mismatches(&identity));
    }
    ensure(
        counts == [0, 0],
        format!("mismatches self = {}, rigid = {}", counts[0], counts[1]),
    )
}

fn self_matching_beats_eigenbasis() -> Check {
    let clock = Instant::now();
    let mesh = shapes::jitter_radial(&shapes::icosphere(3), 0.05, 5);
    let prep = PreparedMesh::new(&mesh).map_err(fail)?;
    let samples = fps(&prep.mesh, 6);
    let gt = PointMap::identity(prep.n_vertices());
    let ours = self_match(&prep, &samples, &DictionaryParams::new(25, 1.0, 1.0)).map_err(fail)?;
    let base = eigenbasis_self_match(&prep, 6, DEFAULT_DENSE_CAP).map_err(fail)?;
    let e_ours = evaluate(&ours, &gt, &prep.mesh).map_err(fail)?.mean_error;
    let e_base = evaluate(&base, &gt, &prep.mesh).map_err(fail)?.mean_error;
    let secs = clock.elapsed().as_secs_f64();
    ensure(
        e_ours <= 0.5 * e_base && secs < 60.0,
        format!(
            "mean error wavelet {e_ours:.3e} vs eigenbasis (7 functions) {e_base:.3e}, \
             ratio {:.3} (≤ 0.5); {secs:.1}s",
            e_ours / e_base
        ),
    )
}

/// A sphere only admits rigid isometries, so "near-isometric" means a mild
/// deformation (about 3.5% area change). AUC@0.25 is the compared quantity;
/// mean errors are printed alongside for context.
fn wavelets_beat_heat() -> Check {
    let base = shapes::icosphere(3);
    let source = PreparedMesh::new(&base).map_err(fail)?;
    let target = PreparedMesh::new(&shapes::smooth_deform(&base, 0.1)).map_err(fail)?;
    let gt = PointMap::identity(source.n_vertices());
    let mut details = Vec::new();
    let mut ok = true;
    for n in [4, 8] {
        let landmarks = fps(&source.mesh, n);
        let mut auc = [0.0; 2];
        let mut mean = [0.0; 2];
        for (slot, kind) in [DictionaryKind::Wavelet, DictionaryKind::Heat]
            .into_iter()
            .enumerate()
        {
            let map = pair_match(
                &source,
                &target,
                &landmarks,
                &landmarks,
                25,
                1.0,
                RhoSetting::Auto,
                kind,
            )
            .map_err(fail)?;
            let c = evaluate(&map, &gt, &target.mesh).map_err(fail)?;
            auc[slot] = c.auc_025;
            mean[slot] = c.mean_error;
        }
        ok &= auc[0] >= auc[1];
        details.push(format!(
            "|S|={n}: wavelet {:.3} vs heat {:.3} (mean error {:.3} / {:.3})",
            auc[0], auc[1], mean[0], mean[1]
        ));
    }
    ensure(ok, format!("AUC@0.25 {}", details.join(", ")))
}

fn timing_against_spectral() -> Check {
    let mesh = shapes::jitter_radial(&shapes::icosphere(5), 0.02, 1);
    let prep = PreparedMesh::new(&mesh).map_err(fail)?;
    let samples = fps(&prep.mesh, 10);
    let timing = time_against_spectral(
        &prep,
        &samples,
        &DictionaryParams::new(25, 1.0, 1.0),
        300,
        DEFAULT_DENSE_CAP,
    )
    .map_err(fail)?;
    let speedup = timing.speedup();
    ensure(
        speedup >= 1.5 && timing.eigenpairs == 300,
        format!(
            "{} vertices: dictionary {:.3}s vs {} eigenpairs ({}) {:.2}s + evaluation {:.3}s, \
             speedup ×{speedup:.1} (≥ 1.5)",
            prep.n_vertices(),
            timing.wavelet,
            timing.eigenpairs,
            timing.eigensolver,
            timing.eigenpairs_seconds,
            timing.spectral_eval,
        ),
    )
}

/// Rows of a single-sample dictionary separate all vertices.
fn vertices_distinguishable() -> Check {
    let mesh = shapes::jitter_radial(&shapes::icosphere(3), 0.05, 9);
    let prep = PreparedMesh::new(&mesh).map_err(fail)?;
    let p = sample(&prep.mesh, 1, SamplingStrategy::Random, 42, None).map_err(fail)?;
    let dict =
        build_dictionary(&prep.lap, &p, &DictionaryParams::new(25, 1.0, 1.0)).map_err(fail)?;
    let d = &dict.columns;
    let n = d.nrows();
    let mut min_gap = f64::INFINITY;
    for a in 0..n {
        for b in a + 1..n {
            let gap = (0..d.ncols())
                .map(|j| (d[(a, j)] - d[(b, j)]).abs())
                .fold(0.0, f64::max);
            min_gap = min_gap.min(gap);
        }
    }
    ensure(
        min_gap > 1e-9,
        format!(
            "sample {}, {n} vertices, min pairwise L∞ gap {min_gap:.3e} (> 1e-9)",
            p.indices()[0]
        ),
    )
}

fn brute_force_sum(terms: &[(f64, f64)], t: f64) -> f64 {
    let mut s = 0.0;
    for &(c, l) in terms {
        s += c * (-l * t).exp();
    }
    s
}

fn random_terms(rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    let len = rng.random_range(1..=5);
    let mut lambda = rng.random_range(0.0..1.0);
    (0..len)
        .map(|_| {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let c = sign * rng.random_range(0.5..2.0);
            let term = (c, lambda);
            lambda += rng.random_range(0.1..3.0);
            term
        })
        .collect()
}

/// Pairs of exponential sums with strictly increasing exponents that differ
/// in at least one exponent or coefficient never agree on a time grid.
fn exponential_sums_distinguished() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let grid: Vec<f64> = (0..100).map(|i| i as f64 / 99.0).collect();
    let mut min_gap = f64::INFINITY;
    let mut eval_err: f64 = 0.0;
    for _ in 0..100 {
        let a = random_terms(&mut rng);
        let mut b = a.clone();
        let k = rng.random_range(0..b.len());
        if rng.random::<bool>() {
            // move one exponent inside its gap so the sequence stays increasing
            let lo = if k == 0 { 0.0 } else { b[k - 1].1 };
            let hi = b.get(k + 1).map_or(b[k].1 + 1.0, |t| t.1);
            let mut l = rng.random_range(lo..hi);
            if (l - b[k].1).abs() < 1e-3 {
                l = 0.5 * (lo + hi);
            }
            b[k].1 = l;
        } else {
            b[k].0 += rng.random_range(0.1..1.0);
        }
        if rng.random::<bool>() {
            let last = b.last().unwrap().1;
            b.push((
                rng.random_range(0.5..2.0),
                last + rng.random_range(0.1..3.0),
            ));
        }
        let gap = grid
            .iter()
            .map(|&t| {
                let (fa, fb) = (exponential_sum(&a, t), exponential_sum(&b, t));
                eval_err = eval_err
                    .max((fa - brute_force_sum(&a, t)).abs())
                    .max((fb - brute_force_sum(&b, t)).abs());
                (fa - fb).abs()
            })
            .fold(0.0, f64::max);
        min_gap = min_gap.min(gap);
    }
    ensure(
        min_gap > 1e-8 && eval_err <= 1e-12,
        format!("min max-difference {min_gap:.3e} (> 1e-8), evaluator deviation {eval_err:.1e}"),
    )
}

fn evaluation_correctness() -> Check {
    let mesh = shapes::jitter_radial(&shapes::icosphere(2), 0.05, 1);
    let id = PointMap::identity(mesh.n_vertices());
    let c = evaluate(&id, &id, &mesh).map_err(fail)?;
    if c.auc_025 != 1.0 || c.mean_error != 0.0 {
        return Err(format!(
            "identity gives auc {} and mean {}",
            c.auc_025, c.mean_error
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for trial in 0..1000 {
        let len = rng.random_range(1..200);
        let errors: Vec<f64> = (0..len)
            .map(|_| match rng.random_range(0..20) {
                0 => f64::INFINITY,
                1 => 0.0,
                _ => rng.random_range(0.0..1.0),
            })
            .collect();
        let c = curve(&errors, 100, 0.5).map_err(fail)?;
        if c.fractions.windows(2).any(|w| w[1] < w[0]) {
            return Err(format!("trial {trial}: fractions decrease"));
        }
        if c.fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(format!("trial {trial}: fraction outside [0, 1]"));
        }
    }
    Ok("identity auc_025 = 1, mean = 0; 1000 random curves non-decreasing".into())
}

#[test]
fn acceptance_criteria() {
    type Criterion = (&'static str, &'static str, fn() -> Check);
    let checks: [Criterion; 11] = [
        ("1", "mass conservation", mass_conservation),
        ("2", "first-order Euler consistency", euler_consistency),
        ("3", "zero-mean wavelets", zero_mean_wavelets),
        ("4", "mother wavelet vs spectrum", mother_matches_spectrum),
        (
            "5",
            "identity and rigid transfer",
            identity_and_rigid_transfer,
        ),
        (
            "6",
            "self-matching vs eigenbasis",
            self_matching_beats_eigenbasis,
        ),
        ("7", "wavelet vs heat transfer", wavelets_beat_heat),
        ("8", "timing vs spectral route", timing_against_spectral),
        ("9", "vertex distinguishability", vertices_distinguishable),
        (
            "10",
            "exponential sums distinguished",
            exponential_sums_distinguished,
        ),
        ("11", "evaluation correctness", evaluation_correctness),
    ];
    // the harness prints "test ... " without a newline before running us
    let _ = writeln!(std::io::stdout().lock());
    let failed: Vec<&str> = checks
        .iter()
        .filter(|(id, name, check)| !run(id, name, check))
        .map(|(id, _, _)| *id)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

/// Set `DIFFWAVE_DATASET_DIR` to a directory of remeshed ~5K-vertex OFF/OBJ
/// meshes to run the dataset comparison; otherwise it reports `SKIP`.
#[test]
fn optional_dataset_comparison() {
    let Some(dir) = std::env::var_os("DIFFWAVE_DATASET_DIR") else {
        let _ = writeln!(
            std::io::stdout().lock(),
            "[SKIP] 12 dataset comparison: DIFFWAVE_DATASET_DIR not set (non-gating)"
        );
        return;
    };
    let outcome = catch_unwind(|| dataset_comparison(Path::new(&dir)))
        .unwrap_or_else(|_| Err("panicked".into()));
    let line = match &outcome {
        Ok(d) => format!("[PASS] 12 dataset comparison (non-gating): {d}"),
        Err(e) => format!("[FAIL] 12 dataset comparison (non-gating): {e}"),
    };
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

fn dataset_comparison(dir: &Path) -> Check {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(fail)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("off" | "obj")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(format!("no meshes in {}", dir.display()));
    }
    let (mut ours, mut truncated) = (0.0, 0.0);
    for path in &paths {
        let prep = PreparedMesh::new(&load_mesh_path(path).map_err(fail)?).map_err(fail)?;
        let samples = fps(&prep.mesh, 10);
        let cmp = compare_wavelets(
            &prep,
            &samples,
            &DictionaryParams::new(25, 1.0, 1.0),
            DEFAULT_TRUNCATION,
            GtTimeMode::Linear,
            prep.n_vertices().max(DEFAULT_DENSE_CAP),
        )
        .map_err(fail)?;
        ours += cmp.rows[0].1.l2_mean;
        truncated += cmp.rows[1].1.l2_mean;
    }
    let n = paths.len() as f64;
    let (ours, truncated) = (ours / n, truncated / n);
    ensure(
        ours <= 2.0 * 1.7e-2 && ours < truncated,
        format!(
            "{} meshes, mean L2 {ours:.3e} (≤ 3.4e-2) vs truncated {truncated:.3e}",
            paths.len()
        ),
    )
}
