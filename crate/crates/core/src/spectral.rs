//! Spectral reference constructions: heat kernel and Mexican-hat wavelets
//! from eigenpairs, ground-truth dictionaries, functional maps, and the
//! eigenbasis self-matching baseline.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, MatRef, Par};
use thiserror::Error;

use crate::eigen::Spectrum;
use crate::matching::{argmax_of_product, nearest_rows, MatchError, PointMap};
use crate::mesh::SampleSet;
use crate::wavelet::{normalize_columns, Dictionary, WaveletError};

/// Number of eigenpairs kept by the truncated Mexican-hat baseline.
pub const DEFAULT_TRUNCATION: usize = 300;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("basis size {k} exceeds the {available} available eigenpairs")]
    BasisTooLarge { k: usize, available: usize },
    #[error("no scale has a positive reference time")]
    NoValidScales,
    #[error(transparent)]
    Wavelet(#[from] WaveletError),
    #[error(transparent)]
    Match(#[from] MatchError),
}

/// `Σ_k w(λ_k) Φ_k(sample) Φ_k(·)` over the first `k` eigenpairs.
fn filtered_sum(spec: &Spectrum, k: usize, sample: usize, w: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut out = vec![0.0; spec.n_vertices()];
    for (j, &lambda) in spec.eigenvalues()[..k].iter().enumerate() {
        let phi = spec.vector(j);
        let c = w(lambda) * phi[sample];
        out.iter_mut().zip(phi).for_each(|(o, p)| *o += c * p);
    }
    out
}

/// Heat kernel `K_t(sample, ·) = Σ e^{-tλ} Φ(sample) Φ(·)` over all
/// available eigenpairs.
pub fn spectral_heat_kernel(spec: &Spectrum, t: f64, sample: usize) -> Vec<f64> {
    filtered_sum(spec, spec.count(), sample, |l| (-t * l).exp())
}

/// Mexican-hat wavelet `Σ λ e^{-tλ} Φ(sample) Φ(·)` over at most
/// `truncation` eigenpairs, i.e. `−∂_t` of the heat kernel.
pub fn spectral_mexican_hat(spec: &Spectrum, t: f64, sample: usize, truncation: usize) -> Vec<f64> {
    filtered_sum(spec, truncation.min(spec.count()), sample, |l| {
        l * (-t * l).exp()
    })
}

/// `Σ c_i e^{-λ_i t}` for `terms = [(c_i, λ_i)]`.
pub fn exponential_sum(terms: &[(f64, f64)], t: f64) -> f64 {
    terms.iter().map(|&(c, l)| c * (-l * t).exp()).sum()
}

/// How reference times are derived from the Euler step `t` at scale `n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum GtTimeMode {
    /// `log(n·t)`; scales where this is not positive are dropped.
    #[default]
    Log,
    /// `n·t`, the total diffusion time of `n` Euler steps.
    Linear,
}

impl std::fmt::Display for GtTimeMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Log => "log",
            Self::Linear => "linear",
        })
    }
}

impl std::str::FromStr for GtTimeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "log" => Ok(Self::Log),
            "linear" => Ok(Self::Linear),
            other => Err(format!(
                "unknown time mode `{other}` (expected log or linear)"
            )),
        }
    }
}

/// `(scale, time)` pairs with a positive time, warning about the rest.
pub fn reference_times(t_step: f64, n_scales: usize, mode: GtTimeMode) -> Vec<(usize, f64)> {
    let mut kept = Vec::with_capacity(n_scales);
    let mut dropped = Vec::new();
    for n in 1..=n_scales {
        let time = match mode {
            GtTimeMode::Log => (n as f64 * t_step).ln(),
            GtTimeMode::Linear => n as f64 * t_step,
        };
        if time > 0.0 && time.is_finite() {
            kept.push((n, time));
        } else {
            dropped.push(n);
        }
    }
    if !dropped.is_empty() {
        log::warn!(
            "{} of {n_scales} scales have a non-positive reference time and are excluded (first: {})",
            dropped.len(),
            dropped[0]
        );
    }
    kept
}

/// Scale-labelled dictionary of spectral wavelets; `scales[i]` and
/// `times[i]` describe column block `i`.
#[derive(Clone, Debug)]
pub struct SpectralDictionary {
    pub columns: Mat<f64>,
    pub n_samples: usize,
    pub scales: Vec<usize>,
    pub times: Vec<f64>,
    pub truncation: usize,
}

/// Read access to scale-major column blocks, shared by Euler-built and
/// spectral dictionaries for error measurement.
pub trait ScaleColumns {
    fn columns(&self) -> MatRef<'_, f64>;
    fn n_samples(&self) -> usize;
    /// 1-based scale label of each column block, in storage order.
    fn scale_labels(&self) -> Vec<usize>;
}

impl ScaleColumns for Dictionary {
    fn columns(&self) -> MatRef<'_, f64> {
        self.columns.as_ref()
    }

    fn n_samples(&self) -> usize {
        self.samples.len()
    }

    fn scale_labels(&self) -> Vec<usize> {
        (1..=self.n_scales).collect()
    }
}

impl ScaleColumns for SpectralDictionary {
    fn columns(&self) -> MatRef<'_, f64> {
        self.columns.as_ref()
    }

    fn n_samples(&self) -> usize {
        self.n_samples
    }

    fn scale_labels(&self) -> Vec<usize> {
        self.scales.clone()
    }
}

/// Unnormalized Mexican-hat block, one column per `(time, sample)` pair in
/// scale-major order, computed as `Φ_K · C`.
pub fn mexican_hat_block(
    spec: &Spectrum,
    samples: &[usize],
    times: &[f64],
    truncation: usize,
) -> Mat<f64> {
    let k = truncation.min(spec.count());
    let phi = spec.eigenvectors().subcols(0, k);
    let lambda = &spec.eigenvalues()[..k];
    let s = samples.len();
    let coeffs = Mat::from_fn(k, s * times.len(), |i, c| {
        let (t, sample) = (times[c / s], samples[c % s]);
        lambda[i] * (-t * lambda[i]).exp() * phi[(sample, i)]
    });
    let mut out = Mat::zeros(spec.n_vertices(), coeffs.ncols());
    matmul(
        out.as_mut(),
        Accum::Replace,
        phi,
        coeffs.as_ref(),
        1.0,
        Par::rayon(0),
    );
    out
}

/// Spectral wavelets at the reference times of an Euler dictionary with
/// step `t_step`, normalized like [`Dictionary`] columns (A-weighted L1,
/// then range). `truncation = spec.count()` gives the ground truth.
pub fn spectral_wavelets(
    spec: &Spectrum,
    mass: &[f64],
    t_step: f64,
    n_scales: usize,
    samples: &SampleSet,
    mode: GtTimeMode,
    truncation: usize,
) -> Result<SpectralDictionary, SpectralError> {
    if mass.len() != spec.n_vertices() {
        return Err(SpectralError::Dimension(format!(
            "mass has {} entries, spectrum {} vertices",
            mass.len(),
            spec.n_vertices()
        )));
    }
    if let Some(&s) = samples.indices().iter().find(|&&s| s >= spec.n_vertices()) {
        return Err(WaveletError::SampleOutOfRange {
            index: s,
            n_vertices: spec.n_vertices(),
        }
        .into());
    }
    let pairs = reference_times(t_step, n_scales, mode);
    if pairs.is_empty() {
        return Err(SpectralError::NoValidScales);
    }
    let times: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut columns = mexican_hat_block(spec, samples.indices(), &times, truncation);
    normalize_columns(mass, &mut columns, samples.len(), true)?;
    Ok(SpectralDictionary {
        columns,
        n_samples: samples.len(),
        scales: pairs.iter().map(|p| p.0).collect(),
        times,
        truncation: truncation.min(spec.count()),
    })
}

/// Full-spectrum reference dictionary.
pub fn ground_truth_wavelets(
    spec: &Spectrum,
    mass: &[f64],
    t_step: f64,
    n_scales: usize,
    samples: &SampleSet,
    mode: GtTimeMode,
) -> Result<SpectralDictionary, SpectralError> {
    spectral_wavelets(spec, mass, t_step, n_scales, samples, mode, spec.count())
}

/// Per-scale and averaged errors of a candidate against a reference.
#[derive(Clone, Debug, PartialEq)]
pub struct DictionaryErrors {
    pub scales: Vec<usize>,
    /// Mean over samples of `√(Σ A_ii d_i²)` at each scale.
    pub l2: Vec<f64>,
    /// Mean over samples of `max |d_i|` at each scale.
    pub linf: Vec<f64>,
    pub l2_mean: f64,
    pub linf_mean: f64,
}

/// Compares every reference scale with the candidate block carrying the
/// same scale label.
pub fn dictionary_error(
    candidate: &impl ScaleColumns,
    reference: &impl ScaleColumns,
    mass: &[f64],
) -> Result<DictionaryErrors, SpectralError> {
    let (c, r) = (candidate.columns(), reference.columns());
    let s = reference.n_samples();
    if candidate.n_samples() != s || c.nrows() != r.nrows() || mass.len() != r.nrows() {
        return Err(SpectralError::Dimension(format!(
            "candidate {}x{} ({} samples), reference {}x{} ({} samples), mass {}",
            c.nrows(),
            c.ncols(),
            candidate.n_samples(),
            r.nrows(),
            r.ncols(),
            s,
            mass.len()
        )));
    }
    let cand_labels = candidate.scale_labels();
    let ref_labels = reference.scale_labels();
    let mut out = DictionaryErrors {
        scales: Vec::new(),
        l2: Vec::new(),
        linf: Vec::new(),
        l2_mean: 0.0,
        linf_mean: 0.0,
    };
    for (rb, &label) in ref_labels.iter().enumerate() {
        let cb = cand_labels
            .iter()
            .position(|&l| l == label)
            .ok_or_else(|| SpectralError::Dimension(format!("candidate has no scale {label}")))?;
        let (mut l2, mut linf) = (0.0, 0.0);
        for j in 0..s {
            let a = c.col(cb * s + j);
            let b = r.col(rb * s + j);
            let (mut sq, mut mx) = (0.0f64, 0.0f64);
            for i in 0..mass.len() {
                let d = a[i] - b[i];
                sq += mass[i] * d * d;
                mx = mx.max(d.abs());
            }
            l2 += sq.sqrt();
            linf += mx;
        }
        out.scales.push(label);
        out.l2.push(l2 / s as f64);
        out.linf.push(linf / s as f64);
    }
    let n = out.scales.len().max(1) as f64;
    out.l2_mean = out.l2.iter().sum::<f64>() / n;
    out.linf_mean = out.linf.iter().sum::<f64>() / n;
    Ok(out)
}

/// `k_target × k_source` matrix acting on spectral coefficients.
#[derive(Clone, Debug)]
pub struct FunctionalMap {
    pub matrix: Mat<f64>,
}

impl FunctionalMap {
    pub fn identity(k: usize) -> Self {
        Self {
            matrix: Mat::identity(k, k),
        }
    }

    pub fn k_source(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn k_target(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `C = Φ_Nᵀ A_N Π Φ_M` with `Π[gt(x), x] = 1`, on the first `k` eigenpairs.
pub fn gt_functional_map(
    spec_m: &Spectrum,
    spec_n: &Spectrum,
    mass_n: &[f64],
    gt_map: &PointMap,
    k: usize,
) -> Result<FunctionalMap, SpectralError> {
    let available = spec_m.count().min(spec_n.count());
    if k > available {
        return Err(SpectralError::BasisTooLarge { k, available });
    }
    if gt_map.source_size() != spec_m.n_vertices()
        || gt_map.target_size() != spec_n.n_vertices()
        || mass_n.len() != spec_n.n_vertices()
    {
        return Err(SpectralError::Dimension(format!(
            "map {} -> {}, spectra on {} and {} vertices, mass {}",
            gt_map.source_size(),
            gt_map.target_size(),
            spec_m.n_vertices(),
            spec_n.n_vertices(),
            mass_n.len()
        )));
    }
    let phi_m = spec_m.eigenvectors();
    // A_N Π Φ_M: rows of Φ_M accumulated at their images, then mass-weighted
    let mut pushed = Mat::<f64>::zeros(spec_n.n_vertices(), k);
    for (x, &y) in gt_map.targets().iter().enumerate() {
        for j in 0..k {
            pushed[(y, j)] += phi_m[(x, j)];
        }
    }
    for j in 0..k {
        for (v, a) in pushed.col_as_slice_mut(j).iter_mut().zip(mass_n) {
            *v *= a;
        }
    }
    let mut matrix = Mat::zeros(k, k);
    matmul(
        matrix.as_mut(),
        Accum::Replace,
        spec_n.eigenvectors().subcols(0, k).transpose(),
        pushed.as_ref(),
        1.0,
        Par::rayon(0),
    );
    Ok(FunctionalMap { matrix })
}

/// Sends `x ∈ M` to the `y ∈ N` minimizing `‖C Φ_M(x) − Φ_N(y)‖`.
pub fn fmap_to_pointmap(
    c: &FunctionalMap,
    spec_m: &Spectrum,
    spec_n: &Spectrum,
) -> Result<PointMap, SpectralError> {
    let (km, kn) = (c.k_source(), c.k_target());
    if km > spec_m.count() || kn > spec_n.count() {
        return Err(SpectralError::BasisTooLarge {
            k: km.max(kn),
            available: spec_m.count().min(spec_n.count()),
        });
    }
    let mut embedded = Mat::zeros(spec_m.n_vertices(), kn);
    matmul(
        embedded.as_mut(),
        Accum::Replace,
        spec_m.eigenvectors().subcols(0, km),
        c.matrix.transpose(),
        1.0,
        Par::rayon(0),
    );
    let targets = nearest_rows(embedded.as_ref(), spec_n.eigenvectors().subcols(0, kn));
    Ok(PointMap::new(targets, spec_n.n_vertices())?)
}

/// Self-matching in the eigenbasis: the δ at `x` projected onto the first
/// `k` eigenfunctions is `Σ Φ_i(x) Φ_i(·)` up to a positive factor, and
/// `x` is sent to its argmax (ties to the lowest index).
pub fn eigenbasis_delta_map(spec: &Spectrum, k: usize) -> Result<PointMap, SpectralError> {
    if k == 0 || k > spec.count() {
        return Err(SpectralError::BasisTooLarge {
            k,
            available: spec.count(),
        });
    }
    let phi = spec.eigenvectors().subcols(0, k);
    Ok(PointMap::new(
        argmax_of_product(phi, phi),
        spec.n_vertices(),
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::{generalized_eigs, EigCount};
    use crate::mesh::{build_laplacian, normalize_unit_area, shapes, LaplacianPair, TriangleMesh};
    use crate::sparse::factorize;

    fn unit(mesh: TriangleMesh) -> (TriangleMesh, LaplacianPair, Spectrum) {
        let (mesh, _) = normalize_unit_area(&mesh).unwrap();
        let lap = build_laplacian(&mesh).unwrap();
        let spec = generalized_eigs(&lap.mass, &lap.stiffness, EigCount::All).unwrap();
        (mesh, lap, spec)
    }

    fn jittered(level: usize, seed: u64) -> TriangleMesh {
        shapes::jitter_radial(&shapes::icosphere(level), 0.08, seed)
    }

    #[test]
    fn heat_kernel_limits() {
        let (_, lap, spec) = unit(jittered(2, 4));
        let s = 17;
        let k0 = spectral_heat_kernel(&spec, 0.0, s);
        for (i, v) in k0.iter().enumerate() {
            let want = if i == s { 1.0 / lap.mass[s] } else { 0.0 };
            assert!((v - want).abs() < 1e-6 * (1.0 / lap.mass[s]), "{i}: {v}");
        }
        let far = spectral_heat_kernel(&spec, 1e4, s);
        assert!(far.iter().all(|v| (v - 1.0).abs() < 1e-8));
        let a = spectral_heat_kernel(&spec, 0.01, 3);
        let b = spectral_heat_kernel(&spec, 0.01, 40);
        assert!((a[40] - b[3]).abs() < 1e-10);
    }

    #[test]
    fn mexican_hat_is_negative_time_derivative() {
        let (_, lap, spec) = unit(jittered(2, 5));
        let (t, h, s) = (0.01, 1e-6, 9);
        let hat = spectral_mexican_hat(&spec, t, s, spec.count());
        let plus = spectral_heat_kernel(&spec, t + h, s);
        let minus = spectral_heat_kernel(&spec, t - h, s);
        let scale = hat.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..hat.len() {
            let fd = -(plus[i] - minus[i]) / (2.0 * h);
            assert!((fd - hat[i]).abs() <= 1e-4 * scale, "{i}");
        }
        let mean = lap.integrate(&hat);
        assert!(mean.abs() < 1e-10 * scale);
    }

    #[test]
    fn mother_wavelet_matches_full_spectrum_at_zero_time() {
        let (_, lap, spec) = unit(jittered(2, 6));
        let s = SampleSet::explicit(vec![5, 80], lap.n()).unwrap();
        let mother = crate::wavelet::mother_wavelets(&lap, &s).unwrap();
        for (j, &v) in s.indices().iter().enumerate() {
            // the spectral sum diffuses A⁻¹δ_s, the mother wavelet δ_s
            let hat: Vec<f64> = spectral_mexican_hat(&spec, 0.0, v, spec.count())
                .iter()
                .map(|h| h * lap.mass[v])
                .collect();
            let err: f64 = hat
                .iter()
                .zip(mother.col_as_slice(j))
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            let norm: f64 = hat.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(err <= 1e-6 * norm.max(1.0), "{err}");
        }
    }

    #[test]
    fn reference_time_modes() {
        let e = std::f64::consts::E;
        assert_eq!(reference_times(e, 1, GtTimeMode::Log), vec![(1, 1.0)]);
        let log = reference_times(0.1, 25, GtTimeMode::Log);
        assert_eq!(log.first().unwrap().0, 11);
        assert_eq!(log.len(), 15);
        assert_eq!(reference_times(0.1, 3, GtTimeMode::Linear).len(), 3);
        assert!(reference_times(0.01, 5, GtTimeMode::Log).is_empty());
    }

    #[test]
    fn ground_truth_is_range_normalized_and_exact_copy_has_zero_error() {
        let (_, lap, spec) = unit(jittered(2, 7));
        let s = SampleSet::explicit(vec![1, 30, 99], lap.n()).unwrap();
        let gt = ground_truth_wavelets(&spec, &lap.mass, 0.2, 10, &s, GtTimeMode::Log).unwrap();
        // log(5 · 0.2) = 0 is excluded
        assert_eq!(gt.scales, (6..=10).collect::<Vec<_>>());
        for c in 0..gt.columns.ncols() {
            let col = gt.columns.col_as_slice(c);
            assert!(col.iter().all(|v| v.is_finite()));
            assert!((crate::wavelet::value_range(col) - 1.0).abs() < 1e-10);
        }
        let e = dictionary_error(&gt, &gt, &lap.mass).unwrap();
        assert!(e.l2.iter().chain(&e.linf).all(|&v| v == 0.0));

        let mut scaled = gt.clone();
        let mut doubled = gt.clone();
        scaled
            .columns
            .col_as_slice_mut(0)
            .iter_mut()
            .for_each(|v| *v *= 1.5);
        doubled
            .columns
            .col_as_slice_mut(0)
            .iter_mut()
            .for_each(|v| *v *= 3.0);
        let e1 = dictionary_error(&scaled, &gt, &lap.mass).unwrap();
        let e2 = dictionary_error(&doubled, &gt, &lap.mass).unwrap();
        assert!((e2.l2[0] - 4.0 * e1.l2[0]).abs() < 1e-12 * e2.l2[0]);
        assert!((e2.linf_mean - 4.0 * e1.linf_mean).abs() < 1e-12 * e2.linf_mean);

        let t = ground_truth_wavelets(&spec, &lap.mass, 0.2, 10, &s, GtTimeMode::Linear).unwrap();
        assert!(dictionary_error(&t, &gt, &lap.mass).is_ok());
        assert!(dictionary_error(&gt, &t, &lap.mass).is_err());
    }

    #[test]
    fn functional_map_identity_and_rigid_copy() {
        let (mesh, lap, spec) = unit(jittered(2, 9));
        let n = mesh.n_vertices();
        let id = PointMap::identity(n);
        let c = gt_functional_map(&spec, &spec, &lap.mass, &id, n).unwrap();
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((c.matrix[(i, j)] - want).abs() < 1e-8);
            }
        }
        let back = fmap_to_pointmap(&FunctionalMap::identity(n), &spec, &spec).unwrap();
        assert_eq!(back, id);

        let moved = shapes::rigid_motion(&mesh, [0.3, -1.0, 0.5], 0.9, [2.0, 1.0, -3.0]);
        let lap2 = build_laplacian(&moved).unwrap();
        let spec2 = generalized_eigs(&lap2.mass, &lap2.stiffness, EigCount::Smallest(12)).unwrap();
        let k = 12;
        let c = gt_functional_map(&spec.truncated(k), &spec2, &lap2.mass, &id, k).unwrap();
        assert_eq!((c.k_target(), c.k_source()), (k, k));
        for i in 0..k {
            for j in 0..k {
                let v = c.matrix[(i, j)];
                if i == j {
                    assert!((v.abs() - 1.0).abs() < 1e-6);
                } else {
                    assert!(v.abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn constant_basis_collapses_map() {
        let (_, _, spec) = unit(jittered(1, 2));
        // target basis holds only an exactly constant function
        let n = spec.n_vertices();
        let constant = Spectrum::new(vec![0.0], Mat::from_fn(n, 1, |_, _| 1.0));
        let map = fmap_to_pointmap(&FunctionalMap::identity(1), &spec, &constant).unwrap();
        assert!(map.targets().iter().all(|&t| t == map.targets()[0]));
        assert_eq!(map.source_size(), spec.n_vertices());
    }

    #[test]
    fn eigenbasis_delta_map_full_basis_is_identity() {
        let (_, _, spec) = unit(jittered(1, 3));
        assert_eq!(
            eigenbasis_delta_map(&spec, spec.count()).unwrap(),
            PointMap::identity(spec.n_vertices())
        );
        assert!(eigenbasis_delta_map(&spec, 0).is_err());
    }

    #[test]
    fn euler_heat_converges_at_first_order() {
        let (_, lap, spec) = unit(jittered(2, 11));
        let (total, s) = (0.05, 21);
        let exact = spectral_heat_kernel(&spec, total, s);
        let mut errs = Vec::new();
        for steps in [10, 20, 40] {
            let sys = factorize(&lap.mass, &lap.stiffness, total / steps as f64).unwrap();
            // A⁻¹δ_s diffuses to K_t(s, ·)
            let mut f = Mat::zeros(lap.n(), 1);
            f[(s, 0)] = 1.0 / lap.mass[s];
            for _ in 0..steps {
                let rhs = Mat::from_fn(lap.n(), 1, |i, _| lap.mass[i] * f[(i, 0)]);
                f = sys.solve(rhs.as_ref()).unwrap();
            }
            let err: f64 = (0..lap.n())
                .map(|i| lap.mass[i] * (f[(i, 0)] - exact[i]).powi(2))
                .sum::<f64>()
                .sqrt();
            errs.push(err);
        }
        for w in errs.windows(2) {
            let ratio = w[0] / w[1];
            assert!((1.7..=2.3).contains(&ratio), "{errs:?}");
        }
    }

    #[test]
    fn exponential_sum_matches_direct_evaluation() {
        let terms = [(2.0, 0.0), (-1.0, 3.0), (0.5, 7.5)];
        let t = 0.3;
        let want = 2.0 - (-0.9f64).exp() + 0.5 * (-2.25f64).exp();
        assert!((exponential_sum(&terms, t) - want).abs() < 1e-15);
    }
}
