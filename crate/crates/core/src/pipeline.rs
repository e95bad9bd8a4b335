//! End-to-end matching pipelines shared by the CLI and experiment drivers.

use std::path::Path;
use std::time::Instant;

use crate::eigen::{generalized_eigs_capped, smallest_eigenpairs, EigCount};
use crate::error::Error;
use crate::eval::RhoSetting;
use crate::matching::{build_gamma, reconstruct_delta_map, transfer_pointmap, PointMap};
use crate::mesh::{
    build_laplacian, load_mesh_path, normalize_unit_area, LaplacianPair, SampleSet, TriangleMesh,
};
use crate::spectral::{
    dictionary_error, eigenbasis_delta_map, ground_truth_wavelets, mexican_hat_block,
    spectral_wavelets, DictionaryErrors, GtTimeMode,
};
use crate::wavelet::{
    build_dictionary, build_heat_dictionary, compute_rho, normalize_columns, Dictionary,
    DictionaryKind, DictionaryParams,
};

/// A mesh scaled to unit area together with its Laplacian.
#[derive(Clone, Debug)]
pub struct PreparedMesh {
    pub mesh: TriangleMesh,
    /// Area before normalization.
    pub original_area: f64,
    pub lap: LaplacianPair,
}

impl PreparedMesh {
    pub fn new(mesh: &TriangleMesh) -> Result<Self, Error> {
        let (mesh, original_area) = normalize_unit_area(mesh)?;
        let lap = build_laplacian(&mesh)?;
        Ok(Self {
            mesh,
            original_area,
            lap,
        })
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        Self::new(&load_mesh_path(path)?)
    }

    pub fn n_vertices(&self) -> usize {
        self.mesh.n_vertices()
    }
}

/// Reads a landmark file (one 0-based vertex index per line).
pub fn read_landmarks(path: &Path, n_vertices: usize) -> Result<SampleSet, Error> {
    let map = PointMap::read_path(path, Some(n_vertices))?;
    Ok(SampleSet::explicit(map.targets().to_vec(), n_vertices)?)
}

/// Builds a dictionary of the requested kind.
pub fn dictionary(
    prep: &PreparedMesh,
    samples: &SampleSet,
    params: &DictionaryParams,
    kind: DictionaryKind,
) -> Result<Dictionary, Error> {
    Ok(match kind {
        DictionaryKind::Wavelet => build_dictionary(&prep.lap, samples, params)?,
        DictionaryKind::Heat => build_heat_dictionary(&prep.lap, samples, params)?,
    })
}

/// δ-reconstruction of every vertex from a wavelet dictionary on `samples`.
pub fn self_match(
    prep: &PreparedMesh,
    samples: &SampleSet,
    params: &DictionaryParams,
) -> Result<PointMap, Error> {
    let dict = build_dictionary(&prep.lap, samples, params)?;
    let reg = build_gamma(samples.len(), params.n_scales)?;
    Ok(reconstruct_delta_map(&dict, &reg)?)
}

/// Eigenbasis self-matching with `n_samples + 1` eigenfunctions.
pub fn eigenbasis_self_match(
    prep: &PreparedMesh,
    n_samples: usize,
    dense_cap: usize,
) -> Result<PointMap, Error> {
    let k = n_samples + 1;
    let spec = smallest_eigenpairs(&prep.lap.mass, &prep.lap.stiffness, k, dense_cap)?;
    Ok(eigenbasis_delta_map(&spec, k)?)
}

/// Time ratios `(ρ_source, ρ_target)`: the shape with the smaller original
/// area gets `ρ < 1`, the other `ρ = 1`.
pub fn pair_rhos(
    area_source: f64,
    area_target: f64,
    setting: RhoSetting,
) -> Result<(f64, f64), Error> {
    let source_smaller = area_source < area_target;
    let rho = match setting {
        RhoSetting::Fixed(r) => r,
        RhoSetting::Auto if source_smaller => compute_rho(area_source, area_target)?,
        RhoSetting::Auto => compute_rho(area_target, area_source)?,
    };
    Ok(if source_smaller {
        (rho, 1.0)
    } else {
        (1.0, rho)
    })
}

/// Maps every source vertex to the target through dictionaries built on
/// matched landmarks.
#[allow(clippy::too_many_arguments)]
pub fn pair_match(
    source: &PreparedMesh,
    target: &PreparedMesh,
    landmarks_source: &SampleSet,
    landmarks_target: &SampleSet,
    n_scales: usize,
    t_max: f64,
    rho: RhoSetting,
    kind: DictionaryKind,
) -> Result<PointMap, Error> {
    if landmarks_source.len() != landmarks_target.len() {
        return Err(Error::Data(format!(
            "{} source landmarks but {} target landmarks",
            landmarks_source.len(),
            landmarks_target.len()
        )));
    }
    let (rho_s, rho_t) = pair_rhos(source.original_area, target.original_area, rho)?;
    let ds = dictionary(
        source,
        landmarks_source,
        &DictionaryParams::new(n_scales, t_max, rho_s),
        kind,
    )?;
    let dt = dictionary(
        target,
        landmarks_target,
        &DictionaryParams::new(n_scales, t_max, rho_t),
        kind,
    )?;
    Ok(transfer_pointmap(&ds, &dt)?)
}

/// Errors of the Euler-built, truncated-spectral and heat dictionaries
/// against full-spectrum wavelets, with wall-clock times.
#[derive(Clone, Debug)]
pub struct WaveletComparison {
    /// `(method, errors)`; methods are `wavelet`, `truncated-<K>` and `heat`.
    pub rows: Vec<(String, DictionaryErrors)>,
    pub t_step: f64,
    pub scales_compared: usize,
    /// `(stage, seconds)`.
    pub seconds: Vec<(String, f64)>,
}

/// Needs the full spectrum, so the mesh must fit under `dense_cap`.
pub fn compare_wavelets(
    prep: &PreparedMesh,
    samples: &SampleSet,
    params: &DictionaryParams,
    truncation: usize,
    mode: GtTimeMode,
    dense_cap: usize,
) -> Result<WaveletComparison, Error> {
    let lap = &prep.lap;
    let clock = Instant::now();
    let ours = build_dictionary(lap, samples, params)?;
    let t_ours = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let spec = generalized_eigs_capped(&lap.mass, &lap.stiffness, EigCount::All, dense_cap)?;
    let t_eigs = clock.elapsed().as_secs_f64();

    let (t, n) = (ours.t_step, params.n_scales);
    let gt = ground_truth_wavelets(&spec, &lap.mass, t, n, samples, mode)?;
    let clock = Instant::now();
    let truncated = spectral_wavelets(&spec, &lap.mass, t, n, samples, mode, truncation)?;
    let t_truncated = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let mut heat = build_heat_dictionary(lap, samples, params)?;
    let t_heat = clock.elapsed().as_secs_f64();
    // heat columns are L1-normalized already; add the range step so all
    // three candidates are normalized like the reference
    normalize_columns(&lap.mass, &mut heat.columns, samples.len(), true)?;

    let rows = vec![
        (
            "wavelet".to_string(),
            dictionary_error(&ours, &gt, &lap.mass)?,
        ),
        (
            format!("truncated-{}", truncated.truncation),
            dictionary_error(&truncated, &gt, &lap.mass)?,
        ),
        ("heat".to_string(), dictionary_error(&heat, &gt, &lap.mass)?),
    ];
    Ok(WaveletComparison {
        rows,
        t_step: t,
        scales_compared: gt.scales.len(),
        seconds: vec![
            ("wavelet".into(), t_ours),
            ("eigenpairs".into(), t_eigs),
            ("truncated_eval".into(), t_truncated),
            ("heat".into(), t_heat),
        ],
    })
}

/// Wall-clock times of a dictionary build and of the spectral route
/// (eigenpairs plus Mexican-hat evaluation at the same times).
#[derive(Clone, Debug)]
pub struct SpectralTiming {
    pub wavelet: f64,
    pub eigenpairs_seconds: f64,
    pub spectral_eval: f64,
    pub eigenpairs: usize,
    pub eigensolver: &'static str,
}

impl SpectralTiming {
    pub fn baseline(&self) -> f64 {
        self.eigenpairs_seconds + self.spectral_eval
    }

    /// Baseline time over dictionary time.
    pub fn speedup(&self) -> f64 {
        self.baseline() / self.wavelet.max(f64::MIN_POSITIVE)
    }
}

pub fn time_against_spectral(
    prep: &PreparedMesh,
    samples: &SampleSet,
    params: &DictionaryParams,
    eigenpairs: usize,
    dense_cap: usize,
) -> Result<SpectralTiming, Error> {
    let lap = &prep.lap;
    let clock = Instant::now();
    let ours = build_dictionary(lap, samples, params)?;
    let wavelet = clock.elapsed().as_secs_f64();

    let k = eigenpairs.min(prep.n_vertices());
    let clock = Instant::now();
    let spec = smallest_eigenpairs(&lap.mass, &lap.stiffness, k, dense_cap)?;
    let eigenpairs_seconds = clock.elapsed().as_secs_f64();

    let clock = Instant::now();
    let times: Vec<f64> = (1..=params.n_scales)
        .map(|n| n as f64 * ours.t_step)
        .collect();
    let mut block = mexican_hat_block(&spec, samples.indices(), &times, k);
    normalize_columns(&lap.mass, &mut block, samples.len(), true)?;
    let spectral_eval = clock.elapsed().as_secs_f64();

    Ok(SpectralTiming {
        wavelet,
        eigenpairs_seconds,
        spectral_eval,
        eigenpairs: k,
        eigensolver: if prep.n_vertices() <= dense_cap {
            "dense"
        } else {
            "krylov"
        },
    })
}
