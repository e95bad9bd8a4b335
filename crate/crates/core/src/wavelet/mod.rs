//! Multi-scale Mexican-hat dictionaries built by backward-Euler diffusion.
//!
//! The mother wavelet at a sample `s` is `A⁻¹ W δ_s`. Each further scale is
//! one implicit Euler step `(A + tW)⁻¹ A f` of the previous one, with a single
//! factorization of `A + tW` shared by all samples and scales. Columns are
//! stored scale-major: columns `k·|S| .. (k+1)·|S|` hold scale `k + 1`.

mod io;

pub use io::{read_dictionary, write_dictionary, DICT_MAGIC};

use faer::{Mat, MatRef};
use thiserror::Error;

use crate::mesh::{LaplacianPair, SampleSet};
use crate::sparse::{factorize_with, SolveError, SolverKind, SpdSystem};

#[derive(Debug, Error)]
pub enum WaveletError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("column for sample {sample} at scale {scale} is degenerate (range {range:e})")]
    DegenerateColumn {
        sample: usize,
        scale: usize,
        range: f64,
    },
    #[error("sample vertex {index} out of range for a mesh with {n_vertices} vertices")]
    SampleOutOfRange { index: usize, n_vertices: usize },
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DictionaryKind {
    /// Diffused mother wavelets, L1- then range-normalized.
    Wavelet,
    /// Diffused unit indicators (heat kernel), L1-normalized only.
    Heat,
}

impl DictionaryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Wavelet => "wavelet",
            Self::Heat => "heat",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DictionaryParams {
    pub n_scales: usize,
    pub t_max: f64,
    pub rho: f64,
    pub solver: SolverKind,
}

impl Default for DictionaryParams {
    fn default() -> Self {
        Self {
            n_scales: 25,
            t_max: 1.0,
            rho: 1.0,
            solver: SolverKind::Direct,
        }
    }
}

impl DictionaryParams {
    pub fn new(n_scales: usize, t_max: f64, rho: f64) -> Self {
        Self {
            n_scales,
            t_max,
            rho,
            solver: SolverKind::Direct,
        }
    }

    fn validate(&self) -> Result<(), WaveletError> {
        if self.n_scales == 0 {
            return Err(WaveletError::InvalidParameter(
                "n_scales must be at least 1".into(),
            ));
        }
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(WaveletError::InvalidParameter(format!(
                "t_max must be positive, got {}",
                self.t_max
            )));
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(WaveletError::InvalidParameter(format!(
                "rho must lie in (0, 1], got {}",
                self.rho
            )));
        }
        Ok(())
    }

    /// Per-step diffusion time `ρ · t_max / (n_scales · √Ω)`.
    pub fn time_step(&self, total_area: f64) -> f64 {
        self.rho * self.t_max / (self.n_scales as f64 * total_area.sqrt())
    }
}

/// A scale-major column dictionary plus the metadata it was built with.
#[derive(Clone, Debug)]
pub struct Dictionary {
    pub kind: DictionaryKind,
    pub columns: Mat<f64>,
    pub samples: SampleSet,
    pub n_scales: usize,
    pub t_max: f64,
    pub t_step: f64,
    pub rho: f64,
}

impl Dictionary {
    pub fn n_vertices(&self) -> usize {
        self.columns.nrows()
    }

    pub fn n_columns(&self) -> usize {
        self.columns.ncols()
    }

    pub fn n_samples(&self) -> usize {
        self.samples.len()
    }

    /// Column index for `scale` (1-based) and sample position `j`.
    pub fn column_index(&self, scale: usize, j: usize) -> usize {
        (scale - 1) * self.n_samples() + j
    }

    pub fn column(&self, scale: usize, j: usize) -> &[f64] {
        self.columns.col_as_slice(self.column_index(scale, j))
    }
}

/// Ratio adjusting diffusion times between a partial shape of area
/// `area_partial` and a full shape of area `area_full`: `√(area_partial /
/// area_full)`, clamped to 1.
pub fn compute_rho(area_partial: f64, area_full: f64) -> Result<f64, WaveletError> {
    if !(area_partial > 0.0) || !(area_full > 0.0) {
        return Err(WaveletError::InvalidParameter(format!(
            "areas must be positive, got {area_partial} and {area_full}"
        )));
    }
    let rho = (area_partial / area_full).sqrt();
    if rho > 1.0 {
        log::warn!("area ratio gives rho = {rho:.4} > 1; clamping to 1");
        return Ok(1.0);
    }
    Ok(rho)
}

fn check_samples(lap: &LaplacianPair, samples: &SampleSet) -> Result<(), WaveletError> {
    let n = lap.n();
    match samples.indices().iter().find(|&&s| s >= n) {
        Some(&index) => Err(WaveletError::SampleOutOfRange {
            index,
            n_vertices: n,
        }),
        None => Ok(()),
    }
}

/// `δ_S`: column `j` is the unit indicator of sample `j`.
pub fn indicator_block(n: usize, samples: &SampleSet) -> Mat<f64> {
    let mut m = Mat::zeros(n, samples.len());
    for (j, &s) in samples.indices().iter().enumerate() {
        m[(s, j)] = 1.0;
    }
    m
}

/// `A⁻¹ W δ_S`, one column per sample.
pub fn mother_wavelets(lap: &LaplacianPair, samples: &SampleSet) -> Result<Mat<f64>, WaveletError> {
    check_samples(lap, samples)?;
    let n = lap.n();
    let mut out = Mat::zeros(n, samples.len());
    for (j, &s) in samples.indices().iter().enumerate() {
        // W is symmetric, so row s gives column s
        let (cols, vals) = lap.stiffness.row(s);
        for (&i, &w) in cols.iter().zip(vals) {
            out[(i, j)] = w / lap.mass[i];
        }
    }
    Ok(out)
}

/// One backward-Euler step `(A + tW)⁻¹ A F`, reusing `system` when it was
/// factorized for the same Laplacian and `t`.
pub fn diffusion_step(
    lap: &LaplacianPair,
    t: f64,
    f: MatRef<'_, f64>,
    system: Option<&SpdSystem>,
) -> Result<Mat<f64>, WaveletError> {
    let owned;
    let sys = match system {
        Some(s) => s,
        None => {
            owned = factorize_with(&lap.mass, &lap.stiffness, t, SolverKind::Direct)?;
            &owned
        }
    };
    euler_step(&lap.mass, sys, f)
}

fn euler_step(mass: &[f64], sys: &SpdSystem, f: MatRef<'_, f64>) -> Result<Mat<f64>, WaveletError> {
    let rhs = Mat::from_fn(f.nrows(), f.ncols(), |i, j| mass[i] * f[(i, j)]);
    Ok(sys.solve(rhs.as_ref())?)
}

/// Runs `n_scales` Euler steps from `initial` and returns the unnormalized
/// scale-major block (scales 1..=n_scales; the initial block is not
/// included). `integrals` are the exact values of `1ᵀA·c` for the initial
/// columns, which every step conserves.
pub fn propagate(
    lap: &LaplacianPair,
    system: &SpdSystem,
    initial: Mat<f64>,
    integrals: &[f64],
    n_scales: usize,
) -> Result<Mat<f64>, WaveletError> {
    let (n, s) = (initial.nrows(), initial.ncols());
    assert_eq!(integrals.len(), s, "one integral per initial column");
    let mut out = Mat::zeros(n, s * n_scales);
    let mut current = initial;
    for k in 0..n_scales {
        current = euler_step(&lap.mass, system, current.as_ref())?;
        restore_integrals(lap, &mut current, integrals);
        out.subcols_mut(k * s, s).copy_from(&current);
    }
    Ok(out)
}

/// Each Euler step conserves `1ᵀA·c` exactly, but roundoff lands in the
/// constant mode, which never decays while everything else does. Left alone
/// it dominates late zero-mean wavelets, so the exact integral is put back
/// after every step (a no-op in exact arithmetic).
fn restore_integrals(lap: &LaplacianPair, block: &mut Mat<f64>, integrals: &[f64]) {
    for (j, &target) in integrals.iter().enumerate() {
        let col = block.col_as_slice_mut(j);
        let shift = (target - lap.integrate(col)) / lap.total_area;
        col.iter_mut().for_each(|v| *v += shift);
    }
}

/// The unnormalized wavelet block together with the step used.
pub fn raw_wavelets(
    lap: &LaplacianPair,
    samples: &SampleSet,
    params: &DictionaryParams,
) -> Result<(Mat<f64>, f64), WaveletError> {
    params.validate()?;
    let t = params.time_step(lap.total_area);
    let system = factorize_with(&lap.mass, &lap.stiffness, t, params.solver)?;
    // 1ᵀW = 0, so every mother wavelet has zero integral
    let zeros = vec![0.0; samples.len()];
    let raw = propagate(
        lap,
        &system,
        mother_wavelets(lap, samples)?,
        &zeros,
        params.n_scales,
    )?;
    Ok((raw, t))
}

/// The unnormalized heat block (diffused unit indicators) and the step used.
pub fn raw_heat(
    lap: &LaplacianPair,
    samples: &SampleSet,
    params: &DictionaryParams,
) -> Result<(Mat<f64>, f64), WaveletError> {
    params.validate()?;
    check_samples(lap, samples)?;
    let t = params.time_step(lap.total_area);
    let system = factorize_with(&lap.mass, &lap.stiffness, t, params.solver)?;
    let masses: Vec<f64> = samples.indices().iter().map(|&s| lap.mass[s]).collect();
    let raw = propagate(
        lap,
        &system,
        indicator_block(lap.n(), samples),
        &masses,
        params.n_scales,
    )?;
    Ok((raw, t))
}

/// `Σ_i A_ii |c_i|`
pub fn l1_norm(mass: &[f64], c: &[f64]) -> f64 {
    mass.iter().zip(c).map(|(a, v)| a * v.abs()).sum()
}

pub fn value_range(c: &[f64]) -> f64 {
    let (lo, hi) = c
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    hi - lo
}

/// Divides every column by its `A`-weighted L1 norm and then, if
/// `range_normalize`, by its range `max - min`.
pub fn normalize_columns(
    mass: &[f64],
    columns: &mut Mat<f64>,
    n_samples: usize,
    range_normalize: bool,
) -> Result<(), WaveletError> {
    for c in 0..columns.ncols() {
        let degenerate = |range| WaveletError::DegenerateColumn {
            sample: c % n_samples.max(1),
            scale: c / n_samples.max(1) + 1,
            range,
        };
        let col = columns.col_as_slice_mut(c);
        let l1 = l1_norm(mass, col);
        if !(l1 > 0.0) || !l1.is_finite() {
            return Err(degenerate(value_range(col)));
        }
        col.iter_mut().for_each(|v| *v /= l1);
        if range_normalize {
            let r = value_range(col);
            if !(r >= 1e-14) || !r.is_finite() {
                return Err(degenerate(r));
            }
            col.iter_mut().for_each(|v| *v /= r);
        }
    }
    Ok(())
}

/// Builds the wavelet dictionary for `samples`: mother wavelets diffused
/// over `n_scales` Euler steps, each column normalized by its `A`-weighted L1
/// norm and then by its range. Scale 0 (the mother wavelet) is not stored.
pub fn build_dictionary(
    lap: &LaplacianPair,
    samples: &SampleSet,
    params: &DictionaryParams,
) -> Result<Dictionary, WaveletError> {
    let (mut columns, t_step) = raw_wavelets(lap, samples, params)?;
    normalize_columns(&lap.mass, &mut columns, samples.len(), true)?;
    Ok(Dictionary {
        kind: DictionaryKind::Wavelet,
        columns,
        samples: samples.clone(),
        n_scales: params.n_scales,
        t_max: params.t_max,
        t_step,
        rho: params.rho,
    })
}

/// Heat-kernel counterpart of [`build_dictionary`]: diffused unit
/// indicators, L1-normalized only.
pub fn build_heat_dictionary(
    lap: &LaplacianPair,
    samples: &SampleSet,
    params: &DictionaryParams,
) -> Result<Dictionary, WaveletError> {
    let (mut columns, t_step) = raw_heat(lap, samples, params)?;
    normalize_columns(&lap.mass, &mut columns, samples.len(), false)?;
    Ok(Dictionary {
        kind: DictionaryKind::Heat,
        columns,
        samples: samples.clone(),
        n_scales: params.n_scales,
        t_max: params.t_max,
        t_step,
        rho: params.rho,
    })
}
