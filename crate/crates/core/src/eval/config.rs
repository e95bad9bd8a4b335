//! Strict `key = value` experiment descriptions.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown and
//! repeated keys are errors. Relative paths resolve against the directory
//! of the config file.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::mesh::SamplingStrategy;
use crate::spectral::{GtTimeMode, DEFAULT_TRUNCATION};

use super::{DEFAULT_MAX_THRESHOLD, DEFAULT_THRESHOLDS};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("key `{key}`: {message}")]
    Invalid { key: &'static str, message: String },
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    /// δ-reconstruction on one mesh vs the eigenbasis baseline.
    SelfMatch,
    /// Landmark transfer between two meshes.
    PairMatch,
    /// Per-scale errors of Euler, truncated-spectral and heat dictionaries
    /// against full-spectrum wavelets.
    WaveletCompare,
    /// Dictionary build time vs eigenpairs plus spectral evaluation.
    Timing,
    /// Sampling strategies × sample counts.
    Sampling,
    /// Landmark displacement radii.
    Noise,
    /// Largest diffusion time values.
    TmaxSweep,
    /// Numbers of scales.
    ScaleSweep,
    /// Wavelet vs heat dictionaries for pair transfer.
    HeatCompare,
}

impl ExperimentKind {
    const ALL: [(Self, &'static str); 9] = [
        (Self::SelfMatch, "self-match"),
        (Self::PairMatch, "pair-match"),
        (Self::WaveletCompare, "wavelet-compare"),
        (Self::Timing, "timing"),
        (Self::Sampling, "sampling"),
        (Self::Noise, "noise"),
        (Self::TmaxSweep, "tmax-sweep"),
        (Self::ScaleSweep, "scale-sweep"),
        (Self::HeatCompare, "heat-compare"),
    ];

    pub fn as_str(self) -> &'static str {
        Self::ALL
            .iter()
            .find(|(k, _)| *k == self)
            .map(|(_, s)| *s)
            .unwrap_or("?")
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .iter()
            .find(|(_, name)| *name == s)
            .map(|(k, _)| *k)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|(_, n)| *n).collect();
                format!(
                    "unknown experiment `{s}` (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

/// Diffusion-time ratio for the smaller shape of a pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RhoSetting {
    /// `√(Ω_small / Ω_large)` from the original areas.
    Auto,
    Fixed(f64),
}

impl FromStr for RhoSetting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(Self::Auto);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| format!("expected `auto` or a number, got `{s}`"))?;
        if v > 0.0 && v <= 1.0 {
            Ok(Self::Fixed(v))
        } else {
            Err(format!("rho must lie in (0, 1], got {v}"))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub mesh: PathBuf,
    pub target: Option<PathBuf>,
    pub gt_map: Option<PathBuf>,
    pub landmarks_source: Option<PathBuf>,
    pub landmarks_target: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub n_samples: usize,
    pub sample_counts: Vec<usize>,
    pub sampling: SamplingStrategy,
    pub strategies: Vec<SamplingStrategy>,
    pub n_scales: usize,
    pub scale_counts: Vec<usize>,
    pub t_max: f64,
    pub t_max_values: Vec<f64>,
    pub rho: RhoSetting,
    pub noise_radii: Vec<f64>,
    pub noise_count: usize,
    pub truncation: usize,
    pub time_mode: GtTimeMode,
    pub eigenpairs: usize,
    pub dense_cap: usize,
    pub n_thresholds: usize,
    pub max_threshold: f64,
}

const KEYS: [&str; 25] = [
    "experiment",
    "mesh",
    "target",
    "gt_map",
    "landmarks_source",
    "landmarks_target",
    "output_dir",
    "seed",
    "n_samples",
    "sample_counts",
    "sampling",
    "strategies",
    "n_scales",
    "scale_counts",
    "t_max",
    "t_max_values",
    "rho",
    "noise_radii",
    "noise_count",
    "truncation",
    "time_mode",
    "eigenpairs",
    "dense_cap",
    "n_thresholds",
    "max_threshold",
];

struct Entries {
    values: HashMap<&'static str, String>,
    base: PathBuf,
}

impl Entries {
    fn get<T: FromStr>(&self, key: &'static str, default: T) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|e: T::Err| ConfigError::Invalid {
                key,
                message: e.to_string(),
            }),
        }
    }

    fn list<T: FromStr>(&self, key: &'static str, default: Vec<T>) -> Result<Vec<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(default),
            Some(v) => v
                .split(',')
                .map(|item| {
                    item.trim()
                        .parse()
                        .map_err(|e: T::Err| ConfigError::Invalid {
                            key,
                            message: format!("`{}`: {e}", item.trim()),
                        })
                })
                .collect(),
        }
    }

    fn path(&self, key: &'static str) -> Option<PathBuf> {
        self.values.get(key).map(|v| self.base.join(v))
    }
}

impl ExperimentConfig {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base)
    }

    /// Parses config text; relative paths are joined onto `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut values = HashMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: no + 1,
                text: line.to_string(),
            })?;
            let (k, v) = (k.trim(), v.trim());
            let key =
                KEYS.iter()
                    .find(|&&known| known == k)
                    .ok_or_else(|| ConfigError::UnknownKey {
                        line: no + 1,
                        key: k.to_string(),
                    })?;
            if values.insert(*key, v.to_string()).is_some() {
                return Err(ConfigError::Duplicate {
                    line: no + 1,
                    key: k.to_string(),
                });
            }
        }
        let e = Entries {
            values,
            base: base.to_path_buf(),
        };
        let kind: ExperimentKind = match e.values.get("experiment") {
            None => return Err(ConfigError::Missing("experiment")),
            Some(_) => e.get("experiment", ExperimentKind::SelfMatch)?,
        };
        let config = Self {
            kind,
            mesh: e.path("mesh").ok_or(ConfigError::Missing("mesh"))?,
            target: e.path("target"),
            gt_map: e.path("gt_map"),
            landmarks_source: e.path("landmarks_source"),
            landmarks_target: e.path("landmarks_target"),
            output_dir: e
                .path("output_dir")
                .ok_or(ConfigError::Missing("output_dir"))?,
            seed: e.get("seed", 0)?,
            n_samples: e.get("n_samples", 6)?,
            sample_counts: e.list("sample_counts", vec![2, 4, 6, 8])?,
            sampling: e.get("sampling", SamplingStrategy::FpsEuclidean)?,
            strategies: e.list(
                "strategies",
                vec![
                    SamplingStrategy::FpsEuclidean,
                    SamplingStrategy::FpsGeodesic,
                    SamplingStrategy::Random,
                ],
            )?,
            n_scales: e.get("n_scales", 25)?,
            scale_counts: e.list("scale_counts", vec![1, 2, 3, 5, 25, 50])?,
            t_max: e.get("t_max", 1.0)?,
            t_max_values: e.list("t_max_values", vec![0.25, 0.5, 1.0, 2.0, 4.0])?,
            rho: e.get("rho", RhoSetting::Auto)?,
            noise_radii: e.list("noise_radii", vec![0.01, 0.02, 0.05, 0.1])?,
            noise_count: e.get("noise_count", 1)?,
            truncation: e.get("truncation", DEFAULT_TRUNCATION)?,
            time_mode: e.get("time_mode", GtTimeMode::Linear)?,
            eigenpairs: e.get("eigenpairs", DEFAULT_TRUNCATION)?,
            dense_cap: e.get("dense_cap", crate::eigen::DEFAULT_DENSE_CAP)?,
            n_thresholds: e.get("n_thresholds", DEFAULT_THRESHOLDS)?,
            max_threshold: e.get("max_threshold", DEFAULT_MAX_THRESHOLD)?,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |key, message: &str| {
            Err(ConfigError::Invalid {
                key,
                message: message.to_string(),
            })
        };
        if self.n_samples == 0 {
            return invalid("n_samples", "must be at least 1");
        }
        if self.n_scales == 0 {
            return invalid("n_scales", "must be at least 1");
        }
        if !(self.t_max > 0.0) {
            return invalid("t_max", "must be positive");
        }
        if self.sample_counts.contains(&0) || self.sample_counts.is_empty() {
            return invalid("sample_counts", "entries must be at least 1");
        }
        if self.scale_counts.contains(&0) || self.scale_counts.is_empty() {
            return invalid("scale_counts", "entries must be at least 1");
        }
        if self.t_max_values.iter().any(|&t| !(t > 0.0)) || self.t_max_values.is_empty() {
            return invalid("t_max_values", "entries must be positive");
        }
        if self.noise_radii.iter().any(|&r| !(r >= 0.0)) || self.noise_radii.is_empty() {
            return invalid("noise_radii", "entries must be non-negative");
        }
        if self.strategies.contains(&SamplingStrategy::Explicit) {
            return invalid("strategies", "explicit samples cannot be drawn");
        }
        if self.sampling == SamplingStrategy::Explicit {
            return invalid("sampling", "use landmarks_source for explicit samples");
        }
        if self.n_thresholds < 2 || !(self.max_threshold > 0.0) {
            return invalid(
                "n_thresholds",
                "need at least 2 thresholds and max_threshold > 0",
            );
        }
        if self.landmarks_source.is_some() != self.landmarks_target.is_some() {
            return invalid(
                "landmarks_source",
                "landmarks_source and landmarks_target go together",
            );
        }
        if self.target.is_some() && self.gt_map.is_none() {
            return invalid("gt_map", "a ground-truth map is required with `target`");
        }
        Ok(())
    }
}
