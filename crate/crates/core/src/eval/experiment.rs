//! Experiment drivers behind `experiment run`.
//!
//! Matching experiments run in one of two settings. Without a `target` the
//! mesh is matched to itself by δ-reconstruction and the ground truth is the
//! identity. With a `target` and `gt_map`, landmarks are transferred between
//! the two meshes.

use std::fs;
use std::io::BufWriter;
use std::path::PathBuf;

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::report::{write_curves_csv, write_errors_csv, write_summary, write_sweep_csv, SweepRow};
use super::{curve, geodesic_errors, EvalCurve};
use crate::error::Error;
use crate::matching::PointMap;
use crate::mesh::{perturb_samples, sample, MeshGraph, SampleSet, SamplingStrategy};
use crate::pipeline::{
    compare_wavelets, eigenbasis_self_match, pair_match, read_landmarks, self_match,
    time_against_spectral, PreparedMesh,
};
use crate::spectral::DictionaryErrors;
use crate::wavelet::{DictionaryKind, DictionaryParams};

/// Files written by an experiment and its summary entries.
#[derive(Clone, Debug, Default)]
pub struct ExperimentReport {
    pub files: Vec<PathBuf>,
    pub summary: Vec<(String, String)>,
}

impl ExperimentReport {
    fn put(&mut self, key: impl Into<String>, value: impl ToString) {
        self.summary.push((key.into(), value.to_string()));
    }

    /// Looks up a summary value.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.summary
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

enum Setting {
    SelfMatch(PreparedMesh),
    Pair {
        source: PreparedMesh,
        target: PreparedMesh,
        gt: PointMap,
    },
}

impl Setting {
    fn load(cfg: &ExperimentConfig) -> Result<Self, Error> {
        let source = PreparedMesh::load(&cfg.mesh)?;
        match (&cfg.target, &cfg.gt_map) {
            (Some(t), Some(g)) => {
                let target = PreparedMesh::load(t)?;
                let gt = PointMap::read_path(g, Some(target.n_vertices()))?;
                if gt.source_size() != source.n_vertices() {
                    return Err(Error::Data(format!(
                        "ground-truth map covers {} vertices, source mesh has {}",
                        gt.source_size(),
                        source.n_vertices()
                    )));
                }
                Ok(Self::Pair { source, target, gt })
            }
            _ => Ok(Self::SelfMatch(source)),
        }
    }

    /// Pair setting; a self setting becomes the mesh paired with itself.
    fn into_pair(self) -> (PreparedMesh, PreparedMesh, PointMap) {
        match self {
            Self::SelfMatch(m) => {
                let gt = PointMap::identity(m.n_vertices());
                (m.clone(), m, gt)
            }
            Self::Pair { source, target, gt } => (source, target, gt),
        }
    }

    fn source(&self) -> &PreparedMesh {
        match self {
            Self::SelfMatch(m) => m,
            Self::Pair { source, .. } => source,
        }
    }
}

/// Landmarks on the source and their ground-truth images.
fn landmark_pair(
    cfg: &ExperimentConfig,
    source: &PreparedMesh,
    target: &PreparedMesh,
    gt: &PointMap,
    n: usize,
    strategy: SamplingStrategy,
) -> Result<(SampleSet, SampleSet), Error> {
    if let (Some(ls), Some(lt)) = (&cfg.landmarks_source, &cfg.landmarks_target) {
        return Ok((
            read_landmarks(ls, source.n_vertices())?,
            read_landmarks(lt, target.n_vertices())?,
        ));
    }
    let s = sample(&source.mesh, n, strategy, cfg.seed, None)?;
    let images: Vec<usize> = s.indices().iter().map(|&i| gt.targets()[i]).collect();
    let t = SampleSet::explicit(images, target.n_vertices())
        .map_err(|e| Error::Data(format!("ground-truth images of the landmarks: {e}")))?;
    Ok((s, t))
}

struct Runner<'a> {
    cfg: &'a ExperimentConfig,
    report: ExperimentReport,
}

impl Runner<'_> {
    fn curve(&self, errors: &[f64]) -> Result<EvalCurve, Error> {
        Ok(curve(
            errors,
            self.cfg.n_thresholds,
            self.cfg.max_threshold,
        )?)
    }

    fn evaluate(
        &self,
        map: &PointMap,
        gt: &PointMap,
        target: &PreparedMesh,
    ) -> Result<EvalCurve, Error> {
        self.curve(&geodesic_errors(map, gt, &target.mesh)?)
    }

    /// One matching run of the configured setting.
    fn match_once(
        &self,
        setting: &Setting,
        n_samples: usize,
        strategy: SamplingStrategy,
        n_scales: usize,
        t_max: f64,
        kind: DictionaryKind,
    ) -> Result<EvalCurve, Error> {
        match setting {
            Setting::SelfMatch(m) => {
                let samples = sample(&m.mesh, n_samples, strategy, self.cfg.seed, None)?;
                let map = self_match(m, &samples, &DictionaryParams::new(n_scales, t_max, 1.0))?;
                self.evaluate(&map, &PointMap::identity(m.n_vertices()), m)
            }
            Setting::Pair { source, target, gt } => {
                let (ls, lt) = landmark_pair(self.cfg, source, target, gt, n_samples, strategy)?;
                let map = pair_match(
                    source,
                    target,
                    &ls,
                    &lt,
                    n_scales,
                    t_max,
                    self.cfg.rho,
                    kind,
                )?;
                self.evaluate(&map, gt, target)
            }
        }
    }

    fn file(&mut self, name: &str) -> Result<(PathBuf, BufWriter<fs::File>), Error> {
        let path = self.cfg.output_dir.join(name);
        let f = fs::File::create(&path).map_err(Error::file(&path))?;
        self.report.files.push(path.clone());
        Ok((path, BufWriter::new(f)))
    }

    fn write_curves(&mut self, curves: &[(String, EvalCurve)]) -> Result<(), Error> {
        let (path, out) = self.file("curves.csv")?;
        write_curves_csv(out, curves).map_err(Error::file(path))
    }

    fn write_sweep(&mut self, rows: &[SweepRow]) -> Result<(), Error> {
        for r in rows {
            self.report.put(
                format!("mean_error.{}.{}.{}", r.method, r.parameter, r.value),
                r.mean_error,
            );
        }
        let (path, out) = self.file("sweep.csv")?;
        write_sweep_csv(out, rows).map_err(Error::file(path))
    }

    fn write_errors(&mut self, rows: &[(String, DictionaryErrors)]) -> Result<(), Error> {
        let (path, out) = self.file("errors.csv")?;
        write_errors_csv(out, rows).map_err(Error::file(path))
    }

    fn record_curve(&mut self, label: &str, c: &EvalCurve) {
        self.report.put(format!("mean_error.{label}"), c.mean_error);
        self.report.put(format!("auc_025.{label}"), c.auc_025);
    }

    fn sweep_row(method: &str, parameter: &str, value: impl ToString, c: &EvalCurve) -> SweepRow {
        SweepRow {
            method: method.to_string(),
            parameter: parameter.to_string(),
            value: value.to_string(),
            mean_error: c.mean_error,
            auc_025: c.auc_025,
        }
    }
}

/// Runs the experiment described by `cfg`, writing CSV files and
/// `summary.txt` into `cfg.output_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, Error> {
    fs::create_dir_all(&cfg.output_dir).map_err(Error::file(&cfg.output_dir))?;
    let mut r = Runner {
        cfg,
        report: ExperimentReport::default(),
    };
    r.report.put("experiment", cfg.kind);
    r.report.put("seed", cfg.seed);
    let setting = Setting::load(cfg)?;
    r.report.put("n_vertices", setting.source().n_vertices());
    match cfg.kind {
        ExperimentKind::SelfMatch => self_match_experiment(&mut r, setting)?,
        ExperimentKind::PairMatch => pair_match_experiment(&mut r, setting)?,
        ExperimentKind::WaveletCompare => wavelet_compare(&mut r, setting.source())?,
        ExperimentKind::Timing => timing(&mut r, setting.source())?,
        ExperimentKind::Sampling => {
            let mut jobs = Vec::new();
            for &s in &cfg.strategies {
                for &n in &cfg.sample_counts {
                    jobs.push((s, n));
                }
            }
            let rows = jobs
                .par_iter()
                .map(|&(s, n)| {
                    let c = r.match_once(
                        &setting,
                        n,
                        s,
                        cfg.n_scales,
                        cfg.t_max,
                        DictionaryKind::Wavelet,
                    )?;
                    Ok(Runner::sweep_row(&s.to_string(), "n_samples", n, &c))
                })
                .collect::<Result<Vec<_>, Error>>()?;
            r.write_sweep(&rows)?;
        }
        ExperimentKind::TmaxSweep => {
            let rows = cfg
                .t_max_values
                .par_iter()
                .map(|&t| {
                    let c = r.match_once(
                        &setting,
                        cfg.n_samples,
                        cfg.sampling,
                        cfg.n_scales,
                        t,
                        DictionaryKind::Wavelet,
                    )?;
                    Ok(Runner::sweep_row("wavelet", "t_max", t, &c))
                })
                .collect::<Result<Vec<_>, Error>>()?;
            r.write_sweep(&rows)?;
        }
        ExperimentKind::ScaleSweep => {
            let rows = cfg
                .scale_counts
                .par_iter()
                .map(|&n| {
                    let c = r.match_once(
                        &setting,
                        cfg.n_samples,
                        cfg.sampling,
                        n,
                        cfg.t_max,
                        DictionaryKind::Wavelet,
                    )?;
                    Ok(Runner::sweep_row("wavelet", "n_scales", n, &c))
                })
                .collect::<Result<Vec<_>, Error>>()?;
            r.write_sweep(&rows)?;
        }
        ExperimentKind::HeatCompare => heat_compare(&mut r, setting)?,
        ExperimentKind::Noise => noise(&mut r, setting)?,
    }
    let path = cfg.output_dir.join("summary.txt");
    let f = fs::File::create(&path).map_err(Error::file(&path))?;
    write_summary(BufWriter::new(f), &r.report.summary).map_err(Error::file(&path))?;
    r.report.files.push(path);
    Ok(r.report)
}

fn self_match_experiment(r: &mut Runner<'_>, setting: Setting) -> Result<(), Error> {
    let cfg = r.cfg;
    let mesh = setting.source();
    let samples = match &cfg.landmarks_source {
        Some(p) => read_landmarks(p, mesh.n_vertices())?,
        None => sample(&mesh.mesh, cfg.n_samples, cfg.sampling, cfg.seed, None)?,
    };
    let gt = PointMap::identity(mesh.n_vertices());
    let ours = self_match(
        mesh,
        &samples,
        &DictionaryParams::new(cfg.n_scales, cfg.t_max, 1.0),
    )?;
    let ours = r.evaluate(&ours, &gt, mesh)?;
    let base = eigenbasis_self_match(mesh, samples.len(), cfg.dense_cap)?;
    let base = r.evaluate(&base, &gt, mesh)?;
    r.report.put("n_samples", samples.len());
    r.report.put("n_scales", cfg.n_scales);
    r.report.put("t_max", cfg.t_max);
    r.report.put("sampling", samples.strategy());
    r.record_curve("wavelet", &ours);
    r.record_curve("eigenbasis", &base);
    r.write_curves(&[("wavelet".into(), ours), ("eigenbasis".into(), base)])
}

fn pair_match_experiment(r: &mut Runner<'_>, setting: Setting) -> Result<(), Error> {
    let cfg = r.cfg;
    let (source, target, gt) = setting.into_pair();
    let (ls, lt) = landmark_pair(cfg, &source, &target, &gt, cfg.n_samples, cfg.sampling)?;
    let map = pair_match(
        &source,
        &target,
        &ls,
        &lt,
        cfg.n_scales,
        cfg.t_max,
        cfg.rho,
        DictionaryKind::Wavelet,
    )?;
    let c = r.evaluate(&map, &gt, &target)?;
    r.report.put("n_landmarks", ls.len());
    r.report.put("area_source", source.original_area);
    r.report.put("area_target", target.original_area);
    r.record_curve("wavelet", &c);
    r.write_curves(&[("wavelet".into(), c)])
}

fn heat_compare(r: &mut Runner<'_>, setting: Setting) -> Result<(), Error> {
    let cfg = r.cfg;
    let setting = {
        let (source, target, gt) = setting.into_pair();
        Setting::Pair { source, target, gt }
    };
    let mut rows = Vec::new();
    let mut curves = Vec::new();
    for &n in &cfg.sample_counts {
        for kind in [DictionaryKind::Wavelet, DictionaryKind::Heat] {
            let c = r.match_once(&setting, n, cfg.sampling, cfg.n_scales, cfg.t_max, kind)?;
            rows.push(Runner::sweep_row(kind.as_str(), "n_samples", n, &c));
            curves.push((format!("{}-{n}", kind.as_str()), c));
        }
    }
    r.write_sweep(&rows)?;
    r.write_curves(&curves)
}

fn noise(r: &mut Runner<'_>, setting: Setting) -> Result<(), Error> {
    let cfg = r.cfg;
    let (source, target, gt) = setting.into_pair();
    let (ls, lt) = landmark_pair(cfg, &source, &target, &gt, cfg.n_samples, cfg.sampling)?;
    if cfg.noise_count > lt.len() {
        return Err(Error::Usage(format!(
            "noise_count {} exceeds the {} landmarks",
            cfg.noise_count,
            lt.len()
        )));
    }
    let graph = MeshGraph::new(&target.mesh);
    let rows = cfg
        .noise_radii
        .par_iter()
        .map(|&radius| {
            let moved = perturb_samples(&graph, &lt, radius, cfg.noise_count, cfg.seed)?;
            let map = pair_match(
                &source,
                &target,
                &ls,
                &moved,
                cfg.n_scales,
                cfg.t_max,
                cfg.rho,
                DictionaryKind::Wavelet,
            )?;
            let c = r.evaluate(&map, &gt, &target)?;
            Ok(Runner::sweep_row("wavelet", "noise_radius", radius, &c))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    r.report.put("noise_count", cfg.noise_count);
    r.report.put(
        "noise_reference",
        "max geodesic distance from each displaced landmark",
    );
    r.write_sweep(&rows)
}

fn wavelet_compare(r: &mut Runner<'_>, mesh: &PreparedMesh) -> Result<(), Error> {
    let cfg = r.cfg;
    let samples = sample(&mesh.mesh, cfg.n_samples, cfg.sampling, cfg.seed, None)?;
    let params = DictionaryParams::new(cfg.n_scales, cfg.t_max, 1.0);
    let cmp = compare_wavelets(
        mesh,
        &samples,
        &params,
        cfg.truncation,
        cfg.time_mode,
        cfg.dense_cap,
    )?;
    for (m, e) in &cmp.rows {
        r.report.put(format!("l2_mean.{m}"), e.l2_mean);
        r.report.put(format!("linf_mean.{m}"), e.linf_mean);
    }
    r.report.put("time_mode", cfg.time_mode);
    r.report.put("scales_compared", cmp.scales_compared);
    r.report.put("t_step", cmp.t_step);
    for (k, v) in &cmp.seconds {
        r.report.put(format!("seconds.{k}"), v);
    }
    r.write_errors(&cmp.rows)
}

fn timing(r: &mut Runner<'_>, mesh: &PreparedMesh) -> Result<(), Error> {
    let cfg = r.cfg;
    let samples = sample(&mesh.mesh, cfg.n_samples, cfg.sampling, cfg.seed, None)?;
    let params = DictionaryParams::new(cfg.n_scales, cfg.t_max, 1.0);
    let t = time_against_spectral(mesh, &samples, &params, cfg.eigenpairs, cfg.dense_cap)?;
    r.report.put("n_samples", samples.len());
    r.report.put("n_scales", cfg.n_scales);
    r.report.put("eigenpairs", t.eigenpairs);
    r.report.put("eigensolver", t.eigensolver);
    r.report.put("seconds.wavelet", t.wavelet);
    r.report.put("seconds.eigenpairs", t.eigenpairs_seconds);
    r.report.put("seconds.spectral_eval", t.spectral_eval);
    r.report.put("seconds.baseline", t.baseline());
    r.report.put("speedup", t.speedup());
    Ok(())
}
