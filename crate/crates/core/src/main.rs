use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use diffwave::error::{Error, EXIT_USAGE};
use diffwave::eval::{
    curve, geodesic_errors, run_experiment, write_curves_csv, write_errors_csv, ExperimentConfig,
    RhoSetting,
};
use diffwave::matching::PointMap;
use diffwave::mesh::{load_mesh_path, sample, SampleSet, SamplingStrategy};
use diffwave::pipeline::{
    compare_wavelets, dictionary, pair_match, read_landmarks, self_match, PreparedMesh,
};
use diffwave::spectral::{GtTimeMode, DEFAULT_TRUNCATION};
use diffwave::wavelet::{write_dictionary, DictionaryKind, DictionaryParams};

/// Diffusion wavelet dictionaries, shape matching and evaluation on
/// triangle meshes.
#[derive(Parser)]
#[command(name = "diffwave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dictionary construction.
    #[command(subcommand)]
    Dict(DictCommand),
    /// Point-to-point matching.
    #[command(subcommand)]
    Match(MatchCommand),
    /// Geodesic error of a map against a ground truth.
    Eval(EvalArgs),
    /// Comparisons against spectral references.
    #[command(subcommand)]
    Compare(CompareCommand),
    /// Config-driven experiments.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Subcommand)]
enum DictCommand {
    /// Build a dictionary and write it with its `.meta` sidecar.
    Build(DictBuildArgs),
}

#[derive(Subcommand)]
enum MatchCommand {
    /// Reconstruct every vertex of one mesh from its own dictionary.
    #[command(name = "self")]
    SelfMatch(MatchSelfArgs),
    /// Transfer vertices between two meshes through matched landmarks.
    Pair(MatchPairArgs),
}

#[derive(Subcommand)]
enum CompareCommand {
    /// Per-scale errors of Euler, truncated-spectral and heat dictionaries.
    Wavelets(CompareArgs),
}

#[derive(Subcommand)]
enum ExperimentCommand {
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Wavelet,
    Heat,
}

impl From<Kind> for DictionaryKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Wavelet => DictionaryKind::Wavelet,
            Kind::Heat => DictionaryKind::Heat,
        }
    }
}

#[derive(Args)]
struct Scales {
    /// Number of diffusion scales.
    #[arg(long, default_value_t = 25)]
    scales: usize,
    /// Largest diffusion time.
    #[arg(long, default_value_t = 1.0)]
    tmax: f64,
}

#[derive(Args)]
struct Sampling {
    /// A sample count, or a file with one vertex index per line.
    #[arg(long)]
    samples: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// fps-euclidean, fps-geodesic or random.
    #[arg(long, default_value = "fps-euclidean")]
    sampling: SamplingStrategy,
}

#[derive(Args)]
struct DictBuildArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[command(flatten)]
    sampling: Sampling,
    #[command(flatten)]
    scales: Scales,
    /// A value in (0, 1], or `auto` (1 for a single shape).
    #[arg(long, default_value = "auto")]
    rho: RhoSetting,
    #[arg(long, value_enum, default_value = "wavelet")]
    kind: Kind,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MatchSelfArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[command(flatten)]
    sampling: Sampling,
    #[command(flatten)]
    scales: Scales,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MatchPairArgs {
    #[arg(long)]
    src: PathBuf,
    #[arg(long)]
    dst: PathBuf,
    #[arg(long)]
    landmarks_src: PathBuf,
    #[arg(long)]
    landmarks_dst: PathBuf,
    #[command(flatten)]
    scales: Scales,
    /// Ratio for the smaller shape: a value in (0, 1], or `auto` to derive
    /// it from the original areas.
    #[arg(long, default_value = "auto")]
    rho: RhoSetting,
    #[arg(long, value_enum, default_value = "wavelet")]
    kind: Kind,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    /// Target mesh of both maps.
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100)]
    thresholds: usize,
    #[arg(long, default_value_t = 0.5)]
    max_threshold: f64,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[command(flatten)]
    sampling: Sampling,
    #[command(flatten)]
    scales: Scales,
    /// Eigenpairs kept by the truncated baseline.
    #[arg(long, default_value_t = DEFAULT_TRUNCATION)]
    truncation: usize,
    /// Reference times: `linear` (n·t) or `log` (log(n·t)).
    #[arg(long, default_value = "linear")]
    time_mode: GtTimeMode,
    #[arg(long, default_value_t = diffwave::eigen::DEFAULT_DENSE_CAP)]
    dense_cap: usize,
    #[arg(long)]
    out: PathBuf,
}

fn samples_for(prep: &PreparedMesh, s: &Sampling) -> Result<SampleSet, Error> {
    match s.samples.parse::<usize>() {
        Ok(n) => Ok(sample(&prep.mesh, n, s.sampling, s.seed, None)?),
        Err(_) => read_landmarks(Path::new(&s.samples), prep.n_vertices()),
    }
}

fn params(scales: &Scales, rho: f64) -> DictionaryParams {
    DictionaryParams::new(scales.scales, scales.tmax, rho)
}

fn write_map(map: &PointMap, path: &Path) -> Result<(), Error> {
    map.write_path(path).map_err(Error::file(path))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Dict(DictCommand::Build(a)) => {
            let prep = PreparedMesh::load(&a.mesh)?;
            let samples = samples_for(&prep, &a.sampling)?;
            let rho = match a.rho {
                RhoSetting::Auto => 1.0,
                RhoSetting::Fixed(r) => r,
            };
            let dict = dictionary(&prep, &samples, &params(&a.scales, rho), a.kind.into())?;
            write_dictionary(&a.out, &dict).map_err(Error::file(&a.out))?;
            println!(
                "wrote {} x {} {} dictionary (t_step={:e}) to {}",
                dict.n_vertices(),
                dict.n_columns(),
                dict.kind.as_str(),
                dict.t_step,
                a.out.display()
            );
        }
        Command::Match(MatchCommand::SelfMatch(a)) => {
            let prep = PreparedMesh::load(&a.mesh)?;
            let samples = samples_for(&prep, &a.sampling)?;
            let map = self_match(&prep, &samples, &params(&a.scales, 1.0))?;
            write_map(&map, &a.out)?;
        }
        Command::Match(MatchCommand::Pair(a)) => {
            let src = PreparedMesh::load(&a.src)?;
            let dst = PreparedMesh::load(&a.dst)?;
            let ls = read_landmarks(&a.landmarks_src, src.n_vertices())?;
            let ld = read_landmarks(&a.landmarks_dst, dst.n_vertices())?;
            let map = pair_match(
                &src,
                &dst,
                &ls,
                &ld,
                a.scales.scales,
                a.scales.tmax,
                a.rho,
                a.kind.into(),
            )?;
            write_map(&map, &a.out)?;
        }
        Command::Eval(a) => {
            let mesh = load_mesh_path(&a.mesh)?;
            let map = PointMap::read_path(&a.map, Some(mesh.n_vertices()))?;
            let gt = PointMap::read_path(&a.gt, Some(mesh.n_vertices()))?;
            let c = curve(
                &geodesic_errors(&map, &gt, &mesh)?,
                a.thresholds,
                a.max_threshold,
            )?;
            println!("mean_error={}", c.mean_error);
            println!("auc_025={}", c.auc_025);
            let f = std::fs::File::create(&a.out).map_err(Error::file(&a.out))?;
            write_curves_csv(f, &[("map".into(), c)]).map_err(Error::file(&a.out))?;
        }
        Command::Compare(CompareCommand::Wavelets(a)) => {
            let prep = PreparedMesh::load(&a.mesh)?;
            let samples = samples_for(&prep, &a.sampling)?;
            let cmp = compare_wavelets(
                &prep,
                &samples,
                &params(&a.scales, 1.0),
                a.truncation,
                a.time_mode,
                a.dense_cap,
            )?;
            for (m, e) in &cmp.rows {
                println!("{m}: l2_mean={} linf_mean={}", e.l2_mean, e.linf_mean);
            }
            for (stage, secs) in &cmp.seconds {
                println!("seconds.{stage}={secs}");
            }
            let f = std::fs::File::create(&a.out).map_err(Error::file(&a.out))?;
            write_errors_csv(f, &cmp.rows).map_err(Error::file(&a.out))?;
        }
        Command::Experiment(ExperimentCommand::Run { config }) => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let report = run_experiment(&cfg)?;
            for (k, v) in &report.summary {
                println!("{k}={v}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                // a bare invocation still prints help, but it is a usage error
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE as u8),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
