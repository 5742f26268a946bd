//! Command-line front end: `fit`, `synth`, `heatmap` and `eval`.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 data error,
//! 4 numerical failure. Every failure prints a single `error: ...` line.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::{self, KeyValueFile, NormalizeMode, RingParams, SubspaceParams};
use crate::error::{Error, ErrorClass};
use crate::kernels::KernelSpec;
use crate::metrics::{self, Scores};
use crate::solver::{self, ConsensusMode, SolverConfig, TraceRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "mvksc", version, about = "Multi-view kernel subspace clustering")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Cluster a dataset described by a manifest.
    Fit(FitArgs),
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
    /// Render a square matrix CSV as a binary PGM image.
    Heatmap { input: PathBuf, output: PathBuf },
    /// Score predicted labels against ground truth.
    Eval { pred: PathBuf, truth: PathBuf },
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Solver configuration (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// `linear` or `poly:<c>:<d>`; a comma-separated list gives one per view.
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// `l1` or `fro`.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    no_enrich: bool,
    #[arg(long)]
    rho0: Option<f64>,
    #[arg(long)]
    rho_mult: Option<f64>,
    /// Upper bound on ρ, or `none`.
    #[arg(long)]
    rho_cap: Option<String>,
    /// `none`, `unit-column` or `zscore`.
    #[arg(long)]
    normalize: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SynthKind {
    Subspaces,
    Rings,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, value_enum)]
    kind: SynthKind,
    #[arg(long)]
    out: PathBuf,
    /// Overwrite a non-empty output directory.
    #[arg(long)]
    force: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    noise: Option<f64>,
    /// Subspaces: number of clusters.
    #[arg(long)]
    k: Option<usize>,
    /// Subspaces: samples per cluster.
    #[arg(long)]
    n_per_cluster: Option<usize>,
    /// Subspaces: comma-separated ambient dimension of each view.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Subspaces: intrinsic dimension.
    #[arg(long)]
    subspace_dim: Option<usize>,
    /// Rings: samples per ring.
    #[arg(long)]
    n_per_ring: Option<usize>,
    /// Rings: comma-separated radii.
    #[arg(long, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    /// Rings: number of views.
    #[arg(long)]
    views: Option<usize>,
}

/// Error tagged with the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.class() {
            ErrorClass::Config => EXIT_CONFIG,
            ErrorClass::Data => EXIT_DATA,
            ErrorClass::Numerical => EXIT_NUMERICAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn config_failure(e: Error) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: e.to_string(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Snapshot of one `fit` invocation, written as `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: SolverConfig,
    pub normalize: NormalizeMode,
    pub dataset: DatasetInfo,
    pub summary: RunSummary,
    pub trace: Vec<TraceRow>,
    pub duration_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub manifest: PathBuf,
    pub name: Option<String>,
    /// SHA-256 of the dataset as loaded, before normalization.
    pub fingerprint: String,
    pub n_samples: usize,
    pub n_views: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub iterations: usize,
    pub converged: bool,
    pub n_clusters: usize,
    pub final_objective: Option<f64>,
    pub metrics: Option<Scores>,
}

impl RunRecord {
    pub fn read(path: impl AsRef<Path>) -> crate::Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

/// Entry point for the binary: parses `std::env::args` and returns the exit
/// code.
pub fn main() -> i32 {
    run(std::env::args_os())
}

/// Runs the CLI on an explicit argument list (the first item is the program
/// name).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let outcome = match cli.command {
        Command::Fit(args) => cmd_fit(&args),
        Command::Synth(args) => cmd_synth(&args),
        Command::Heatmap { input, output } => cmd_heatmap(&input, &output).map_err(Failure::from),
        Command::Eval { pred, truth } => cmd_eval(&pred, &truth).map_err(Failure::from),
    };
    match outcome {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message.replace('\n', " "));
            f.code
        }
    }
}

fn parse_kernels(s: &str) -> crate::Result<Vec<KernelSpec>> {
    s.split(',').map(str::parse).collect()
}

fn parse_rho_cap(s: &str) -> crate::Result<Option<f64>> {
    if s.trim().eq_ignore_ascii_case("none") {
        return Ok(None);
    }
    s.trim()
        .parse()
        .map(Some)
        .map_err(|_| Error::InvalidParameter(format!("bad rho_cap {s:?}")))
}

const CONFIG_KEYS: &[&str] = &[
    "lambda",
    "gamma",
    "theta",
    "k",
    "kernel",
    "rho0",
    "rho_mult",
    "rho_cap",
    "max_iters",
    "tol",
    "mode",
    "enriched",
    "seed",
    "normalize",
];

/// Solver configuration plus preprocessing, before `k` is resolved.
#[derive(Debug, Clone)]
struct FitSettings {
    config: SolverConfig,
    k: Option<usize>,
    normalize: NormalizeMode,
}

fn read_config_file(path: &Path) -> crate::Result<FitSettings> {
    let kv = KeyValueFile::read(path)?;
    if let Some(key) = kv.keys().find(|k| !CONFIG_KEYS.contains(k)) {
        return Err(Error::Parse {
            path: kv.path.clone(),
            line: kv.line_of(key),
            column: 1,
            message: format!("unknown config key {key:?}"),
        });
    }
    let at_line = |key: &str, e: Error| Error::Parse {
        path: kv.path.clone(),
        line: kv.line_of(key),
        column: 1,
        message: e.to_string(),
    };

    let mut cfg = SolverConfig::new(1);
    if let Some(v) = kv.parse_value("lambda")? {
        cfg.lambda = v;
    }
    if let Some(v) = kv.parse_value("gamma")? {
        cfg.gamma = v;
    }
    if let Some(v) = kv.parse_value("theta")? {
        cfg.theta = v;
    }
    if let Some(s) = kv.get("kernel") {
        cfg.kernels = parse_kernels(s).map_err(|e| at_line("kernel", e))?;
    }
    if let Some(v) = kv.parse_value("rho0")? {
        cfg.rho0 = v;
    }
    if let Some(v) = kv.parse_value("rho_mult")? {
        cfg.rho_mult = v;
    }
    if let Some(s) = kv.get("rho_cap") {
        cfg.rho_cap = parse_rho_cap(s).map_err(|e| at_line("rho_cap", e))?;
    }
    if let Some(v) = kv.parse_value("max_iters")? {
        cfg.max_iters = v;
    }
    if let Some(v) = kv.parse_value("tol")? {
        cfg.tol = v;
    }
    if let Some(s) = kv.get("mode") {
        cfg.consensus_mode = s.parse().map_err(|e| at_line("mode", e))?;
    }
    if let Some(v) = kv.parse_value("enriched")? {
        cfg.enriched = v;
    }
    if let Some(v) = kv.parse_value("seed")? {
        cfg.seed = v;
    }
    let normalize = match kv.get("normalize") {
        Some(s) => s.parse().map_err(|e| at_line("normalize", e))?,
        None => NormalizeMode::default(),
    };
    Ok(FitSettings {
        config: cfg,
        k: kv.parse_value("k")?,
        normalize,
    })
}

fn fit_settings(args: &FitArgs) -> crate::Result<FitSettings> {
    let mut s = match &args.config {
        Some(path) => read_config_file(path)?,
        None => FitSettings {
            config: SolverConfig::new(1),
            k: None,
            normalize: NormalizeMode::default(),
        },
    };
    let cfg = &mut s.config;
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(k) = &args.kernel {
        cfg.kernels = parse_kernels(k)?;
    }
    if let Some(v) = args.lambda {
        cfg.lambda = v;
    }
    if let Some(v) = args.gamma {
        cfg.gamma = v;
    }
    if let Some(v) = args.theta {
        cfg.theta = v;
    }
    if let Some(v) = args.iters {
        cfg.max_iters = v;
    }
    if let Some(v) = args.tol {
        cfg.tol = v;
    }
    if let Some(m) = &args.mode {
        cfg.consensus_mode = m.parse::<ConsensusMode>()?;
    }
    if args.no_enrich {
        cfg.enriched = false;
    }
    if let Some(v) = args.rho0 {
        cfg.rho0 = v;
    }
    if let Some(v) = args.rho_mult {
        cfg.rho_mult = v;
    }
    if let Some(c) = &args.rho_cap {
        cfg.rho_cap = parse_rho_cap(c)?;
    }
    if let Some(n) = &args.normalize {
        s.normalize = n.parse()?;
    }
    if args.k.is_some() {
        s.k = args.k;
    }
    Ok(s)
}

fn write_text(path: &Path, text: &str) -> crate::Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_trace(path: &Path, trace: &[TraceRow]) -> crate::Result<()> {
    let mut out = String::from("iter,objective,residual_ca,residual_sum1\n");
    for row in trace {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.iter,
            data::format_f64(row.objective),
            data::format_f64(row.residual_ca),
            data::format_f64(row.residual_sum1)
        ));
    }
    write_text(path, &out)
}

fn cmd_fit(args: &FitArgs) -> CliResult<()> {
    let started = Instant::now();
    let settings = fit_settings(args).map_err(config_failure)?;
    let dataset = data::load_dataset(&args.manifest)?;
    let fingerprint = dataset.fingerprint();

    let mut config = settings.config;
    config.k = match settings.k.or_else(|| dataset.n_classes()) {
        Some(k) => k,
        None => {
            return Err(config_failure(Error::InvalidParameter(
                "k is not set and the dataset has no labels to infer it from".into(),
            )))
        }
    };
    config.validate().map_err(config_failure)?;
    if config.kernels.len() > 1 && config.kernels.len() != dataset.n_views() {
        return Err(config_failure(Error::InvalidParameter(format!(
            "{} kernels given for {} views",
            config.kernels.len(),
            dataset.n_views()
        ))));
    }

    let info = DatasetInfo {
        manifest: args.manifest.clone(),
        name: dataset.name.clone(),
        fingerprint,
        n_samples: dataset.n_samples(),
        n_views: dataset.n_views(),
    };
    let dataset = dataset.normalize(settings.normalize);
    let result = solver::fit(&dataset, &config)?;

    let out = &args.out;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    data::write_labels(out.join("labels.csv"), &result.labels)?;
    data::write_matrix_csv(out.join("consensus.csv"), &result.consensus)?;
    data::write_matrix_csv(out.join("embedding.csv"), &result.embedding.f)?;
    write_trace(&out.join("trace.csv"), &result.trace)?;
    if let Some(m) = result.metrics {
        write_text(
            &out.join("metrics.txt"),
            &format!("acc={:.4}\nnmi={:.4}\n", m.acc, m.nmi),
        )?;
    }

    let record = RunRecord {
        summary: RunSummary {
            iterations: result.iterations,
            converged: result.converged,
            n_clusters: config.k,
            final_objective: result.trace.last().map(|r| r.objective),
            metrics: result.metrics,
        },
        config,
        normalize: settings.normalize,
        dataset: info,
        trace: result.trace,
        duration_secs: started.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&record)
        .map_err(|e| Error::Numerical(format!("cannot serialize run record: {e}")))?;
    write_text(&out.join("run.json"), &(json + "\n"))?;

    match result.metrics {
        Some(m) => println!(
            "iterations={} converged={} acc={:.4} nmi={:.4}",
            result.iterations, result.converged, m.acc, m.nmi
        ),
        None => println!(
            "iterations={} converged={}",
            result.iterations, result.converged
        ),
    }
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> CliResult<()> {
    let ds = match args.kind {
        SynthKind::Subspaces => {
            let d = SubspaceParams::default();
            data::synth_linear_subspaces(&SubspaceParams {
                n_per_cluster: args.n_per_cluster.unwrap_or(d.n_per_cluster),
                k: args.k.unwrap_or(d.k),
                dims_per_view: args.dims.clone().unwrap_or(d.dims_per_view),
                subspace_dim: args.subspace_dim.unwrap_or(d.subspace_dim),
                noise: args.noise.unwrap_or(d.noise),
                seed: args.seed.unwrap_or(d.seed),
            })
        }
        SynthKind::Rings => {
            let d = RingParams::default();
            data::synth_rings(&RingParams {
                n_per_ring: args.n_per_ring.unwrap_or(d.n_per_ring),
                radii: args.radii.clone().unwrap_or(d.radii),
                noise: args.noise.unwrap_or(d.noise),
                views: args.views.unwrap_or(d.views),
                seed: args.seed.unwrap_or(d.seed),
            })
        }
    }
    .map_err(config_failure)?;

    let out = &args.out;
    if out.exists() {
        let non_empty = fs::read_dir(out)
            .map_err(|e| Error::io(out, e))?
            .next()
            .is_some();
        if non_empty && !args.force {
            return Err(config_failure(Error::InvalidParameter(format!(
                "{} is not empty; pass --force to overwrite",
                out.display()
            ))));
        }
    }
    let manifest = data::save_dataset(&ds, out)?;
    println!("{}", manifest.display());
    Ok(())
}

/// Binary PGM (`P5`) bytes for a square matrix: pixel `(i, j)` is
/// `255·(1 − |M(i,j)| / max|M|)`, and an all-zero matrix is all white.
pub fn heatmap_pgm(m: &DMatrix<f64>) -> crate::Result<Vec<u8>> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "heatmap needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.is_empty() {
        return Err(Error::Empty("heatmap matrix"));
    }
    crate::error::ensure_finite(m, "heatmap matrix")?;
    let n = m.nrows();
    let max = m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let mut bytes = format!("P5\n{n} {n}\n255\n").into_bytes();
    bytes.reserve(n * n);
    for i in 0..n {
        for j in 0..n {
            let shade = if max > 0.0 { 1.0 - m[(i, j)].abs() / max } else { 1.0 };
            bytes.push((255.0 * shade).round().clamp(0.0, 255.0) as u8);
        }
    }
    Ok(bytes)
}

fn cmd_heatmap(input: &Path, output: &Path) -> crate::Result<()> {
    let m = data::read_matrix_csv(input)?;
    let bytes = heatmap_pgm(&m)?;
    fs::write(output, bytes).map_err(|e| Error::io(output, e))
}

fn cmd_eval(pred: &Path, truth: &Path) -> crate::Result<()> {
    let p = data::read_labels(pred)?;
    let t = data::read_labels(truth)?;
    let s = metrics::evaluate(&p, &t)?;
    println!("acc={:.4} nmi={:.4}", s.acc, s.nmi);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heatmap_zero_matrix_is_white() {
        let bytes = heatmap_pgm(&DMatrix::zeros(3, 3)).unwrap();
        let header = b"P5\n3 3\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert!(bytes[header.len()..].iter().all(|&b| b == 255));
        assert_eq!(bytes.len(), header.len() + 9);
    }

    #[test]
    fn heatmap_block_matrix_has_dark_blocks() {
        let m = DMatrix::from_fn(4, 4, |i, j| if i / 2 == j / 2 { 1.0 } else { 0.0 });
        let bytes = heatmap_pgm(&m).unwrap();
        let px = &bytes[bytes.len() - 16..];
        assert_eq!(px[0], 0);
        assert_eq!(px[1], 0);
        assert_eq!(px[2], 255);
        assert_eq!(px[15], 0);
    }

    #[test]
    fn heatmap_rejects_non_square() {
        assert!(heatmap_pgm(&DMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn kernel_list_and_rho_cap() {
        assert_eq!(
            parse_kernels("linear,poly:1:2").unwrap(),
            vec![KernelSpec::Linear, KernelSpec::polynomial(1.0, 2).unwrap()]
        );
        assert_eq!(parse_rho_cap("none").unwrap(), None);
        assert_eq!(parse_rho_cap("10").unwrap(), Some(10.0));
        assert!(parse_rho_cap("x").is_err());
    }
}
