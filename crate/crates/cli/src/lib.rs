//! `tvfrac` command line: synthetic data, k-NN graph export, two-stage
//! denoising and the fractional-order grid search.
//!
//! Exit codes: 0 success, 2 configuration error, 3 input parse or I/O
//! error, 4 numeric failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use tvfrac_core::graph::{build_knn_graph, KnnConfig};
use tvfrac_core::pipeline::{grid_search, order_grid, run_experiment, DenoiseReport, SecondStage};
use tvfrac_core::{io, synth, Error, ExperimentConfig, FirstStage, Mode, SnrConvention};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn config(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: msg.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) => EXIT_CONFIG,
            Error::Parse { .. } | Error::Io { .. } => EXIT_INPUT,
            Error::InvalidInput(_) | Error::UnsupportedOperator { .. } => EXIT_NUMERIC,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "tvfrac", version, about = "Optimal time-vertex graph filtering in fractional Fourier domains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Random sensor coordinates plus a signal smooth on the k-NN graph and time cycle.
    Synth(SynthArgs),
    /// Build the k-NN graph from coordinates and export its edge list.
    Graph(GraphArgs),
    /// Two-stage denoising at fixed orders or over the configured grid.
    Denoise(DenoiseArgs),
    /// Output surface over the closed (a, b) grid.
    Grid(DenoiseArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, default_value_t = 120)]
    pub t: usize,
    /// Number of smoothest joint eigenvectors mixed into the signal.
    #[arg(long, default_value_t = 3)]
    pub smoothness: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[arg(long)]
    pub coords: PathBuf,
    /// Experiment config; only its `knn` section is used.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FirstStageArg {
    Tikhonov,
    Median,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SnrConventionArg {
    Paper,
    Conventional,
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    /// Noisy N x T signal. Without it, noise is injected into --clean.
    #[arg(long)]
    pub signal: Option<PathBuf>,
    #[arg(long)]
    pub coords: PathBuf,
    /// Clean signal; enables experiment mode.
    #[arg(long)]
    pub clean: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Temporal order; pins the grid to a single point.
    #[arg(long)]
    pub a: Option<f64>,
    /// Vertex order; pins the grid to a single point.
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub grid_step: Option<f64>,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub group_len: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_enum)]
    pub first_stage: Option<FirstStageArg>,
    #[arg(long, value_enum)]
    pub snr_convention: Option<SnrConventionArg>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

/// Everything needed to rerun a command and reproduce its numeric outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub config: Option<ExperimentConfig>,
    pub synth: Option<SynthEcho>,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub created_unix_s: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SynthEcho {
    pub n: usize,
    pub t: usize,
    pub smoothness: usize,
    pub k: usize,
}

fn sha256_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::from(Error::Io {
        path: path.to_path_buf(),
        source: e,
    }))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

fn digest(role: &str, path: &Path) -> CliResult<InputDigest> {
    Ok(InputDigest {
        role: role.into(),
        path: path.display().to_string(),
        sha256: sha256_file(path)?,
    })
}

fn manifest(command: &str) -> RunManifest {
    RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        seed: None,
        config: None,
        synth: None,
        inputs: Vec::new(),
        outputs: Vec::new(),
        created_unix_s: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    }
}

fn out_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(|e| {
        CliError::from(Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })
}

fn load_config(path: Option<&Path>) -> CliResult<ExperimentConfig> {
    let Some(path) = path else {
        return Ok(ExperimentConfig::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("bad config {}: {e}", path.display())))
}

/// What a command wrote, for callers that want to inspect it.
#[derive(Debug)]
pub enum Outcome {
    Synth { files: Vec<PathBuf> },
    Graph { edges: usize, files: Vec<PathBuf> },
    Denoise { report: Box<DenoiseReport>, files: Vec<PathBuf> },
}

pub fn run(cli: Cli) -> CliResult<Outcome> {
    match cli.command {
        Command::Synth(a) => cmd_synth(&a),
        Command::Graph(a) => cmd_graph(&a),
        Command::Denoise(a) => cmd_denoise(&a, false),
        Command::Grid(a) => cmd_denoise(&a, true),
    }
}

/// Parses `args` (including the program name), runs, prints a summary or
/// error, and returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match run(cli) {
        Ok(out) => {
            print_summary(&out);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

fn print_summary(out: &Outcome) {
    let files = match out {
        Outcome::Synth { files } => files,
        Outcome::Graph { edges, files } => {
            println!("{edges} edges");
            files
        }
        Outcome::Denoise { report, files } => {
            println!("best orders (a, b) = ({}, {})", report.best_orders.0, report.best_orders.1);
            if let (Some(i), Some(f), Some(s)) =
                (report.input_snr_db, report.first_stage_snr_db, report.second_stage_snr_db)
            {
                println!(
                    "SNR ({:?} convention): input {i:.4} dB, first stage {f:.4} dB, second stage {s:.4} dB",
                    report.snr_convention
                );
            }
            if let Some(res) = report.best_residual {
                println!("best residual {res:.6e}");
            }
            for w in &report.warnings {
                println!("warning: {w}");
            }
            files
        }
    };
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn cmd_synth(a: &SynthArgs) -> CliResult<Outcome> {
    if a.n < 2 || a.t < 2 {
        return Err(CliError::config(format!("need n, t >= 2, got n={}, t={}", a.n, a.t)));
    }
    let coords = synth::random_coordinates(a.n, a.seed);
    let knn = KnnConfig {
        k: a.k,
        ..KnnConfig::default()
    };
    let g = build_knn_graph(&coords, &knn)?;
    let x = synth::smooth_signal(&g, a.t, a.smoothness, a.seed)?;

    out_dir(&a.out_dir)?;
    let files = vec![
        a.out_dir.join("coords.csv"),
        a.out_dir.join("signal.csv"),
        a.out_dir.join("edges.csv"),
    ];
    io::write_coordinates(&files[0], &coords)?;
    io::write_signal(&files[1], &x)?;
    io::write_edges(&files[2], &g)?;
    let mut m = manifest("synth");
    m.seed = Some(a.seed);
    m.synth = Some(SynthEcho {
        n: a.n,
        t: a.t,
        smoothness: a.smoothness,
        k: a.k,
    });
    m.outputs = files.iter().map(|f| f.display().to_string()).collect();
    let mpath = a.out_dir.join("manifest.json");
    io::write_json(&mpath, &m)?;
    let mut files = files;
    files.push(mpath);
    Ok(Outcome::Synth { files })
}

fn cmd_graph(a: &GraphArgs) -> CliResult<Outcome> {
    let mut cfg = load_config(a.config.as_deref())?;
    if let Some(k) = a.k {
        cfg.knn.k = k;
    }
    let coords = io::load_coordinates(&a.coords)?;
    let g = build_knn_graph(&coords, &cfg.knn)?;
    out_dir(&a.out_dir)?;
    let edges = a.out_dir.join("edges.csv");
    io::write_edges(&edges, &g)?;
    let mut m = manifest("graph");
    m.config = Some(cfg);
    m.inputs.push(digest("coords", &a.coords)?);
    m.outputs.push(edges.display().to_string());
    let mpath = a.out_dir.join("manifest.json");
    io::write_json(&mpath, &m)?;
    Ok(Outcome::Graph {
        edges: g.edges().len(),
        files: vec![edges, mpath],
    })
}

/// Config from file, then flag overrides, then the orders grid.
pub fn resolve_config(a: &DenoiseArgs, grid_command: bool) -> CliResult<ExperimentConfig> {
    let mut cfg = load_config(a.config.as_deref())?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(p) = a.p {
        cfg.p = p;
    }
    if let Some(q) = a.q {
        cfg.q = q;
    }
    if let Some(m) = a.group_len {
        cfg.group_len = m;
    }
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(f) = a.first_stage {
        cfg.first_stage = match f {
            FirstStageArg::Tikhonov => FirstStage::Tikhonov,
            FirstStageArg::Median => FirstStage::Median,
        };
    }
    if let Some(c) = a.snr_convention {
        cfg.snr_convention = match c {
            SnrConventionArg::Paper => SnrConvention::Paper,
            SnrConventionArg::Conventional => SnrConvention::Conventional,
        };
    }
    let pinned = a.a.is_some() || a.b.is_some();
    if grid_command && pinned {
        return Err(CliError::config("grid does not take --a/--b; use denoise"));
    }
    if pinned && a.grid_step.is_some() {
        return Err(CliError::config("--a/--b and --grid-step are mutually exclusive"));
    }
    if pinned {
        cfg.orders_grid = vec![(a.a.unwrap_or(1.0), a.b.unwrap_or(1.0))];
    } else if let Some(step) = a.grid_step {
        cfg.orders_grid = order_grid(step)?;
    } else if grid_command && a.config.is_none() {
        cfg.orders_grid = order_grid(0.1)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_denoise(a: &DenoiseArgs, grid_command: bool) -> CliResult<Outcome> {
    let mut cfg = resolve_config(a, grid_command)?;
    if a.signal.is_none() && a.clean.is_none() {
        return Err(CliError::config("need --signal, --clean, or both"));
    }
    let coords = io::load_coordinates(&a.coords)?;
    let noisy = a.signal.as_deref().map(io::load_signal).transpose()?;
    let clean = a.clean.as_deref().map(io::load_signal).transpose()?;
    let (n, t) = match (&noisy, &clean) {
        (Some(y), Some(x)) => {
            if (y.n(), y.t()) != (x.n(), x.t()) {
                return Err(CliError::config(format!(
                    "signal is {}x{} but clean is {}x{}",
                    y.n(),
                    y.t(),
                    x.n(),
                    x.t()
                )));
            }
            (y.n(), y.t())
        }
        (Some(s), None) | (None, Some(s)) => (s.n(), s.t()),
        (None, None) => unreachable!(),
    };
    if coords.len() != n {
        return Err(CliError::config(format!(
            "{} coordinates for a signal with {n} vertices",
            coords.len()
        )));
    }
    if clean.is_none() {
        cfg.mode = Mode::Blind;
    }
    cfg.validate_for(n, t)?;
    let g = build_knn_graph(&coords, &cfg.knn)?;

    let (report, stage): (DenoiseReport, SecondStage) = match (&noisy, &clean) {
        (None, Some(x)) => run_experiment(&g, x.values(), &cfg)?,
        (Some(y), x) => grid_search(y.values(), &g, &cfg, x.as_ref().map(|s| s.values()))?,
        (None, None) => unreachable!(),
    };

    out_dir(&a.out_dir)?;
    let mut files = Vec::new();
    if !grid_command {
        let p = a.out_dir.join("denoised.csv");
        io::write_signal(&p, &stage.output)?;
        files.push(p);
        let p = a.out_dir.join("coefficients.csv");
        io::write_coefficients(&p, &stage.coefficients)?;
        files.push(p);
    }
    let surface = a.out_dir.join("surface.csv");
    io::write_surface(&surface, &report)?;
    files.push(surface);
    let rpath = a.out_dir.join("report.json");
    io::write_json(&rpath, &report)?;
    files.push(rpath);

    let mut m = manifest(if grid_command { "grid" } else { "denoise" });
    m.seed = Some(cfg.seed);
    m.config = Some(cfg);
    m.inputs.push(digest("coords", &a.coords)?);
    if let Some(p) = &a.signal {
        m.inputs.push(digest("signal", p)?);
    }
    if let Some(p) = &a.clean {
        m.inputs.push(digest("clean", p)?);
    }
    if let Some(p) = &a.config {
        m.inputs.push(digest("config", p)?);
    }
    m.outputs = files.iter().map(|f| f.display().to_string()).collect();
    let mpath = a.out_dir.join("manifest.json");
    io::write_json(&mpath, &m)?;
    files.push(mpath);
    Ok(Outcome::Denoise {
        report: Box::new(report),
        files,
    })
}
