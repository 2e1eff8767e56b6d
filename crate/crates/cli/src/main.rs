mod commands;
mod config;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};
use thiserror::Error;

use config::{Command, ConfigError};

/// Exact-diagonalization simulator of the 2D vibron model realized in a
/// spin-1 condensate.
#[derive(Parser, Debug)]
#[command(name = "vibron", version)]
struct Cli {
    /// JSON config file; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Data output path; CSV goes to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Manifest path; defaults to `<out>.manifest.json`, or stderr when
    /// writing to stdout.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Worker threads; defaults to the number of physical cores.
    #[arg(long, global = true, env = "VIBRON_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Normalized excitation spectrum of one l block over a gamma grid.
    Spectrum(SpectrumArgs),
    /// Mean-field level sets of the two-mode energy surface.
    Meanfield(MeanfieldArgs),
    /// Quadrature means of an evolving coherent state.
    Coherent(CoherentArgs),
    /// Spinor quench from |0,N,0> with squeezing and QFI criteria.
    Quench(QuenchArgs),
    /// Planar or spherical Wigner function of an evolved state.
    Wigner(WignerArgs),
    /// max_gap over a grid of gamma and N.
    Sweep(SweepArgs),
}

#[derive(Args, Serialize, Debug)]
struct SpectrumArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    hamiltonian: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_min: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    steps: Option<i64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    l: Option<i64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    normalization: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    w2_sign: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    e0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<f64>,
}

#[derive(Args, Serialize, Debug)]
struct MeanfieldArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    /// `auto`, a level count, or a comma-separated list of energies.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    trajectories: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    levels: Option<i64>,
    /// Marching-squares grid size per axis.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    resolution: Option<i64>,
    /// Map the curves to (X, P_X) for this N.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    phase_space_n: Option<i64>,
}

#[derive(Args, Serialize, Debug)]
struct StateArgs {
    /// pole, coherent or spin_coherent.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    initial: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    phi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    y: Option<f64>,
}

#[derive(Args, Serialize, Debug)]
struct CoherentArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    hamiltonian: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<i64>,
    #[command(flatten)]
    #[serde(flatten)]
    state: StateArgs,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    t_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<i64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    normalization: Option<String>,
}

#[derive(Args, Serialize, Debug)]
struct QuenchArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<i64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    t_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<i64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    normalization: Option<String>,
}

#[derive(Args, Serialize, Debug)]
struct WignerArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    hamiltonian: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<i64>,
    #[command(flatten)]
    #[serde(flatten)]
    state: StateArgs,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    time: Option<f64>,
    /// planar or spherical.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    x_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    x_len: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p_len: Option<i64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    theta_len: Option<i64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    phi_len: Option<i64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    normalization: Option<String>,
}

#[derive(Args, Serialize, Debug)]
struct SweepArgs {
    /// Comma-separated gamma values; overrides the gamma grid.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    gammas: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_min: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    steps: Option<i64>,
    /// Comma-separated particle numbers.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    ns: Option<Vec<i64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    t_max: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    points: Option<i64>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("invalid configuration")]
    Config(Vec<ConfigError>),
    #[error(transparent)]
    Numeric(#[from] vibron_core::Error),
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn to_map<T: Serialize>(args: &T) -> Map<String, Value> {
    match serde_json::to_value(args) {
        Ok(Value::Object(m)) => m,
        _ => Map::new(),
    }
}

/// Flag values as config keys. `--trajectories` takes `auto`, a count or a
/// comma-separated list, so it is decoded here.
fn flag_layer(sub: &Sub) -> (Command, Map<String, Value>) {
    match sub {
        Sub::Spectrum(a) => (Command::Spectrum, to_map(a)),
        Sub::Meanfield(a) => {
            let mut m = to_map(a);
            if let Some(Value::String(s)) = m.get("trajectories").cloned() {
                let decoded = if let Ok(k) = s.parse::<u64>() {
                    json!(k)
                } else if s == "auto" {
                    json!(s)
                } else {
                    let parts: Result<Vec<f64>, _> = s.split(',').map(|p| p.trim().parse::<f64>()).collect();
                    parts.map(|v| json!(v)).unwrap_or(json!(s))
                };
                m.insert("trajectories".into(), decoded);
            }
            (Command::Meanfield, m)
        }
        Sub::Coherent(a) => (Command::Coherent, to_map(a)),
        Sub::Quench(a) => (Command::Quench, to_map(a)),
        Sub::Wigner(a) => (Command::Wigner, to_map(a)),
        Sub::Sweep(a) => (Command::Sweep, to_map(a)),
    }
}

fn partial_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".partial");
    PathBuf::from(s)
}

fn write_manifest(cli: &Cli, command: Command, resolved: &Map<String, Value>) -> Result<(), CliError> {
    let manifest = json!({
        "command": command.name(),
        "library_version": vibron_core::VERSION,
        "deterministic": true,
        "config": resolved,
        "data": cli.out.as_ref().map(|p| p.display().to_string()),
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    let path = match (&cli.manifest, &cli.out) {
        (Some(p), _) => p.clone(),
        (None, Some(out)) => {
            let mut s = out.as_os_str().to_owned();
            s.push(".manifest.json");
            PathBuf::from(s)
        }
        (None, None) => {
            io::stderr().write_all(text.as_bytes()).map_err(io_err(Path::new("<stderr>")))?;
            return Ok(());
        }
    };
    fs::write(&path, text).map_err(io_err(&path))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let (command, flags) = flag_layer(&cli.command);
    let mut layers = Vec::new();
    if let Some(path) = &cli.config {
        layers.push(config::load_file(path, command).map_err(CliError::Config)?);
    }
    layers.push(flags);
    let resolved = config::merge(command, &layers).map_err(CliError::Config)?;
    let run = config::validate(command, &resolved).map_err(CliError::Config)?;

    write_manifest(cli, command, &resolved)?;

    let workers = cli.workers.filter(|&w| w > 0).unwrap_or_else(num_cpus::get_physical);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Io {
            path: PathBuf::from("<thread pool>"),
            source: io::Error::other(e),
        })?;

    match &cli.out {
        None => {
            let mut w = BufWriter::new(io::stdout());
            pool.install(|| commands::execute(&run, &mut w))?;
            w.flush().map_err(io_err(Path::new("<stdout>")))?;
        }
        Some(out) => {
            let partial = partial_path(out);
            let file = File::create(&partial).map_err(io_err(&partial))?;
            let mut w = BufWriter::new(file);
            pool.install(|| commands::execute(&run, &mut w))?;
            w.flush().map_err(io_err(&partial))?;
            drop(w);
            fs::rename(&partial, out).map_err(io_err(out))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Config(errors) => {
                    for err in errors {
                        eprintln!("config error: {err}");
                    }
                }
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}
