//! The `phstab` command-line tool.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use phstab::complex::FilteredComplex;
use phstab::error::Error;
use phstab::kernels::KernelFamily;
use phstab::metrics::{bottleneck, AugmentedDiagram};
use phstab::reduction::{persistence, DiagramJson, EssentialMode, PersistenceDiagram};
use phstab::stabilize::{sweep, write_sweep_csv};
use phstab::summaries::{ComputationKind, Functional, SummaryConfig};

pub mod experiments;
pub mod grid;
pub mod svg;

use grid::Grid;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for bad input, 3 for failures on our side.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(Error::Io(_)) | CliError::Io { .. } => 3,
            CliError::Core(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "phstab", version, about = "Persistence diagrams and their stabilized summaries")]
pub struct Cli {
    /// Worker threads for Monte-Carlo trials (default: all cores).
    #[arg(long, global = true, env = "PHSTAB_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the persistence diagram of a filtered complex file.
    Persistence(PersistenceArgs),
    /// Estimate a smoothed summary at one or more bandwidths.
    Stabilize(StabilizeArgs),
    /// Estimate a smoothed summary over a bandwidth grid.
    Sweep(StabilizeArgs),
    /// Bottleneck distance between two diagram files.
    Bottleneck(BottleneckArgs),
    /// Run a built-in experiment: line1, line2, curve, torus or denoise.
    Experiment(ExperimentArgs),
}

fn essential_mode(s: &str) -> Result<EssentialMode, String> {
    match s.split_once(':') {
        None if s == "extended" => Ok(EssentialMode::Extended),
        None if s == "infinite" => Ok(EssentialMode::Infinite),
        Some(("truncate", m)) => m
            .parse()
            .map(EssentialMode::Truncate)
            .map_err(|_| format!("bad truncation value {m:?}")),
        _ => Err(format!("expected extended, infinite or truncate:VALUE, got {s:?}")),
    }
}

#[derive(Debug, Args)]
pub struct PersistenceArgs {
    /// Complex JSON: {"simplices": [{"v": [0, 1], "f": 2.5}, ...]}.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub degree: usize,
    /// extended, infinite or truncate:VALUE.
    #[arg(long, default_value = "extended", value_parser = essential_mode)]
    pub essential: EssentialMode,
    /// Include cycle representatives.
    #[arg(long)]
    pub cycles: bool,
    /// Output file (default: standard output).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StabilizeArgs {
    /// Summary label: vertex:I, simplex:I,J,..., max-persistence,
    /// second-quadrant or region:U0,U1,V0,V1.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    pub summary: Option<Functional>,
    /// Summary configuration JSON file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Computation used with --summary.
    #[arg(long, value_enum, default_value = "line-graph-lower-star")]
    pub computation: ComputationArg,
    #[arg(long, default_value_t = 0)]
    pub degree: usize,
    #[arg(long, default_value = "extended", value_parser = essential_mode)]
    pub essential: EssentialMode,
    /// Rips scale limit, for --computation rips.
    #[arg(long)]
    pub max_scale: Option<f64>,
    /// Parameter vector as a JSON array of numbers.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "gaussian")]
    pub kernel: KernelFamily,
    #[arg(long, conflicts_with = "alphas")]
    pub bandwidth: Option<f64>,
    /// Bandwidth grid start:stop:count, endpoints included.
    #[arg(long)]
    pub alphas: Option<Grid>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
pub enum ComputationArg {
    LineGraphLowerStar,
    Curve,
    Rips,
    Torus,
}

impl From<ComputationArg> for ComputationKind {
    fn from(c: ComputationArg) -> Self {
        match c {
            ComputationArg::LineGraphLowerStar => ComputationKind::LineGraphLowerStar,
            ComputationArg::Curve => ComputationKind::Curve,
            ComputationArg::Rips => ComputationKind::Rips,
            ComputationArg::Torus => ComputationKind::Torus,
        }
    }
}

#[derive(Debug, Args)]
pub struct BottleneckArgs {
    pub first: PathBuf,
    pub second: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    pub name: String,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory (default: experiments/NAME).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub alphas: Option<Grid>,
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Torus sample size.
    #[arg(long)]
    pub n: Option<usize>,
    /// Denoise threshold radii.
    #[arg(long)]
    pub deltas: Option<Grid>,
    /// Denoise density levels.
    #[arg(long)]
    pub epsilons: Option<Grid>,
    /// Denoise Rips scale limit.
    #[arg(long)]
    pub max_scale: Option<f64>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        context: format!("cannot write {}", path.display()),
        source,
    })
}

fn in_file(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("{}: {e}", path.display()))
}

fn read_diagram(path: &Path) -> Result<PersistenceDiagram, CliError> {
    let wire: DiagramJson = serde_json::from_str(&read(path)?).map_err(|e| in_file(path, e))?;
    Ok(wire.into())
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Persistence(args) => cmd_persistence(args),
        Command::Stabilize(args) => cmd_stabilize(args, false),
        Command::Sweep(args) => cmd_stabilize(args, true),
        Command::Bottleneck(args) => {
            let a = AugmentedDiagram::from(&read_diagram(&args.first)?);
            let b = AugmentedDiagram::from(&read_diagram(&args.second)?);
            println!("{}", bottleneck(&a, &b));
            Ok(())
        }
        Command::Experiment(args) => cmd_experiment(args),
    }
}

fn cmd_persistence(args: PersistenceArgs) -> Result<(), CliError> {
    let complex = FilteredComplex::from_json_str(&read(&args.input)?).map_err(|e| in_file(&args.input, e))?;
    let diagram = persistence(&complex, args.degree, args.essential, args.cycles)?;
    let mut text = serde_json::to_string_pretty(&diagram.to_json()).map_err(Error::from)?;
    text.push('\n');
    match args.out {
        Some(path) => write(&path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_stabilize(args: StabilizeArgs, require_grid: bool) -> Result<(), CliError> {
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let alphas = match (args.alphas, args.bandwidth) {
        (Some(g), _) => g.values(),
        (None, Some(a)) if !require_grid => vec![a],
        _ if require_grid => return Err(CliError::Usage("sweep needs --alphas start:stop:count".into())),
        _ => return Err(CliError::Usage("give --bandwidth or --alphas".into())),
    };
    let a: Vec<f64> = serde_json::from_str(&read(&args.input)?).map_err(|e| in_file(&args.input, e))?;
    let config = match (&args.config, args.summary) {
        (Some(path), _) => SummaryConfig::from_json_str(&read(path)?).map_err(|e| in_file(path, e))?,
        (None, Some(functional)) => SummaryConfig {
            computation: args.computation.into(),
            functional,
            degree: args.degree,
            essential: args.essential,
            vertices: None,
            dim: None,
            max_scale: args.max_scale,
            cloud: None,
            memoize: false,
        },
        (None, None) => return Err(CliError::Usage("give --summary or --config".into())),
    };
    let summary = config.build(a.len())?;
    let rows = sweep(&summary, &a, args.kernel, &alphas, args.trials, args.seed)?;
    for row in &rows {
        println!(
            "{} alpha={}: {} ± {}",
            summary.id(),
            row.bandwidth,
            row.mean,
            row.stderr
        );
    }
    if let Some(path) = args.out {
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &summary.id(), &rows)?;
        write(&path, std::str::from_utf8(&buf).expect("ascii table"))?;
    }
    Ok(())
}

fn cmd_experiment(args: ExperimentArgs) -> Result<(), CliError> {
    if !experiments::NAMES.contains(&args.name.as_str()) {
        return Err(CliError::Usage(format!(
            "unknown experiment {:?}; valid names: {}",
            args.name,
            experiments::NAMES.join(", ")
        )));
    }
    let settings = experiments::Settings {
        trials: args.trials,
        seed: args.seed,
        alphas: args.alphas,
        bandwidth: args.bandwidth,
        n: args.n,
        deltas: args.deltas,
        epsilons: args.epsilons,
        max_scale: args.max_scale,
    };
    let dir = args.out.unwrap_or_else(|| Path::new("experiments").join(&args.name));
    let outcome = experiments::run(&args.name, &settings)?;
    fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        context: format!("cannot create {}", dir.display()),
        source,
    })?;
    for artifact in &outcome.artifacts {
        write(&dir.join(&artifact.name), &artifact.contents)?;
    }
    println!("{}", outcome.summary);
    println!("wrote {} files to {}", outcome.artifacts.len(), dir.display());
    Ok(())
}
