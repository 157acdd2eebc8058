//! The `wulffmc` command line.

mod commands;
pub mod config;
pub mod output;
pub mod svg;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::{parse_config, parse_config_in, ConfigError, ExperimentConfig, ShapeEntry};

/// Environment variable naming the default output root.
pub const OUTPUT_ROOT_ENV: &str = "WULFFMC_OUTPUT_ROOT";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Config { path: String, source: ConfigError },
    #[error("{0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config { .. } => EXIT_USAGE,
            CliError::Runtime(_) | CliError::Io(_) => EXIT_RUNTIME,
        }
    }
}

impl From<crate::search::SearchError> for CliError {
    fn from(e: crate::search::SearchError) -> Self {
        match e {
            crate::search::SearchError::Usage(m) => CliError::Usage(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<crate::sampler::SamplerError> for CliError {
    fn from(e: crate::sampler::SamplerError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "wulffmc", version, about = "Isothermal-isobaric Monte Carlo of soft-core particles in shaped containers")]
pub struct Cli {
    /// Maximum number of chains run concurrently.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one chain and write its trajectory, snapshots and summary.
    Simulate(RunArgs),
    /// Compare two or more shapes at one state point.
    Compare(RunArgs),
    /// Compare shapes over an ascending list of pressures.
    Scan(RunArgs),
    /// Local search over radial shapes starting from one shape.
    Search(RunArgs),
    /// Triangular-lattice energy per particle.
    Oracle(OracleArgs),
    /// Parse a configuration and print it with all defaults resolved.
    ValidateConfig(ValidateArgs),
}

#[derive(Debug, Args, Default)]
pub struct Overrides {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub replicas: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub particles: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    pub pressure: Option<Vec<f64>>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Disable the pair potential and hard core.
    #[arg(long)]
    pub ideal: bool,
    #[arg(long)]
    pub burn_in: Option<u64>,
    #[arg(long)]
    pub sweeps: Option<u64>,
    #[arg(long)]
    pub z: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub config: PathBuf,
    /// Output directory; overrides the config and the output root.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Root under which `<config name>/` is created when no directory is
    /// configured.
    #[arg(long, env = OUTPUT_ROOT_ENV)]
    pub output_root: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Optional configuration; its `[oracle]` section supplies defaults.
    pub config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub spacing: Option<Vec<f64>>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub config: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

impl Overrides {
    fn apply(&self, c: &mut ExperimentConfig) {
        if let Some(s) = self.seed {
            c.run.seed = Some(s);
        }
        if let Some(r) = self.replicas {
            c.run.replicas = r;
        }
        if let Some(n) = &self.particles {
            c.system.particles = n.clone();
        }
        if let Some(p) = &self.pressure {
            c.system.pressure = p.clone();
        }
        if let Some(b) = self.beta {
            c.system.beta = b;
        }
        if self.ideal {
            c.system.interaction = crate::interaction::Interaction::Ideal;
        }
        if let Some(b) = self.burn_in {
            c.schedule.burn_in = b;
        }
        if let Some(s) = self.sweeps {
            c.schedule.sweeps = s;
        }
        if let Some(z) = self.z {
            c.run.z = z;
        }
    }
}

/// Reads, validates and applies flag overrides.
pub fn load_config(path: &Path, overrides: &Overrides) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let wrap = |source| CliError::Config { path: path.display().to_string(), source };
    let mut config = parse_config_in(&text, base).map_err(wrap)?;
    overrides.apply(&mut config);
    config.validate("", base).map_err(wrap)?;
    Ok(config)
}

fn output_dir(args: &RunArgs, config: &ExperimentConfig) -> PathBuf {
    if let Some(d) = &args.output_dir {
        return d.clone();
    }
    if let Some(d) = &config.output.directory {
        return d.clone();
    }
    let stem = args.config.file_stem().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("run"));
    args.output_root.clone().unwrap_or_else(|| PathBuf::from("wulffmc-output")).join(stem)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Compare(a) => commands::compare(&a),
        Command::Scan(a) => commands::scan(&a),
        Command::Search(a) => commands::search(&a),
        Command::Oracle(a) => commands::oracle(&a),
        Command::ValidateConfig(a) => {
            let config = load_config(&a.config, &a.overrides)?;
            print!("{}", config.to_toml());
            Ok(())
        }
    }
}

/// Runs the command line and returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.jobs {
        Some(0) => Err(CliError::Usage("--jobs must be at least 1".into())),
        Some(j) => match rayon::ThreadPoolBuilder::new().num_threads(j).build() {
            Ok(pool) => pool.install(|| dispatch(cli)),
            Err(e) => Err(CliError::Runtime(e.to_string())),
        },
        None => dispatch(cli),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
