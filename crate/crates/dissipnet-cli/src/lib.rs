//! `dissipnet` command line: runs one experiment from a TOML config and
//! writes its CSV tables and SVG plots.
//!
//! ```text
//! dissipnet <experiment> --config <path> [--out <dir>] [--jobs N] [--seed S]
//! ```
//!
//! Exit status is 0 on success, 1 for configuration, usage or file errors
//! and 2 when a solver fails.

pub mod config;
pub mod experiments;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::Parser;

use config::{Config, Experiment};
use experiments::Artifact;

/// Output directory override when `--out` is absent.
pub const OUT_ENV: &str = "DISSIPNET_OUT";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("io error: {0}")]
    Io(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Solver(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dissipnet", version, about = "Dissipative two-qubit entanglement experiments")]
pub struct Args {
    pub experiment: Experiment,
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides DISSIPNET_OUT and output.dir).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Runs the experiment and returns the files written.
pub fn run(args: &Args) -> Result<Vec<PathBuf>, CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::config(format!("{}: {e}", args.config.display())))?;
    let config = Config::parse(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", args.config.display())),
        other => other,
    })?;
    let out_dir = args
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .or_else(|| config.output.as_ref().and_then(|o| o.dir.clone()))
        .unwrap_or_else(|| PathBuf::from("results"));
    let seed = args.seed.or(config.seed).unwrap_or(0);
    if args.jobs == Some(0) {
        return Err(CliError::config("--jobs must be at least 1"));
    }

    let outcome = match args.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Io(e.to_string()))?
            .install(|| experiments::run(args.experiment, &config, seed))?,
        None => experiments::run(args.experiment, &config, seed)?,
    };

    fs::create_dir_all(&out_dir).map_err(|e| CliError::Io(format!("{}: {e}", out_dir.display())))?;
    let mut written = Vec::new();
    for artifact in &outcome.artifacts {
        let path = match artifact {
            Artifact::Csv(name, table) => {
                let path = out_dir.join(name);
                output::emit_csv(table, &path)?;
                path
            }
            Artifact::Svg(name, svg) => {
                let path = out_dir.join(name);
                output::emit_svg(svg, &path)?;
                path
            }
        };
        written.push(path);
    }
    for line in &outcome.summary {
        println!("{line}");
    }
    Ok(written)
}

/// Parses `argv`, runs, reports, and returns the process exit code.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&args) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
