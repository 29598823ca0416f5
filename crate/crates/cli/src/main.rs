//! `hfvp`: detect horizons and vanishing points, benchmark ablation modes
//! and generate synthetic suites.

mod bench;
mod detect;
mod svg;
mod synth;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hfvp_core::{Ablation, AlgorithmParams};

/// Exit status 1: bad usage or inputs; 2: failure while running.
#[derive(Debug)]
pub enum CliError {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn usage(e: impl Into<anyhow::Error>) -> Self {
        CliError::Usage(e.into())
    }

    pub fn runtime(e: impl Into<anyhow::Error>) -> Self {
        CliError::Runtime(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "hfvp", version, about = "Horizon-first vanishing point detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Detect the horizon and horizontal VPs of one image or segment file.
    Detect(detect::DetectArgs),
    /// Evaluate one ablation mode over a dataset directory.
    Bench(bench::BenchArgs),
    /// Write a synthetic dataset (segments, ground truth, priors).
    Synth(synth::SynthArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum AblationArg {
    NoneFull,
    CnnEmpty,
    CnnFull,
}

impl From<AblationArg> for Ablation {
    fn from(a: AblationArg) -> Self {
        match a {
            AblationArg::NoneFull => Ablation::NoneFull,
            AblationArg::CnnEmpty => Ablation::CnnEmpty,
            AblationArg::CnnFull => Ablation::CnnFull,
        }
    }
}

/// Algorithm parameters; angles in degrees.
#[derive(Args, Debug, Clone)]
pub struct ParamArgs {
    /// Point/line consistency threshold.
    #[arg(long, default_value_t = 2.0)]
    theta_con: f64,
    /// Vertical segment threshold.
    #[arg(long, default_value_t = 10.0)]
    theta_ver: f64,
    /// Near-horizon segment threshold.
    #[arg(long, default_value_t = 1.5)]
    theta_hor: f64,
    /// Minimum VP separation.
    #[arg(long, default_value_t = 33.0)]
    theta_dist: f64,
    /// Horizon candidates per image.
    #[arg(long, default_value_t = 300)]
    samples: usize,
    /// Segments sampled per candidate to seed VPs.
    #[arg(long, default_value_t = 20)]
    subset: usize,
}

impl ParamArgs {
    pub fn to_params(&self) -> CliResult<AlgorithmParams> {
        let p = AlgorithmParams {
            theta_con: self.theta_con.to_radians(),
            theta_ver: self.theta_ver.to_radians(),
            theta_hor: self.theta_hor.to_radians(),
            theta_dist: self.theta_dist.to_radians(),
            samples: self.samples,
            subset: self.subset,
            ..AlgorithmParams::default()
        };
        p.validate().map_err(CliError::usage)?;
        Ok(p)
    }
}

/// Runs `f` on a rayon pool of `jobs` threads (all cores when absent).
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        if j == 0 {
            return Err(CliError::usage(anyhow::anyhow!("--jobs must be >= 1")));
        }
        builder = builder.num_threads(j);
    }
    let pool = builder.build().map_err(CliError::runtime)?;
    Ok(pool.install(f))
}

pub fn ensure_dir(dir: &PathBuf) -> CliResult<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::runtime(anyhow::anyhow!("cannot create {}: {e}", dir.display())))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("HFVP_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Detect(a) => detect::run(a),
        Command::Bench(a) => bench::run(a),
        Command::Synth(a) => synth::run(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
