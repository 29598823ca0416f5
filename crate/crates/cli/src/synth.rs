use std::path::PathBuf;

use anyhow::anyhow;
use clap::{Args, ValueEnum};
use hfvp_core::hvp::derive_seed;
use hfvp_core::synth::{export_scene, synthetic_prior, OutlierMode};
use hfvp_core::{make_scene, SceneSpec};
use rayon::prelude::*;

use crate::{ensure_dir, CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutlierArg {
    Random,
    Adversarial,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Number of scenes.
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Horizontal line families (the second is orthogonal to the first).
    #[arg(long, default_value_t = 2)]
    families: usize,
    #[arg(long, default_value_t = 32)]
    segments_per_family: usize,
    /// Vertical family size; defaults to --segments-per-family.
    #[arg(long)]
    vertical_segments: Option<usize>,
    #[arg(long, default_value_t = 0.2)]
    outlier_fraction: f64,
    #[arg(long, value_enum, default_value = "random")]
    outlier_mode: OutlierArg,
    /// Endpoint noise in pixels; several comma-separated values write one
    /// sub-suite per level (`noise_<value>`) over the same geometry.
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    noise: Vec<f64>,
    #[arg(long, default_value_t = 640.0)]
    width: f64,
    #[arg(long, default_value_t = 480.0)]
    height: f64,
    /// Fixed camera (degrees); otherwise drawn per scene.
    #[arg(long)]
    fov: Option<f64>,
    #[arg(long)]
    pitch: Option<f64>,
    #[arg(long)]
    roll: Option<f64>,
    /// Skip writing `<id>.prior.json`.
    #[arg(long)]
    no_priors: bool,
    /// Spread of the synthetic prior offset, pixels.
    #[arg(long, default_value_t = 5.0)]
    prior_sigma_offset: f64,
    /// Spread of the synthetic prior slope, degrees.
    #[arg(long, default_value_t = 2.0)]
    prior_sigma_alpha: f64,
    #[arg(long)]
    jobs: Option<usize>,
}

fn spec_for(args: &SynthArgs, i: usize, noise: f64) -> SceneSpec {
    let seed = derive_seed(args.seed, i as u64);
    let mut spec = SceneSpec {
        n_families: args.families,
        segments_per_family: args.segments_per_family,
        vertical_segments: args.vertical_segments,
        outlier_fraction: args.outlier_fraction,
        outlier_mode: match args.outlier_mode {
            OutlierArg::Random => OutlierMode::Random,
            OutlierArg::Adversarial => OutlierMode::Adversarial,
        },
        endpoint_noise_px: noise,
        width: args.width,
        height: args.height,
        seed,
        ..SceneSpec::default()
    }
    .with_random_camera(seed);
    if let Some(f) = args.fov {
        spec.fov = f;
    }
    if let Some(p) = args.pitch {
        spec.pitch = p;
    }
    if let Some(r) = args.roll {
        spec.roll = r;
    }
    spec
}

pub fn run(args: SynthArgs) -> CliResult<()> {
    if args.n == 0 {
        return Err(CliError::usage(anyhow!("--n must be >= 1")));
    }
    if args.noise.is_empty() || args.noise.iter().any(|x| !(*x >= 0.0)) {
        return Err(CliError::usage(anyhow!("--noise values must be >= 0")));
    }
    // Catch spec errors before touching the filesystem.
    make_scene(&spec_for(&args, 0, args.noise[0])).map_err(CliError::usage)?;
    if !(args.prior_sigma_offset > 0.0 && args.prior_sigma_alpha > 0.0) {
        return Err(CliError::usage(anyhow!("prior spreads must be positive")));
    }

    let ladder = args.noise.len() > 1;
    for &noise in &args.noise {
        let dir = if ladder {
            args.out.join(format!("noise_{noise}"))
        } else {
            args.out.clone()
        };
        ensure_dir(&dir)?;
        crate::with_jobs(args.jobs, || {
            (0..args.n).into_par_iter().try_for_each(|i| {
                let spec = spec_for(&args, i, noise);
                let scene = make_scene(&spec)?;
                let prior = if args.no_priors {
                    None
                } else {
                    Some(synthetic_prior(
                        &scene,
                        args.prior_sigma_offset,
                        args.prior_sigma_alpha.to_radians(),
                        spec.seed,
                    )?)
                };
                export_scene(&scene, &dir, &format!("scene_{i:04}"), prior.as_ref())
            })
        })?
        .map_err(CliError::runtime)?;
    }
    eprintln!(
        "wrote {} scene(s) x {} noise level(s) to {}",
        args.n,
        args.noise.len(),
        args.out.display()
    );
    Ok(())
}
