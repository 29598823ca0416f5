use std::path::{Path, PathBuf};

use anyhow::anyhow;
use clap::Args;
use hfvp_core::eval::{GroundTruth, PRIOR_SUFFIX, SEGMENTS_SUFFIX};
use hfvp_core::fsio::write_atomic;
use hfvp_core::geom::unlift_point;
use hfvp_core::segments::{detect_segments, load_pgm, DetectorConfig};
use hfvp_core::{
    horizon_error, load_segments, run_mode, Ablation, CameraFrame, CategoricalPrior, DetectionResult, SegmentSet,
};
use serde::Serialize;

use crate::{ensure_dir, AblationArg, CliError, CliResult, ParamArgs};

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("input").required(true).args(["segments", "image"])))]
pub struct DetectArgs {
    /// Segment file, one `x1 y1 x2 y2` row per segment.
    #[arg(long)]
    segments: Option<PathBuf>,
    /// Binary PGM image; segments are extracted with the built-in detector.
    #[arg(long)]
    image: Option<PathBuf>,
    /// Image width for a segment file (read from the ground truth if given).
    #[arg(long)]
    width: Option<f64>,
    #[arg(long)]
    height: Option<f64>,
    /// Categorical prior JSON; defaults to `<id>.prior.json` next to a
    /// `<id>.segments.txt` file.
    #[arg(long)]
    prior: Option<PathBuf>,
    /// Ground-truth JSON; adds the horizon error and GT overlay.
    #[arg(long)]
    gt: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "none-full")]
    ablation: AblationArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory; the result JSON goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write an SVG overlay (requires --out).
    #[arg(long)]
    svg: bool,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Serialize)]
struct SlopeIntercept {
    m: f64,
    b: f64,
}

#[derive(Serialize)]
struct HorizonOut {
    /// `a u + b v + c = 0` in pixels.
    homogeneous: [f64; 3],
    /// `v = m u + b`; absent for a vertical line.
    slope_intercept: Option<SlopeIntercept>,
    alpha_deg: f64,
    offset_px: f64,
}

#[derive(Serialize)]
struct VpOut {
    sphere: [f64; 3],
    image: Option<[f64; 2]>,
    weight: f64,
}

#[derive(Serialize)]
struct ZenithOut {
    sphere: Option<[f64; 3]>,
    image: Option<[f64; 2]>,
    inliers: usize,
    used_ransac: bool,
}

#[derive(Serialize)]
struct DetectOutput {
    width: f64,
    height: f64,
    ablation: Ablation,
    seed: u64,
    horizon: HorizonOut,
    zenith: ZenithOut,
    vps: Vec<VpOut>,
    /// Per input segment: index into `vps`, or null.
    assignments: Vec<Option<usize>>,
    score: f64,
    degraded: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    horizon_error: Option<f64>,
}

fn image_point(frame: &CameraFrame, p: &hfvp_core::SpherePoint) -> Option<[f64; 2]> {
    unlift_point(frame, p).map(|(u, v)| [u, v])
}

fn to_output(r: &DetectionResult, mode: Ablation, seed: u64, error: Option<f64>) -> DetectOutput {
    let f = &r.frame;
    DetectOutput {
        width: f.width,
        height: f.height,
        ablation: mode,
        seed,
        horizon: HorizonOut {
            homogeneous: r.horizon_image.to_array(),
            slope_intercept: r.horizon_image.slope_intercept().map(|(m, b)| SlopeIntercept { m, b }),
            alpha_deg: r.horizon.alpha.to_degrees(),
            offset_px: r.horizon.offset,
        },
        zenith: ZenithOut {
            sphere: r.zenith.zenith_vp.map(|z| z.to_array()),
            image: r.zenith.zenith_vp.as_ref().and_then(|z| image_point(f, z)),
            inliers: r.zenith.inlier_ids.len(),
            used_ransac: r.zenith.used_ransac,
        },
        vps: r
            .vps
            .iter()
            .zip(&r.vp_weights)
            .map(|(p, &w)| VpOut {
                sphere: p.to_array(),
                image: image_point(f, p),
                weight: w,
            })
            .collect(),
        assignments: r.assignments.clone(),
        score: r.score,
        degraded: r.degraded,
        horizon_error: error,
    }
}

fn default_prior_path(segments: &Path) -> Option<PathBuf> {
    let name = segments.file_name()?.to_str()?;
    let id = name.strip_suffix(SEGMENTS_SUFFIX)?;
    Some(segments.with_file_name(format!("{id}{PRIOR_SUFFIX}")))
}

fn output_stem(args: &DetectArgs) -> String {
    let path = args.segments.as_ref().or(args.image.as_ref()).expect("one input");
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("result");
    name.strip_suffix(SEGMENTS_SUFFIX)
        .or_else(|| name.rsplit_once('.').map(|(s, _)| s))
        .unwrap_or(name)
        .to_string()
}

fn load_inputs(args: &DetectArgs, gt: Option<&GroundTruth>) -> CliResult<SegmentSet> {
    if let Some(img_path) = &args.image {
        let img = load_pgm(img_path).map_err(CliError::usage)?;
        let frame = CameraFrame::new(img.width() as f64, img.height() as f64).map_err(CliError::usage)?;
        return detect_segments(&img, frame, &DetectorConfig::default()).map_err(CliError::runtime);
    }
    let seg_path = args.segments.as_ref().expect("clap enforces one input");
    let (w, h) = match (args.width, args.height, gt) {
        (Some(w), Some(h), _) => (w, h),
        (None, None, Some(gt)) => (gt.width, gt.height),
        _ => {
            return Err(CliError::usage(anyhow!(
                "--segments needs --width and --height (or --gt)"
            )))
        }
    };
    let frame = CameraFrame::new(w, h).map_err(CliError::usage)?;
    load_segments(seg_path, frame).map_err(CliError::usage)
}

fn load_prior(args: &DetectArgs, mode: Ablation) -> CliResult<Option<CategoricalPrior>> {
    if !mode.needs_prior() {
        return Ok(None);
    }
    let path = args
        .prior
        .clone()
        .or_else(|| args.segments.as_deref().and_then(default_prior_path))
        .ok_or_else(|| CliError::usage(anyhow!("--ablation {mode} needs --prior")))?;
    if !path.exists() {
        return Err(CliError::usage(anyhow!("prior file not found: {}", path.display())));
    }
    CategoricalPrior::load(&path).map(Some).map_err(CliError::usage)
}

pub fn run(args: DetectArgs) -> CliResult<()> {
    let params = args.params.to_params()?;
    let mode: Ablation = args.ablation.into();
    if args.svg && args.out.is_none() {
        return Err(CliError::usage(anyhow!("--svg requires --out")));
    }
    let gt = match &args.gt {
        Some(p) => Some(GroundTruth::load(p).map_err(CliError::usage)?),
        None => None,
    };
    let set = load_inputs(&args, gt.as_ref())?;
    let prior = load_prior(&args, mode)?;
    if let Some(out) = &args.out {
        ensure_dir(out)?;
    }

    let result = crate::with_jobs(args.jobs, || run_mode(&set, prior.as_ref(), mode, &params, args.seed))?
        .map_err(CliError::runtime)?;
    if result.degraded {
        log::warn!("no segments: horizon taken from the prior alone");
    }
    let error = gt
        .as_ref()
        .map(|g| horizon_error(&result.horizon_image, &g.horizon_line(), &set.frame));
    let json = serde_json::to_string_pretty(&to_output(&result, mode, args.seed, error))
        .map_err(CliError::runtime)?
        + "\n";

    match &args.out {
        None => print!("{json}"),
        Some(dir) => {
            let stem = output_stem(&args);
            write_atomic(dir.join(format!("{stem}.result.json")), &json).map_err(CliError::runtime)?;
            if args.svg {
                let doc = crate::svg::overlay(&set, &result, gt.as_ref());
                write_atomic(dir.join(format!("{stem}.svg")), doc).map_err(CliError::runtime)?;
            }
        }
    }
    Ok(())
}
