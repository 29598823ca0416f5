//! Horizon error, cumulative histogram / AUC and the ablation benchmark.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsio::write_atomic;
use crate::geom::{CameraFrame, ImageLine};
use crate::hvp::{derive_seed, detect, detect_empty, DetectionResult};
use crate::params::AlgorithmParams;
use crate::prior::{fit_gaussian, no_context_prior, CategoricalPrior};
use crate::segments::{load_segments, SegmentSet};

pub const DEFAULT_AUC_THRESHOLD: f64 = 0.25;
pub const HISTOGRAM_POINTS: usize = 512;

const FIT_STREAM: u64 = 0xF17;

/// Max vertical gap at the left and right image borders, over image height.
/// A vertical line on either side gives `+inf`.
pub fn horizon_error(detected: &ImageLine, truth: &ImageLine, frame: &CameraFrame) -> f64 {
    if detected.is_vertical() || truth.is_vertical() {
        return f64::INFINITY;
    }
    [0.0, frame.width]
        .iter()
        .map(|&u| (detected.v_at(u) - truth.v_at(u)).abs())
        .fold(0.0, f64::max)
        / frame.height
}

/// Area under the cumulative error histogram on `[0, max_threshold]`,
/// normalized to `[0, 1]`. Non-finite errors count towards `n` only.
pub fn auc(errors: &[f64], max_threshold: f64) -> Result<f64> {
    if errors.is_empty() {
        return Err(Error::UndefinedInput("AUC of an empty error list".into()));
    }
    if !(max_threshold > 0.0 && max_threshold.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "AUC threshold must be positive, got {max_threshold}"
        )));
    }
    // The staircase F(t) = #{e <= t}/n integrates to sum(max(T - e, 0))/n.
    let area: f64 = errors
        .iter()
        .filter(|e| e.is_finite())
        .map(|&e| (max_threshold - e.max(0.0)).max(0.0))
        .sum();
    Ok(area / (errors.len() as f64 * max_threshold))
}

/// `(threshold, fraction of errors <= threshold)` at uniform thresholds
/// from 0 to `max_threshold` inclusive.
pub fn cumulative_histogram(errors: &[f64], max_threshold: f64, points: usize) -> Vec<(f64, f64)> {
    let mut sorted: Vec<f64> = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len().max(1) as f64;
    (0..points)
        .map(|k| {
            let t = if points > 1 {
                max_threshold * k as f64 / (points - 1) as f64
            } else {
                max_threshold
            };
            let count = sorted.partition_point(|&e| e <= t);
            (t, count as f64 / n)
        })
        .collect()
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    Some(if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ablation {
    /// No context prior; full VP search.
    NoneFull,
    /// Context prior alone, no segments.
    CnnEmpty,
    /// Context prior plus full VP search.
    CnnFull,
}

impl Ablation {
    pub const ALL: [Ablation; 3] = [Ablation::NoneFull, Ablation::CnnEmpty, Ablation::CnnFull];

    pub fn as_str(self) -> &'static str {
        match self {
            Ablation::NoneFull => "none-full",
            Ablation::CnnEmpty => "cnn-empty",
            Ablation::CnnFull => "cnn-full",
        }
    }

    pub fn needs_prior(self) -> bool {
        self != Ablation::NoneFull
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Ablation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ablation::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown ablation mode '{s}'")))
    }
}

/// Runs one ablation mode on a segment set.
pub fn run_mode(
    set: &SegmentSet,
    prior: Option<&CategoricalPrior>,
    mode: Ablation,
    params: &AlgorithmParams,
    seed: u64,
) -> Result<DetectionResult> {
    let frame = set.frame;
    let fitted = match (mode.needs_prior(), prior) {
        (false, _) => None,
        (true, Some(cat)) => Some(fit_gaussian(
            cat,
            frame.height,
            params.fit_samples,
            derive_seed(seed, FIT_STREAM),
        )?),
        (true, None) => {
            return Err(Error::InvalidArgument(format!("mode {mode} needs a prior")));
        }
    };
    match mode {
        Ablation::NoneFull => detect(set, &no_context_prior(&frame), &frame, params, seed),
        Ablation::CnnFull => detect(set, fitted.as_ref().expect("fitted"), &frame, params, seed),
        Ablation::CnnEmpty => detect_empty(fitted.as_ref().expect("fitted"), &frame),
    }
}

/// Ground truth for one dataset image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub width: f64,
    pub height: f64,
    /// Homogeneous pixel line `a u + b v + c = 0`.
    pub horizon: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zenith: Option<[f64; 3]>,
    #[serde(default)]
    pub vps: Vec<[f64; 3]>,
}

impl GroundTruth {
    pub fn frame(&self) -> Result<CameraFrame> {
        CameraFrame::new(self.width, self.height)
    }

    pub fn horizon_line(&self) -> ImageLine {
        ImageLine::from_array(self.horizon)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let gt: GroundTruth = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        if gt.horizon.iter().all(|x| *x == 0.0) || gt.horizon.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "{}: horizon must be a finite non-zero line",
                path.display()
            )));
        }
        Ok(gt)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        write_atomic(path, text + "\n")
    }
}

pub const SEGMENTS_SUFFIX: &str = ".segments.txt";
pub const GT_SUFFIX: &str = ".gt.json";
pub const PRIOR_SUFFIX: &str = ".prior.json";

/// Paths of one dataset entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetItem {
    pub id: String,
    pub segments: PathBuf,
    pub ground_truth: PathBuf,
    pub prior: PathBuf,
}

impl DatasetItem {
    pub fn new(dir: &Path, id: &str) -> Self {
        Self {
            id: id.to_string(),
            segments: dir.join(format!("{id}{SEGMENTS_SUFFIX}")),
            ground_truth: dir.join(format!("{id}{GT_SUFFIX}")),
            prior: dir.join(format!("{id}{PRIOR_SUFFIX}")),
        }
    }
}

/// Entries with a segment file, sorted by id.
pub fn list_dataset(dir: impl AsRef<Path>) -> Result<Vec<DatasetItem>> {
    let dir = dir.as_ref();
    let rd = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut ids = Vec::new();
    for entry in rd {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name();
        if let Some(id) = name.to_str().and_then(|n| n.strip_suffix(SEGMENTS_SUFFIX)) {
            ids.push(id.to_string());
        }
    }
    ids.sort();
    if ids.is_empty() {
        return Err(Error::UndefinedInput(format!(
            "no *{SEGMENTS_SUFFIX} files in {}",
            dir.display()
        )));
    }
    Ok(ids.iter().map(|id| DatasetItem::new(dir, id)).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub image_id: String,
    pub mode: Ablation,
    pub horizon_error: f64,
    pub runtime_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub image_id: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub auc: f64,
    pub mean_runtime_s: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub mode: Ablation,
    pub auc_threshold: f64,
    pub records: Vec<ErrorRecord>,
    pub failures: Vec<Failure>,
    pub summary: Summary,
}

impl BenchReport {
    pub fn errors(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.horizon_error).collect()
    }

    pub fn median_error(&self) -> Option<f64> {
        median(&self.errors())
    }

    pub fn histogram(&self) -> Vec<(f64, f64)> {
        cumulative_histogram(&self.errors(), self.auc_threshold, HISTOGRAM_POINTS)
    }

    pub fn records_csv(&self) -> String {
        let mut out = String::from("image_id,mode,horizon_error,runtime_s\n");
        for r in &self.records {
            out += &format!("{},{},{},{:.6}\n", r.image_id, r.mode, r.horizon_error, r.runtime_s);
        }
        out
    }

    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("threshold,fraction\n");
        for (t, f) in self.histogram() {
            out += &format!("{t},{f}\n");
        }
        out
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("plain struct") + "\n"
    }
}

/// Detects and scores one dataset entry.
pub fn evaluate_item(
    item: &DatasetItem,
    mode: Ablation,
    params: &AlgorithmParams,
    seed: u64,
) -> Result<ErrorRecord> {
    let gt = GroundTruth::load(&item.ground_truth)?;
    let frame = gt.frame()?;
    let set = load_segments(&item.segments, frame)?;
    let prior = if mode.needs_prior() {
        if !item.prior.exists() {
            return Err(Error::InvalidArgument(format!(
                "missing prior file {}",
                item.prior.display()
            )));
        }
        Some(CategoricalPrior::load(&item.prior)?)
    } else {
        None
    };
    let t0 = Instant::now();
    let result = run_mode(&set, prior.as_ref(), mode, params, seed)?;
    let runtime_s = t0.elapsed().as_secs_f64();
    Ok(ErrorRecord {
        image_id: item.id.clone(),
        mode,
        horizon_error: horizon_error(&result.horizon_image, &gt.horizon_line(), &frame),
        runtime_s,
    })
}

/// Evaluates every entry of `dataset`; failing entries are reported and
/// skipped. Runs on the current rayon pool.
pub fn run_benchmark(
    dataset: impl AsRef<Path>,
    mode: Ablation,
    params: &AlgorithmParams,
    seed: u64,
    auc_threshold: f64,
) -> Result<BenchReport> {
    params.validate()?;
    let items = list_dataset(dataset)?;
    let outcomes: Vec<_> = items
        .par_iter()
        .map(|item| (item.id.clone(), evaluate_item(item, mode, params, seed)))
        .collect();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (id, outcome) in outcomes {
        match outcome {
            Ok(r) => records.push(r),
            Err(e) => {
                log::warn!("{id}: {e}");
                failures.push(Failure {
                    image_id: id,
                    message: e.to_string(),
                })
            }
        }
    }
    if records.is_empty() {
        return Err(Error::UndefinedInput("every dataset entry failed".into()));
    }
    let errors: Vec<f64> = records.iter().map(|r| r.horizon_error).collect();
    let summary = Summary {
        auc: auc(&errors, auc_threshold)?,
        mean_runtime_s: records.iter().map(|r| r.runtime_s).sum::<f64>() / records.len() as f64,
        n: records.len(),
    };
    Ok(BenchReport {
        mode,
        auc_threshold,
        records,
        failures,
        summary,
    })
}
