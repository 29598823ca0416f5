//! Line segments: data model, text-file ingestion and the angular filters
//! applied before vanishing point search.

mod detect;

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsio::write_atomic;
use std::f64::consts::FRAC_PI_2;

use crate::geom::{angle, join, lift_point, CameraFrame, SphereLine, DEGENERATE_EPS};

pub use detect::{detect_segments, load_pgm, DetectorConfig};

/// Pixel coordinate pair.
pub type Pixel = (f64, f64);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineSegment {
    pub p1: Pixel,
    pub p2: Pixel,
    pub line: SphereLine,
    pub length: f64,
}

impl LineSegment {
    pub fn new(frame: &CameraFrame, p1: Pixel, p2: Pixel) -> Result<Self> {
        let length = ((p2.0 - p1.0).powi(2) + (p2.1 - p1.1).powi(2)).sqrt();
        if !(length > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "zero-length segment at ({}, {})",
                p1.0, p1.1
            )));
        }
        let a = lift_point(frame, p1.0, p1.1)?;
        let b = lift_point(frame, p2.0, p2.1)?;
        let line = join(&a, &b)?;
        Ok(Self {
            p1,
            p2,
            line,
            length,
        })
    }

    pub fn midpoint(&self) -> Pixel {
        ((self.p1.0 + self.p2.0) / 2.0, (self.p1.1 + self.p2.1) / 2.0)
    }

    /// Image-space direction angle in `[0, pi)`.
    pub fn direction(&self) -> f64 {
        let a = (self.p2.1 - self.p1.1).atan2(self.p2.0 - self.p1.0);
        a.rem_euclid(std::f64::consts::PI)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentSet {
    pub frame: CameraFrame,
    pub segments: Vec<LineSegment>,
}

impl SegmentSet {
    pub fn new(frame: CameraFrame) -> Self {
        Self {
            frame,
            segments: Vec::new(),
        }
    }

    /// Builds a set from raw endpoints, clamping them into the frame.
    pub fn from_endpoints(
        frame: CameraFrame,
        endpoints: impl IntoIterator<Item = (Pixel, Pixel)>,
    ) -> Result<Self> {
        let segments = endpoints
            .into_iter()
            .map(|(a, b)| LineSegment::new(&frame, clamp(&frame, a), clamp(&frame, b)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { frame, segments })
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn lines(&self) -> impl Iterator<Item = &SphereLine> + '_ {
        self.segments.iter().map(|s| &s.line)
    }

    /// New set holding the segments at `indices`, in order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            frame: self.frame,
            segments: indices.iter().map(|&i| self.segments[i]).collect(),
        }
    }

    /// Serializes to the whitespace-separated `u1 v1 u2 v2` text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.segments {
            let _ = writeln!(out, "{} {} {} {}", s.p1.0, s.p1.1, s.p2.0, s.p2.1);
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        write_atomic(path, self.to_text())
    }
}

fn clamp(frame: &CameraFrame, p: Pixel) -> Pixel {
    (p.0.clamp(0.0, frame.width), p.1.clamp(0.0, frame.height))
}

/// Parses the segment text format. Rows are 1-based in errors.
pub fn parse_segments(text: &str, frame: CameraFrame, path: &Path) -> Result<SegmentSet> {
    let mut segments = Vec::new();
    let mut zero_rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let row = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: row,
                msg: e.to_string(),
            })?;
        if fields.len() != 4 || fields.iter().any(|x| !x.is_finite()) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: row,
                msg: format!("expected four finite numbers, got {:?}", line),
            });
        }
        let a = clamp(&frame, (fields[0], fields[1]));
        let b = clamp(&frame, (fields[2], fields[3]));
        match LineSegment::new(&frame, a, b) {
            Ok(s) => segments.push(s),
            Err(_) => zero_rows.push(row),
        }
    }
    if !zero_rows.is_empty() {
        return Err(Error::ZeroLengthSegments {
            path: path.to_path_buf(),
            rows: zero_rows,
        });
    }
    Ok(SegmentSet { frame, segments })
}

pub fn load_segments(path: impl AsRef<Path>, frame: CameraFrame) -> Result<SegmentSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_segments(&text, frame, path)
}

/// Image-plane angle in `[0, pi/2]` between the orientations of two lines.
///
/// Only the first two coordinates (the in-image normal) take part, so the
/// result does not depend on where the lines sit in the image.
pub fn orientation_angle(l: &SphereLine, m: &SphereLine) -> f64 {
    let (a, b) = (l.coords(), m.coords());
    let na = (a.x * a.x + a.y * a.y).sqrt();
    let nb = (b.x * b.x + b.y * b.y).sqrt();
    if na < DEGENERATE_EPS || nb < DEGENERATE_EPS {
        return FRAC_PI_2;
    }
    ((a.x * b.x + a.y * b.y).abs() / (na * nb)).min(1.0).acos()
}

/// Indices of segments kept for horizontal VP search: not nearly vertical
/// (orientation within `theta_ver` of `zenith_dir`) and not nearly parallel
/// to the horizon candidate (`angle(l, h) >= theta_hor`).
pub fn horizon_filter_indices(
    set: &SegmentSet,
    zenith_dir: &SphereLine,
    h: &SphereLine,
    theta_ver: f64,
    theta_hor: f64,
) -> Vec<usize> {
    set.segments
        .iter()
        .enumerate()
        .filter(|(_, s)| {
            orientation_angle(&s.line, zenith_dir) >= theta_ver
                && angle(s.line.coords(), h.coords()) >= theta_hor
        })
        .map(|(i, _)| i)
        .collect()
}

pub fn filter_for_horizon(
    set: &SegmentSet,
    zenith_dir: &SphereLine,
    h: &SphereLine,
    theta_ver: f64,
    theta_hor: f64,
) -> SegmentSet {
    set.subset(&horizon_filter_indices(set, zenith_dir, h, theta_ver, theta_hor))
}

/// Indices whose image orientation is within `theta_ver` of `zenith_dir`.
pub fn vertical_candidate_indices(
    set: &SegmentSet,
    zenith_dir: &SphereLine,
    theta_ver: f64,
) -> Vec<usize> {
    set.segments
        .iter()
        .enumerate()
        .filter(|(_, s)| orientation_angle(&s.line, zenith_dir) < theta_ver)
        .map(|(i, _)| i)
        .collect()
}

pub fn select_vertical_candidates(
    set: &SegmentSet,
    zenith_dir: &SphereLine,
    theta_ver: f64,
) -> SegmentSet {
    set.subset(&vertical_candidate_indices(set, zenith_dir, theta_ver))
}
