//! Minimal gradient-based segment detector for raw grayscale rasters.
//!
//! Sobel gradients, an Otsu threshold on gradient magnitude, 8-connected
//! region growing over pixels whose level-line orientation agrees with the
//! region, then a principal-axis line fit per region.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::path::Path;

use image::{GrayImage, ImageFormat, ImageReader};

use super::{LineSegment, SegmentSet};
use crate::error::{Error, Result};
use crate::geom::CameraFrame;

#[derive(Clone, Copy, Debug)]
pub struct DetectorConfig {
    /// Orientation tolerance for region growing, radians.
    pub angle_tolerance: f64,
    /// Segments shorter than this (pixels) are discarded.
    pub min_length: f64,
    /// Regions with fewer pixels are discarded.
    pub min_region: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            angle_tolerance: 22.5f64.to_radians(),
            min_length: 20.0,
            min_region: 10,
        }
    }
}

/// Reads a binary PGM (P5) as 8-bit grayscale.
pub fn load_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    if reader.format() != Some(ImageFormat::Pnm) {
        return Err(Error::UnsupportedRaster(format!(
            "{}: expected a PGM raster",
            path.display()
        )));
    }
    let img = reader
        .decode()
        .map_err(|e| Error::UnsupportedRaster(format!("{}: {e}", path.display())))?;
    Ok(img.to_luma8())
}

struct Gradient {
    width: usize,
    height: usize,
    magnitude: Vec<f64>,
    /// Gradient orientation folded into `[0, pi)`.
    orientation: Vec<f64>,
}

fn sobel(image: &GrayImage) -> Gradient {
    let (w, h) = (image.width() as usize, image.height() as usize);
    let px = |x: usize, y: usize| image.get_pixel(x as u32, y as u32)[0] as f64;
    let mut magnitude = vec![0.0; w * h];
    let mut orientation = vec![0.0; w * h];
    for y in 1..h.saturating_sub(1) {
        for x in 1..w.saturating_sub(1) {
            let gx = px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1)
                - px(x - 1, y - 1)
                - 2.0 * px(x - 1, y)
                - px(x - 1, y + 1);
            let gy = px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1)
                - px(x - 1, y - 1)
                - 2.0 * px(x, y - 1)
                - px(x + 1, y - 1);
            let i = y * w + x;
            magnitude[i] = (gx * gx + gy * gy).sqrt();
            orientation[i] = gy.atan2(gx).rem_euclid(PI);
        }
    }
    Gradient {
        width: w,
        height: h,
        magnitude,
        orientation,
    }
}

/// Otsu threshold over a 256-bin histogram of `values` in `[0, max]`.
fn otsu_threshold(values: &[f64]) -> Option<f64> {
    let max = values.iter().cloned().fold(0.0, f64::max);
    if !(max > 0.0) {
        return None;
    }
    const BINS: usize = 256;
    let mut hist = [0usize; BINS];
    for &v in values {
        let b = ((v / max) * (BINS - 1) as f64).round() as usize;
        hist[b.min(BINS - 1)] += 1;
    }
    let total = values.len() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| i as f64 * c as f64).sum();
    let (mut w0, mut sum0) = (0.0, 0.0);
    let (mut best, mut best_var) = (0usize, -1.0);
    for (i, &c) in hist.iter().enumerate() {
        w0 += c as f64;
        sum0 += i as f64 * c as f64;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let m0 = sum0 / w0;
        let m1 = (sum_all - sum0) / w1;
        let var = w0 * w1 * (m0 - m1) * (m0 - m1);
        if var > best_var {
            best_var = var;
            best = i;
        }
    }
    Some((best as f64 + 0.5) / (BINS - 1) as f64 * max)
}

fn orientation_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

/// Least-squares line through weighted pixels; returns endpoints.
fn fit_region(grad: &Gradient, pixels: &[usize]) -> Option<((f64, f64), (f64, f64), f64)> {
    let w = grad.width;
    let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for &i in pixels {
        let m = grad.magnitude[i];
        sw += m;
        sx += m * (i % w) as f64;
        sy += m * (i / w) as f64;
    }
    let (cx, cy) = (sx / sw, sy / sw);
    let (mut cxx, mut cxy, mut cyy) = (0.0, 0.0, 0.0);
    for &i in pixels {
        let m = grad.magnitude[i];
        let dx = (i % w) as f64 - cx;
        let dy = (i / w) as f64 - cy;
        cxx += m * dx * dx;
        cxy += m * dx * dy;
        cyy += m * dy * dy;
    }
    let theta = 0.5 * (2.0 * cxy).atan2(cxx - cyy);
    let (dx, dy) = (theta.cos(), theta.sin());
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut spread = 0.0;
    for &i in pixels {
        let px = (i % w) as f64 - cx;
        let py = (i / w) as f64 - cy;
        let t = px * dx + py * dy;
        lo = lo.min(t);
        hi = hi.max(t);
        spread += grad.magnitude[i] * (px * dy - py * dx).powi(2);
    }
    let width = (spread / sw).sqrt();
    Some(((cx + lo * dx, cy + lo * dy), (cx + hi * dx, cy + hi * dy), width))
}

pub fn detect_segments(
    image: &GrayImage,
    frame: CameraFrame,
    config: &DetectorConfig,
) -> Result<SegmentSet> {
    if image.width() as f64 != frame.width || image.height() as f64 != frame.height {
        return Err(Error::InvalidArgument(format!(
            "raster is {}x{} but frame is {}x{}",
            image.width(),
            image.height(),
            frame.width,
            frame.height
        )));
    }
    let grad = sobel(image);
    let Some(threshold) = otsu_threshold(&grad.magnitude) else {
        return Ok(SegmentSet::new(frame));
    };
    let (w, h) = (grad.width, grad.height);

    let mut seeds: Vec<usize> = (0..w * h)
        .filter(|&i| grad.magnitude[i] > threshold)
        .collect();
    // Stable sort keeps the order deterministic for equal magnitudes.
    seeds.sort_by(|&a, &b| grad.magnitude[b].total_cmp(&grad.magnitude[a]));

    let mut used = vec![false; w * h];
    let mut segments = Vec::new();
    let mut queue = VecDeque::new();
    for seed in seeds {
        if used[seed] {
            continue;
        }
        used[seed] = true;
        let mut region = vec![seed];
        let (mut c2, mut s2) = (
            (2.0 * grad.orientation[seed]).cos(),
            (2.0 * grad.orientation[seed]).sin(),
        );
        queue.clear();
        queue.push_back(seed);
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            let region_angle = 0.5 * s2.atan2(c2);
            for dy in -1..=1isize {
                for dx in -1..=1isize {
                    let (nx, ny) = (x + dx, y + dy);
                    if (dx == 0 && dy == 0) || nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if used[j] || grad.magnitude[j] <= threshold {
                        continue;
                    }
                    if orientation_diff(grad.orientation[j], region_angle) > config.angle_tolerance {
                        continue;
                    }
                    used[j] = true;
                    region.push(j);
                    c2 += (2.0 * grad.orientation[j]).cos();
                    s2 += (2.0 * grad.orientation[j]).sin();
                    queue.push_back(j);
                }
            }
        }
        if region.len() < config.min_region {
            continue;
        }
        let Some((a, b, width)) = fit_region(&grad, &region) else {
            continue;
        };
        let length = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
        if length < config.min_length || width > 0.25 * length {
            continue;
        }
        let clamp = |p: (f64, f64)| (p.0.clamp(0.0, frame.width), p.1.clamp(0.0, frame.height));
        if let Ok(s) = LineSegment::new(&frame, clamp(a), clamp(b)) {
            segments.push(s);
        }
    }
    Ok(SegmentSet { frame, segments })
}
