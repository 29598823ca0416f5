//! Synthetic scenes with known zenith, horizon and horizontal VPs.
//!
//! A pinhole camera with the given horizontal FOV, pitch and roll looks at
//! families of parallel world lines (one vertical, the rest horizontal at
//! distinct azimuths). Finite pieces of those lines are projected and
//! clipped to the image, then endpoint noise and random outlier chords are
//! added. Geometry, noise and outliers use separate random streams, so a
//! noise ladder over one seed shares the same underlying segments.

use std::f64::consts::PI;
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{GrayImage, Luma};
use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{DatasetItem, GroundTruth};
use crate::geom::{CameraFrame, ImageLine, SphereLine, SpherePoint};
use crate::hvp::derive_seed;
use crate::prior::{CategoricalPrior, HorizonParam, PRIOR_BINS};
use crate::segments::{LineSegment, Pixel, SegmentSet};

const MIN_SEGMENT_PX: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutlierMode {
    /// Chords with uniform position and orientation.
    #[default]
    Random,
    /// Chords through one false intersection off the horizon.
    Adversarial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    /// Horizontal line families; zero gives a vertical-only scene.
    pub n_families: usize,
    pub segments_per_family: usize,
    /// Vertical family size; defaults to `segments_per_family`.
    pub vertical_segments: Option<usize>,
    /// Fraction of outliers in the final segment set, in `[0, 1)`.
    pub outlier_fraction: f64,
    pub outlier_mode: OutlierMode,
    pub endpoint_noise_px: f64,
    /// Horizontal field of view, degrees.
    pub fov: f64,
    pub pitch: f64,
    pub roll: f64,
    /// Azimuth of the first horizontal family relative to the view
    /// direction, degrees; random when absent.
    pub yaw: Option<f64>,
    pub width: f64,
    pub height: f64,
    pub seed: u64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            n_families: 2,
            segments_per_family: 32,
            vertical_segments: None,
            outlier_fraction: 0.2,
            outlier_mode: OutlierMode::Random,
            endpoint_noise_px: 0.5,
            fov: 60.0,
            pitch: 0.0,
            roll: 0.0,
            yaw: None,
            width: 640.0,
            height: 480.0,
            seed: 0,
        }
    }
}

impl SceneSpec {
    /// Camera drawn like casual photographs: FOV ~ N(60, 10) in [40, 80],
    /// pitch ~ N(0, 10) in [-30, 30], roll ~ N(0, 5) in [-20, 20].
    pub fn with_random_camera(mut self, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xCA3E));
        let mut truncated = |mean: f64, std: f64, lo: f64, hi: f64| loop {
            let x: f64 = Normal::new(mean, std).expect("std > 0").sample(&mut rng);
            if (lo..=hi).contains(&x) {
                break x;
            }
        };
        self.fov = truncated(60.0, 10.0, 40.0, 80.0);
        self.pitch = truncated(0.0, 10.0, -30.0, 30.0);
        self.roll = truncated(0.0, 5.0, -20.0, 20.0);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Family {
    pub vp: SpherePoint,
    pub vertical: bool,
    pub segment_ids: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticScene {
    pub frame: CameraFrame,
    pub fov: f64,
    pub pitch: f64,
    pub roll: f64,
    pub gt_horizon: SphereLine,
    pub gt_horizon_image: ImageLine,
    pub gt_zenith: SpherePoint,
    pub families: Vec<Family>,
    pub outlier_ids: Vec<usize>,
    pub segments: SegmentSet,
}

impl SyntheticScene {
    pub fn horizontal_vps(&self) -> Vec<SpherePoint> {
        self.families
            .iter()
            .filter(|f| !f.vertical)
            .map(|f| f.vp)
            .collect()
    }

    pub fn ground_truth(&self) -> GroundTruth {
        GroundTruth {
            width: self.frame.width,
            height: self.frame.height,
            horizon: self.gt_horizon_image.to_array(),
            zenith: Some(self.gt_zenith.to_array()),
            vps: self.horizontal_vps().iter().map(|p| p.to_array()).collect(),
        }
    }

    /// Horizon parameters of the ground truth.
    pub fn gt_param(&self) -> HorizonParam {
        HorizonParam::from_sphere_line(&self.frame, &self.gt_horizon)
            .expect("ground-truth horizon is a finite line")
    }
}

struct Camera {
    focal: f64,
    frame: CameraFrame,
    /// World to camera.
    rotation: Matrix3<f64>,
}

fn rot_x(t: f64) -> Matrix3<f64> {
    let (s, c) = t.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, s, 0.0, -s, c)
}

fn rot_z(t: f64) -> Matrix3<f64> {
    let (s, c) = t.sin_cos();
    Matrix3::new(c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0)
}

impl Camera {
    /// World frame: x east, y north, z up. Camera: x right, y down,
    /// z forward, looking north before pitch and roll. Positive pitch looks
    /// up; positive roll tilts the horizon to negative image slope.
    fn new(fov_deg: f64, pitch_deg: f64, roll_deg: f64, frame: CameraFrame) -> Result<Self> {
        if !(fov_deg > 0.0 && fov_deg < 180.0) {
            return Err(Error::InvalidArgument(format!("fov must be in (0, 180), got {fov_deg}")));
        }
        if !(pitch_deg.abs() < 90.0) {
            return Err(Error::InvalidArgument(format!("|pitch| must be < 90, got {pitch_deg}")));
        }
        let focal = frame.width / 2.0 / (fov_deg.to_radians() / 2.0).tan();
        let base = Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0);
        let rotation = rot_z(roll_deg.to_radians()) * rot_x(pitch_deg.to_radians()) * base;
        Ok(Self {
            focal,
            frame,
            rotation,
        })
    }

    fn project(&self, x: &Vector3<f64>) -> Option<Pixel> {
        if x.z <= 1e-6 {
            return None;
        }
        let (cu, cv) = self.frame.principal_point;
        Some((cu + self.focal * x.x / x.z, cv + self.focal * x.y / x.z))
    }

    fn back_project(&self, p: Pixel, depth: f64) -> Vector3<f64> {
        let (cu, cv) = self.frame.principal_point;
        Vector3::new((p.0 - cu) / self.focal, (p.1 - cv) / self.focal, 1.0) * depth
    }

    /// Sphere point of a camera-frame direction.
    fn sphere_point(&self, d: &Vector3<f64>) -> SpherePoint {
        let s = self.frame.rho * self.focal;
        SpherePoint::new(Vector3::new(s * d.x, s * d.y, d.z))
            .expect("non-zero direction")
            .canonical()
    }

    /// Sphere line of the image of the camera-frame plane with normal `n`.
    fn sphere_line(&self, n: &Vector3<f64>) -> SphereLine {
        let s = self.frame.rho * self.focal;
        SphereLine::new(Vector3::new(n.x / s, n.y / s, n.z))
            .expect("non-zero normal")
            .canonical()
    }

    fn up(&self) -> Vector3<f64> {
        self.rotation * Vector3::z()
    }

    fn horizon_image(&self) -> ImageLine {
        let n = self.up();
        let (cu, cv) = self.frame.principal_point;
        let f = self.focal;
        ImageLine::new(n.x / f, n.y / f, n.z - cu * n.x / f - cv * n.y / f)
    }
}

/// Vanishing line of the world's horizontal planes in pixel coordinates.
pub fn horizon_from_camera(fov: f64, pitch: f64, roll: f64, frame: &CameraFrame) -> Result<ImageLine> {
    Ok(Camera::new(fov, pitch, roll, *frame)?.horizon_image())
}

/// Liang-Barsky clip of segment `a`-`b` to `[0, w] x [0, h]`.
fn clip(a: Pixel, b: Pixel, w: f64, h: f64) -> Option<(Pixel, Pixel)> {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [(-dx, a.0), (dx, w - a.0), (-dy, a.1), (dy, h - a.1)] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    if t0 > t1 {
        return None;
    }
    Some((
        (a.0 + t0 * dx, a.1 + t0 * dy),
        (a.0 + t1 * dx, a.1 + t1 * dy),
    ))
}

fn seg_len(a: Pixel, b: Pixel) -> f64 {
    ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt()
}

/// One clipped projection of a world-parallel line piece.
fn family_segment(cam: &Camera, dir: &Vector3<f64>, rng: &mut ChaCha8Rng) -> Option<(Pixel, Pixel)> {
    let (w, h) = (cam.frame.width, cam.frame.height);
    for _ in 0..200 {
        let anchor = (rng.random_range(0.0..w), rng.random_range(0.0..h));
        let depth = rng.random_range(4.0..14.0);
        let len = rng.random_range(0.6..3.0);
        let p = cam.back_project(anchor, depth);
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let q = p + dir * (sign * len);
        let (Some(a), Some(b)) = (cam.project(&p), cam.project(&q)) else {
            continue;
        };
        if let Some((a, b)) = clip(a, b, w, h) {
            if seg_len(a, b) >= MIN_SEGMENT_PX {
                return Some((a, b));
            }
        }
    }
    None
}

fn random_chord(frame: &CameraFrame, through: Option<Pixel>, rng: &mut ChaCha8Rng) -> (Pixel, Pixel) {
    loop {
        let theta = rng.random_range(0.0..PI);
        let len = rng.random_range(MIN_SEGMENT_PX..150.0);
        let (d0, d1) = (theta.cos(), theta.sin());
        let center = match through {
            None => (rng.random_range(0.0..frame.width), rng.random_range(0.0..frame.height)),
            Some(p) => {
                let t = rng.random_range(-250.0..250.0);
                (p.0 + t * d0, p.1 + t * d1)
            }
        };
        let a = (center.0 - 0.5 * len * d0, center.1 - 0.5 * len * d1);
        let b = (center.0 + 0.5 * len * d0, center.1 + 0.5 * len * d1);
        if let Some((a, b)) = clip(a, b, frame.width, frame.height) {
            if seg_len(a, b) >= MIN_SEGMENT_PX {
                return (a, b);
            }
        }
    }
}

pub fn make_scene(spec: &SceneSpec) -> Result<SyntheticScene> {
    if !(0.0..1.0).contains(&spec.outlier_fraction) {
        return Err(Error::InvalidArgument(format!(
            "outlier_fraction must be in [0, 1), got {}",
            spec.outlier_fraction
        )));
    }
    if !(spec.endpoint_noise_px >= 0.0) {
        return Err(Error::InvalidArgument("endpoint noise must be >= 0".into()));
    }
    let frame = CameraFrame::new(spec.width, spec.height)?;
    let cam = Camera::new(spec.fov, spec.pitch, spec.roll, frame)?;
    let mut geo = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, 0));
    let mut noise_rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, 1));
    let mut outlier_rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, 2));

    // Family directions in world coordinates.
    let yaw0 = spec
        .yaw
        .map(f64::to_radians)
        .unwrap_or_else(|| geo.random_range(0.0..PI));
    let mut world_dirs = vec![(Vector3::z(), true)];
    let mut azimuths: Vec<f64> = Vec::new();
    for k in 0..spec.n_families {
        let az = match k {
            0 => yaw0,
            1 => yaw0 + PI / 2.0,
            _ => loop {
                let cand = yaw0 + geo.random_range(0.0..PI);
                let clear = azimuths.iter().all(|a| {
                    let d = (cand - a).rem_euclid(PI);
                    d.min(PI - d) > 20f64.to_radians()
                });
                if clear {
                    break cand;
                }
            },
        };
        azimuths.push(az);
        world_dirs.push((Vector3::new(az.cos(), az.sin(), 0.0), false));
    }

    let mut endpoints: Vec<(Pixel, Pixel)> = Vec::new();
    let mut families = Vec::new();
    for (wd, vertical) in world_dirs {
        let dir = cam.rotation * wd;
        let count = if vertical {
            spec.vertical_segments.unwrap_or(spec.segments_per_family)
        } else {
            spec.segments_per_family
        };
        let mut ids = Vec::new();
        for _ in 0..count {
            if let Some(seg) = family_segment(&cam, &dir, &mut geo) {
                ids.push(endpoints.len());
                endpoints.push(seg);
            }
        }
        families.push(Family {
            vp: cam.sphere_point(&dir),
            vertical,
            segment_ids: ids,
        });
    }

    let n_true = endpoints.len();
    let n_out = (spec.outlier_fraction * n_true as f64 / (1.0 - spec.outlier_fraction)).round() as usize;
    let gt_image = cam.horizon_image();
    let false_vp = match spec.outlier_mode {
        OutlierMode::Random => None,
        OutlierMode::Adversarial => {
            let u = outlier_rng.random_range(0.2 * frame.width..0.8 * frame.width);
            let v_h = gt_image.v_at(u);
            let shift = outlier_rng.random_range(60.0..150.0);
            let v = if v_h - shift > 0.0 { v_h - shift } else { v_h + shift };
            Some((u, v.clamp(0.0, frame.height)))
        }
    };
    let mut outlier_ids = Vec::new();
    for _ in 0..n_out {
        outlier_ids.push(endpoints.len());
        endpoints.push(random_chord(&frame, false_vp, &mut outlier_rng));
    }

    let sigma = spec.endpoint_noise_px;
    let noise = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).expect("sigma >= 0");
    let mut segments = Vec::with_capacity(endpoints.len());
    for (a, b) in endpoints {
        let mut jitter = |p: Pixel| {
            if sigma > 0.0 {
                (
                    (p.0 + noise.sample(&mut noise_rng)).clamp(0.0, frame.width),
                    (p.1 + noise.sample(&mut noise_rng)).clamp(0.0, frame.height),
                )
            } else {
                p
            }
        };
        let (a, b) = (jitter(a), jitter(b));
        segments.push(LineSegment::new(&frame, a, b)?);
    }

    Ok(SyntheticScene {
        frame,
        fov: spec.fov,
        pitch: spec.pitch,
        roll: spec.roll,
        gt_horizon: cam.sphere_line(&cam.up()),
        gt_horizon_image: gt_image,
        gt_zenith: cam.sphere_point(&cam.up()),
        families,
        outlier_ids,
        segments: SegmentSet { frame, segments },
    })
}

/// Context prior whose center is the truth displaced by one draw of the
/// stated spreads, discretized into the file format.
pub fn synthetic_prior(
    scene: &SyntheticScene,
    sigma_offset: f64,
    sigma_alpha: f64,
    seed: u64,
) -> Result<CategoricalPrior> {
    let truth = scene.gt_param();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xB10C));
    let da: f64 = Normal::new(0.0, sigma_alpha).map_err(|e| Error::InvalidArgument(e.to_string()))?.sample(&mut rng);
    let doff: f64 = Normal::new(0.0, sigma_offset).map_err(|e| Error::InvalidArgument(e.to_string()))?.sample(&mut rng);
    // Rotate about the point of the true horizon nearest the principal point.
    let center = HorizonParam::new(truth.alpha + da, truth.offset + doff);
    CategoricalPrior::from_gaussians(
        center.alpha,
        sigma_alpha,
        center.offset,
        sigma_offset,
        scene.frame.height,
        PRIOR_BINS,
    )
}

/// Renders anti-aliased white segments on black.
pub fn render_segments(width: u32, height: u32, segments: &[(Pixel, Pixel)], half_width: f64) -> GrayImage {
    let mut img = GrayImage::new(width, height);
    for (y, x, px) in img
        .enumerate_pixels_mut()
        .map(|(x, y, p)| (y as f64 + 0.5, x as f64 + 0.5, p))
    {
        let mut best = 0.0f64;
        for &(a, b) in segments {
            let (dx, dy) = (b.0 - a.0, b.1 - a.1);
            let len2 = dx * dx + dy * dy;
            let t = (((x - a.0) * dx + (y - a.1) * dy) / len2).clamp(0.0, 1.0);
            let d = ((x - a.0 - t * dx).powi(2) + (y - a.1 - t * dy).powi(2)).sqrt();
            best = best.max((1.0 - (d - half_width)).clamp(0.0, 1.0));
        }
        *px = Luma([(best * 255.0).round() as u8]);
    }
    img
}

/// Writes a binary (P5) PGM.
pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let enc = PnmEncoder::new(std::io::BufWriter::new(file))
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary));
    img.write_with_encoder(enc)
        .map_err(|e| Error::UnsupportedRaster(format!("{}: {e}", path.display())))
}

/// Writes the segment file, ground truth and, if given, the prior of one
/// scene into the dataset directory `dir`.
pub fn export_scene(
    scene: &SyntheticScene,
    dir: impl AsRef<Path>,
    id: &str,
    prior: Option<&CategoricalPrior>,
) -> Result<()> {
    let item = DatasetItem::new(dir.as_ref(), id);
    scene.segments.save(&item.segments)?;
    scene.ground_truth().save(&item.ground_truth)?;
    if let Some(p) = prior {
        p.save(&item.prior)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::consistency;
    use approx::assert_abs_diff_eq;

    fn frame() -> CameraFrame {
        CameraFrame::new(640.0, 480.0).unwrap()
    }

    #[test]
    fn level_camera_horizon_through_center() {
        let l = horizon_from_camera(60.0, 0.0, 0.0, &frame()).unwrap();
        assert_abs_diff_eq!(l.v_at(0.0), 240.0, epsilon = 1e-9);
        assert_abs_diff_eq!(l.v_at(640.0), 240.0, epsilon = 1e-9);
    }

    #[test]
    fn pitch_moves_horizon_by_focal_tangent() {
        let f = frame();
        let l = horizon_from_camera(60.0, 10.0, 0.0, &f).unwrap();
        let focal = 320.0 / 30f64.to_radians().tan();
        let expected = 240.0 + focal * 10f64.to_radians().tan();
        assert_abs_diff_eq!(l.v_at(320.0), expected, epsilon = 1e-9);
        assert_abs_diff_eq!(l.v_at(0.0), l.v_at(640.0), epsilon = 1e-9);

        // distant horizontal points project onto the same line
        let cam = Camera::new(60.0, 10.0, 0.0, f).unwrap();
        for az in [-0.4f64, 0.0, 0.3] {
            let far = cam.rotation * Vector3::new(1e7 * az.sin(), 1e7 * az.cos(), 1.6);
            let (u, v) = cam.project(&far).unwrap();
            assert_abs_diff_eq!(v, l.v_at(u), epsilon = 1e-4);
        }
    }

    #[test]
    fn roll_tilts_horizon_oppositely() {
        for roll in [10.0f64, -7.0] {
            let l = horizon_from_camera(60.0, 0.0, roll, &frame()).unwrap();
            let (m, _) = l.slope_intercept().unwrap();
            assert_abs_diff_eq!(m.atan().to_degrees(), -roll, epsilon = 1e-9);
            assert_abs_diff_eq!(l.v_at(320.0), 240.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn vps_lie_on_horizon_and_noiseless_segments_pass_through() {
        let spec = SceneSpec {
            endpoint_noise_px: 0.0,
            pitch: 8.0,
            roll: -5.0,
            n_families: 3,
            seed: 42,
            ..SceneSpec::default()
        };
        let scene = make_scene(&spec).unwrap();
        let theta = 2f64.to_radians();
        for fam in &scene.families {
            if !fam.vertical {
                assert!(fam.vp.dot(&scene.gt_horizon).abs() < 1e-9);
            }
            assert!(!fam.segment_ids.is_empty());
            for &i in &fam.segment_ids {
                let c = consistency(&fam.vp, &scene.segments.segments[i].line, theta);
                assert_abs_diff_eq!(c, theta, epsilon = 1e-9);
            }
        }
        assert!(angle_to_line(&scene.gt_zenith, &scene.gt_horizon) > 1.0);
    }

    fn angle_to_line(p: &SpherePoint, l: &SphereLine) -> f64 {
        crate::geom::point_line_angle(p, l)
    }

    #[test]
    fn counts_and_determinism() {
        let spec = SceneSpec {
            outlier_fraction: 0.5,
            seed: 3,
            ..SceneSpec::default()
        };
        let a = make_scene(&spec).unwrap();
        let b = make_scene(&spec).unwrap();
        assert_eq!(a, b);
        let n_true: usize = a.families.iter().map(|f| f.segment_ids.len()).sum();
        assert_eq!(n_true, 96);
        assert_eq!(a.outlier_ids.len(), 96);
        assert_eq!(a.segments.len(), 192);
    }

    #[test]
    fn noise_ladder_shares_geometry() {
        let base = SceneSpec {
            seed: 5,
            endpoint_noise_px: 0.0,
            ..SceneSpec::default()
        };
        let clean = make_scene(&base).unwrap();
        let noisy = make_scene(&SceneSpec {
            endpoint_noise_px: 1.0,
            ..base
        })
        .unwrap();
        assert_eq!(clean.segments.len(), noisy.segments.len());
        let max_shift = clean
            .segments
            .segments
            .iter()
            .zip(&noisy.segments.segments)
            .map(|(a, b)| seg_len(a.p1, b.p1))
            .fold(0.0, f64::max);
        assert!(max_shift > 0.0 && max_shift < 8.0);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(make_scene(&SceneSpec { fov: 0.0, ..SceneSpec::default() }).is_err());
        assert!(make_scene(&SceneSpec { outlier_fraction: 1.0, ..SceneSpec::default() }).is_err());
        assert!(make_scene(&SceneSpec { width: 0.0, ..SceneSpec::default() }).is_err());
    }

    #[test]
    fn adversarial_outliers_share_a_point() {
        let scene = make_scene(&SceneSpec {
            outlier_mode: OutlierMode::Adversarial,
            endpoint_noise_px: 0.0,
            seed: 9,
            ..SceneSpec::default()
        })
        .unwrap();
        let lines: Vec<_> = scene.outlier_ids.iter().map(|&i| scene.segments.segments[i].line).collect();
        let p = crate::geom::meet(&lines[0], &lines[1]).unwrap();
        for l in &lines {
            assert!(crate::geom::point_line_angle(&p, l) < 1e-6);
        }
        assert!(crate::geom::point_line_angle(&p, &scene.gt_horizon) > 1e-3);
    }

    #[test]
    fn random_camera_in_ranges() {
        for s in 0..50 {
            let spec = SceneSpec::default().with_random_camera(s);
            assert!((40.0..=80.0).contains(&spec.fov));
            assert!(spec.pitch.abs() <= 30.0);
            assert!(spec.roll.abs() <= 20.0);
        }
    }

    #[test]
    fn prior_centers_near_truth() {
        let scene = make_scene(&SceneSpec { seed: 1, roll: 4.0, pitch: -6.0, ..SceneSpec::default() }).unwrap();
        let cat = synthetic_prior(&scene, 5.0, 2f64.to_radians(), 1).unwrap();
        let mode = crate::prior::categorical_mode(&cat, 480.0);
        let truth = scene.gt_param();
        assert!((mode.alpha - truth.alpha).abs() < 8f64.to_radians());
        assert!((mode.offset - truth.offset).abs() < 25.0);
    }
}
