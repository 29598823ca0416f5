//! Calibrated homogeneous coordinates on the unit sphere.
//!
//! Image points are recentered on the principal point, scaled by `rho` and
//! lifted to unit 3-vectors. Image lines are the unit normals of the planes
//! they span with the origin, so points and lines share one representation
//! and joins/meets are both normalized cross products.
//!
//! Homogeneous vectors are sign-ambiguous. Every angle here is therefore
//! measured between the *undirected* axes, which keeps all thresholds
//! invariant under negation.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cross-product norms below this are treated as parallel/antipodal.
pub const DEGENERATE_EPS: f64 = 1e-12;

/// Pinhole frame with the calibration-free scaling used for lifting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraFrame {
    pub width: f64,
    pub height: f64,
    pub principal_point: (f64, f64),
    pub rho: f64,
}

impl CameraFrame {
    /// Frame with the principal point at the image center and
    /// `rho = 2 / max(height, width)`.
    pub fn new(width: f64, height: f64) -> Result<Self> {
        if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "frame dimensions must be positive, got {width}x{height}"
            )));
        }
        Ok(Self {
            width,
            height,
            principal_point: (width / 2.0, height / 2.0),
            rho: 2.0 / width.max(height),
        })
    }

    pub fn with_principal_point(mut self, cu: f64, cv: f64) -> Self {
        self.principal_point = (cu, cv);
        self
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    /// The lifted principal point, `(0, 0, 1)`.
    pub fn principal_lift(&self) -> SpherePoint {
        SpherePoint(Vector3::z())
    }
}

/// A homogeneous image point, stored as a unit vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpherePoint(pub(crate) Vector3<f64>);

/// A homogeneous image line (unit plane normal).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SphereLine(pub(crate) Vector3<f64>);

macro_rules! unit_vector_impl {
    ($ty:ident) => {
        impl $ty {
            /// Normalizes `v`; fails on a zero or non-finite vector.
            pub fn new(v: Vector3<f64>) -> Result<Self> {
                let n = v.norm();
                if !n.is_finite() || n < DEGENERATE_EPS {
                    return Err(Error::DegenerateGeometry(format!(
                        "cannot normalize vector {:?}",
                        v.as_slice()
                    )));
                }
                Ok(Self(v / n))
            }

            pub fn from_array(v: [f64; 3]) -> Result<Self> {
                Self::new(Vector3::from(v))
            }

            pub fn coords(&self) -> &Vector3<f64> {
                &self.0
            }

            pub fn to_array(&self) -> [f64; 3] {
                [self.0.x, self.0.y, self.0.z]
            }

            pub fn dot<T: AsRef<Vector3<f64>>>(&self, other: &T) -> f64 {
                self.0.dot(other.as_ref())
            }

            /// Same vector with the sign convention applied.
            pub fn canonical(self) -> Self {
                Self(canonicalize(self.0))
            }
        }

        impl AsRef<Vector3<f64>> for $ty {
            fn as_ref(&self) -> &Vector3<f64> {
                &self.0
            }
        }
    };
}

unit_vector_impl!(SpherePoint);
unit_vector_impl!(SphereLine);

/// Flips `v` so that its last non-zero component (z, then y, then x) is
/// non-negative.
pub fn canonicalize(v: Vector3<f64>) -> Vector3<f64> {
    let flip = if v.z != 0.0 {
        v.z < 0.0
    } else if v.y != 0.0 {
        v.y < 0.0
    } else {
        v.x < 0.0
    };
    if flip {
        -v
    } else {
        v
    }
}

fn normalized_cross(a: &Vector3<f64>, b: &Vector3<f64>) -> Result<Vector3<f64>> {
    let c = a.cross(b);
    let n = c.norm();
    if !(n > DEGENERATE_EPS) {
        return Err(Error::DegenerateGeometry(format!(
            "parallel or antipodal pair (cross norm {n:e})"
        )));
    }
    Ok(canonicalize(c / n))
}

/// Lifts pixel `(u, v)` to `[rho (u - c_u), rho (v - c_v), 1] / norm`.
pub fn lift_point(frame: &CameraFrame, u: f64, v: f64) -> Result<SpherePoint> {
    if !(u.is_finite() && v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "non-finite pixel ({u}, {v})"
        )));
    }
    let (cu, cv) = frame.principal_point;
    let p = Vector3::new(frame.rho * (u - cu), frame.rho * (v - cv), 1.0);
    Ok(SpherePoint(p / p.norm()))
}

/// Inverse of [`lift_point`]; `None` for points at infinity or behind the
/// image plane.
pub fn unlift_point(frame: &CameraFrame, p: &SpherePoint) -> Option<(f64, f64)> {
    let q = p.0;
    if q.z.abs() < DEGENERATE_EPS {
        return None;
    }
    let (cu, cv) = frame.principal_point;
    Some((q.x / q.z / frame.rho + cu, q.y / q.z / frame.rho + cv))
}

/// Line through two points.
pub fn join(p1: &SpherePoint, p2: &SpherePoint) -> Result<SphereLine> {
    normalized_cross(&p1.0, &p2.0).map(SphereLine)
}

/// Intersection of two lines.
pub fn meet(l1: &SphereLine, l2: &SphereLine) -> Result<SpherePoint> {
    normalized_cross(&l1.0, &l2.0).map(SpherePoint)
}

/// Smallest angle between the axes of two unit vectors, in `[0, pi/2]`.
/// Equal to `acos |x.y|`; the atan2 form stays accurate near zero.
pub fn angle(x: &Vector3<f64>, y: &Vector3<f64>) -> f64 {
    x.cross(y).norm().atan2(x.dot(y).abs())
}

/// Angular distance from a point to the great circle of a line, in
/// `[0, pi/2]`. Zero iff the point lies on the line.
pub fn point_line_angle(p: &SpherePoint, l: &SphereLine) -> f64 {
    p.0.dot(&l.0).abs().min(1.0).asin()
}

/// `max(theta_con - angle(p, l), 0)`, peaking at `theta_con` when the line
/// can be extended through the point.
pub fn consistency(p: &SpherePoint, l: &SphereLine, theta_con: f64) -> f64 {
    (theta_con - point_line_angle(p, l)).max(0.0)
}

/// Image line `a u + b v + c = 0` in pixel coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageLine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl ImageLine {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn from_sphere(frame: &CameraFrame, l: &SphereLine) -> Self {
        let (cu, cv) = frame.principal_point;
        let rho = frame.rho;
        let n = l.0;
        Self {
            a: n.x * rho,
            b: n.y * rho,
            c: n.z - n.x * rho * cu - n.y * rho * cv,
        }
    }

    pub fn to_sphere(&self, frame: &CameraFrame) -> Result<SphereLine> {
        let (cu, cv) = frame.principal_point;
        let rho = frame.rho;
        SphereLine::new(Vector3::new(
            self.a / rho,
            self.b / rho,
            self.a * cu + self.b * cv + self.c,
        ))
        .map(SphereLine::canonical)
    }

    pub fn is_vertical(&self) -> bool {
        self.b.abs() <= 1e-12 * self.a.abs().max(self.c.abs()).max(1e-300)
    }

    /// Row `v` of the line at column `u`; infinite for vertical lines.
    pub fn v_at(&self, u: f64) -> f64 {
        if self.is_vertical() {
            return f64::INFINITY;
        }
        -(self.a * u + self.c) / self.b
    }

    /// `(m, b)` of `v = m u + b`, if the line is not vertical.
    pub fn slope_intercept(&self) -> Option<(f64, f64)> {
        if self.is_vertical() {
            None
        } else {
            Some((-self.a / self.b, -self.c / self.b))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn v(x: f64, y: f64, z: f64) -> Vector3<f64> {
        Vector3::new(x, y, z)
    }

    #[test]
    fn frame_defaults() {
        let f = CameraFrame::new(640.0, 480.0).unwrap();
        assert_eq!(f.principal_point, (320.0, 240.0));
        assert_abs_diff_eq!(f.rho, 2.0 / 640.0);
        assert!(CameraFrame::new(0.0, 480.0).is_err());
        assert!(CameraFrame::new(640.0, -1.0).is_err());
    }

    #[test]
    fn lift_principal_point_is_pole() {
        let f = CameraFrame::new(640.0, 480.0).unwrap();
        let p = lift_point(&f, 320.0, 240.0).unwrap();
        assert_abs_diff_eq!(p.0, v(0.0, 0.0, 1.0), epsilon = 1e-15);
    }

    #[test]
    fn lift_unit_scaled_point() {
        let f = CameraFrame::new(640.0, 480.0).unwrap();
        let p = lift_point(&f, 640.0, 240.0).unwrap();
        let s = 0.5f64.sqrt();
        assert_abs_diff_eq!(p.0, v(s, 0.0, s), epsilon = 1e-12);
    }

    #[test]
    fn lift_matches_direct_arithmetic() {
        let f = CameraFrame::new(1024.0, 768.0).unwrap();
        let p = lift_point(&f, 100.0, 50.0).unwrap();
        let rho: f64 = 2.0 / 1024.0;
        let raw = [rho * (100.0 - 512.0), rho * (50.0 - 384.0), 1.0];
        let n = (raw[0] * raw[0] + raw[1] * raw[1] + raw[2] * raw[2]).sqrt();
        for i in 0..3 {
            assert_abs_diff_eq!(p.0[i], raw[i] / n, epsilon = 1e-15);
        }
        assert!(p.0.z > 0.0);
    }

    #[test]
    fn lift_rejects_non_finite() {
        let f = CameraFrame::new(640.0, 480.0).unwrap();
        assert!(matches!(
            lift_point(&f, f64::NAN, 0.0),
            Err(Error::InvalidArgument(_))
        ));
        assert!(lift_point(&f, 0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn join_canonical_basis() {
        let l = join(&SpherePoint(v(1.0, 0.0, 0.0)), &SpherePoint(v(0.0, 1.0, 0.0))).unwrap();
        assert_abs_diff_eq!(l.0, v(0.0, 0.0, 1.0));
        let s = 0.5f64.sqrt();
        let l = join(&SpherePoint(v(0.0, 0.0, 1.0)), &SpherePoint(v(s, 0.0, s))).unwrap();
        // plane y = 0; third component zero so the tie-break makes y >= 0
        assert_abs_diff_eq!(l.0, v(0.0, 1.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn join_lifted_pixels_matches_cross_product() {
        let f = CameraFrame::new(640.0, 480.0).unwrap();
        let a = lift_point(&f, 10.0, 20.0).unwrap();
        let b = lift_point(&f, 500.0, 300.0).unwrap();
        let l = join(&a, &b).unwrap();
        let (x, y) = (a.0, b.0);
        let c = [
            x[1] * y[2] - x[2] * y[1],
            x[2] * y[0] - x[0] * y[2],
            x[0] * y[1] - x[1] * y[0],
        ];
        let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        let sign = if c[2] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..3 {
            assert_abs_diff_eq!(l.0[i], sign * c[i] / n, epsilon = 1e-14);
        }
    }

    #[test]
    fn join_degenerate() {
        let p = SpherePoint(v(0.0, 0.0, 1.0));
        assert!(matches!(join(&p, &p), Err(Error::DegenerateGeometry(_))));
        assert!(join(&p, &SpherePoint(v(0.0, 0.0, -1.0))).is_err());
    }

    #[test]
    fn meet_basics() {
        let p = meet(&SphereLine(v(0.0, 0.0, 1.0)), &SphereLine(v(0.0, 1.0, 0.0))).unwrap();
        assert_abs_diff_eq!(p.0.x.abs(), 1.0);
        assert_abs_diff_eq!(p.0.y, 0.0);
        assert_abs_diff_eq!(p.0.z, 0.0);

        let f = CameraFrame::new(640.0, 480.0).unwrap();
        let p1 = lift_point(&f, 100.0, 100.0).unwrap();
        let p2 = lift_point(&f, 400.0, 120.0).unwrap();
        let p3 = lift_point(&f, 200.0, 460.0).unwrap();
        let q = meet(&join(&p1, &p2).unwrap(), &join(&p1, &p3).unwrap()).unwrap();
        assert_abs_diff_eq!(q.0.dot(&p1.0).abs(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn angle_cases() {
        let x = v(0.6, 0.0, 0.8);
        assert_abs_diff_eq!(angle(&x, &x), 0.0, epsilon = 1e-7);
        assert_abs_diff_eq!(angle(&x, &-x), 0.0, epsilon = 1e-7);
        assert_abs_diff_eq!(angle(&v(1.0, 0.0, 0.0), &v(0.0, 1.0, 0.0)), FRAC_PI_2);
        // Clamped: slightly super-unit dot products do not yield NaN.
        let y = x * (1.0 + 1e-15);
        assert!(angle(&x, &y).is_finite());
    }

    #[test]
    fn consistency_cases() {
        let theta_con = 2f64.to_radians();
        let l = SphereLine(v(0.0, 1.0, 0.0));
        let on = SpherePoint(v(0.6, 0.0, 0.8));
        assert_abs_diff_eq!(consistency(&on, &l, theta_con), theta_con);

        let one_deg = 1f64.to_radians();
        let p = SpherePoint(v(0.0, one_deg.sin(), one_deg.cos()));
        assert_abs_diff_eq!(consistency(&p, &l, theta_con), one_deg, epsilon = 1e-12);

        let far = SpherePoint(v(0.0, 0.1f64.sin(), 0.1f64.cos()));
        assert_eq!(consistency(&far, &l, theta_con), 0.0);
        assert!(consistency(&far, &l, theta_con) <= PI);
    }

    #[test]
    fn image_line_round_trip() {
        let f = CameraFrame::new(640.0, 480.0).unwrap();
        let a = lift_point(&f, 0.0, 200.0).unwrap();
        let b = lift_point(&f, 640.0, 260.0).unwrap();
        let l = join(&a, &b).unwrap();
        let img = ImageLine::from_sphere(&f, &l);
        assert_abs_diff_eq!(img.v_at(0.0), 200.0, epsilon = 1e-9);
        assert_abs_diff_eq!(img.v_at(640.0), 260.0, epsilon = 1e-9);
        let back = img.to_sphere(&f).unwrap();
        assert_abs_diff_eq!(back.0, l.0, epsilon = 1e-12);
        let (m, c) = img.slope_intercept().unwrap();
        assert_abs_diff_eq!(m, 60.0 / 640.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c, 200.0, epsilon = 1e-9);
    }

    #[test]
    fn vertical_image_line() {
        let l = ImageLine::new(1.0, 0.0, -100.0);
        assert!(l.is_vertical());
        assert!(l.v_at(0.0).is_infinite());
        assert!(l.slope_intercept().is_none());
    }
}
