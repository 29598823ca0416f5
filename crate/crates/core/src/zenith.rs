//! Zenith vanishing point: RANSAC over near-vertical segment pairs seeded by
//! the prior slope, then an algebraic least-squares fit on the inliers.

use nalgebra::{DMatrix, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geom::{consistency, join, meet, CameraFrame, SphereLine, SpherePoint};
use crate::linalg::smallest_right_singular;
use crate::params::AlgorithmParams;
use crate::prior::{map_alpha, HorizonPrior};
use crate::segments::{vertical_candidate_indices, SegmentSet};

/// Fraction of vertical candidates the best model must exceed.
pub const MIN_INLIER_FRACTION: f64 = 0.02;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZenithResult {
    pub zenith_vp: Option<SpherePoint>,
    pub zenith_dir: SphereLine,
    /// Indices into the input segment set.
    pub inlier_ids: Vec<usize>,
    /// Whether RANSAC ran (at least two vertical candidates).
    pub used_ransac: bool,
}

/// Image line through the principal point perpendicular to slope `alpha`.
pub fn zenith_direction_from_slope(alpha: f64) -> SphereLine {
    SphereLine::new(Vector3::new(alpha.cos(), alpha.sin(), 0.0))
        .expect("unit vector")
        .canonical()
}

/// Zenith direction implied by the prior's most likely slope.
///
/// Assumes a centered principal point, square pixels and no skew.
pub fn initial_zenith_direction(prior: &HorizonPrior, _frame: &CameraFrame) -> SphereLine {
    zenith_direction_from_slope(map_alpha(prior))
}

/// Least-squares point minimizing `sum (l_i . p)^2` over unit `p`.
pub fn algebraic_vp(lines: &[&SphereLine]) -> Option<SpherePoint> {
    if lines.len() < 2 {
        return None;
    }
    let mut a = DMatrix::zeros(lines.len(), 3);
    for (i, l) in lines.iter().enumerate() {
        a.row_mut(i).copy_from(&l.coords().transpose());
    }
    let (v, _) = smallest_right_singular(&a);
    SpherePoint::new(Vector3::new(v[0], v[1], v[2]))
        .ok()
        .map(SpherePoint::canonical)
}

fn inliers(set: &SegmentSet, ids: &[usize], p: &SpherePoint, theta_con: f64) -> Vec<usize> {
    ids.iter()
        .copied()
        .filter(|&i| consistency(p, &set.segments[i].line, theta_con) > 0.0)
        .collect()
}

pub fn detect_zenith(
    set: &SegmentSet,
    init_dir: &SphereLine,
    params: &AlgorithmParams,
    seed: u64,
) -> ZenithResult {
    let fallback = |used_ransac| ZenithResult {
        zenith_vp: None,
        zenith_dir: *init_dir,
        inlier_ids: Vec::new(),
        used_ransac,
    };
    let candidates = vertical_candidate_indices(set, init_dir, params.theta_ver);
    let n = candidates.len();
    if n < 2 {
        return fallback(false);
    }

    let total_pairs = n * (n - 1) / 2;
    let pairs: Vec<(usize, usize)> = if total_pairs <= params.ransac_budget {
        (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..params.ransac_budget)
            .map(|_| {
                let a = rng.random_range(0..n);
                let mut b = rng.random_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                (a, b)
            })
            .collect()
    };

    let mut best: Option<Vec<usize>> = None;
    for (a, b) in pairs {
        let la = &set.segments[candidates[a]].line;
        let lb = &set.segments[candidates[b]].line;
        let Ok(p) = meet(la, lb) else { continue };
        let ids = inliers(set, &candidates, &p, params.theta_con);
        if best.as_ref().map_or(true, |bst| ids.len() > bst.len()) {
            best = Some(ids);
        }
    }
    let Some(best) = best else {
        return fallback(true);
    };
    if (best.len() as f64) <= MIN_INLIER_FRACTION * n as f64 {
        return fallback(true);
    }

    let lines: Vec<&SphereLine> = best.iter().map(|&i| &set.segments[i].line).collect();
    let Some(z) = algebraic_vp(&lines) else {
        return fallback(true);
    };
    let inlier_ids = inliers(set, &candidates, &z, params.theta_con);
    let pole = SpherePoint::new(Vector3::z()).expect("unit");
    match join(&pole, &z) {
        Ok(dir) => ZenithResult {
            zenith_vp: Some(z),
            zenith_dir: dir,
            inlier_ids,
            used_ransac: true,
        },
        // Zenith at the principal point: direction undefined, keep the prior's.
        Err(_) => ZenithResult {
            zenith_vp: Some(z),
            zenith_dir: *init_dir,
            inlier_ids,
            used_ransac: true,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{angle, lift_point};
    use crate::prior::HorizonPrior;
    use crate::segments::LineSegment;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;

    fn frame() -> CameraFrame {
        CameraFrame::new(640.0, 480.0).unwrap()
    }

    #[test]
    fn zero_slope_gives_vertical_direction() {
        let d = zenith_direction_from_slope(0.0);
        assert_abs_diff_eq!(d.coords().x.abs(), 1.0);
        let prior = HorizonPrior::gaussian(0.0, 0.01, 0.0, 5.0).unwrap();
        assert_eq!(initial_zenith_direction(&prior, &frame()), d);
    }

    #[test]
    fn diagonal_slope() {
        let d = zenith_direction_from_slope(FRAC_PI_4);
        // direction along the image line is perpendicular to its normal (c, s)
        let v = d.coords();
        let dir = (-v.y, v.x);
        let ang = dir.1.atan2(dir.0).rem_euclid(std::f64::consts::PI).to_degrees();
        assert_abs_diff_eq!(ang, 135.0, epsilon = 1e-9);
    }

    #[test]
    fn random_slopes_are_perpendicular_to_horizon() {
        for k in 0..50 {
            let alpha = -1.5 + 3.0 * k as f64 / 50.0;
            let v = *zenith_direction_from_slope(alpha).coords();
            let dir = (-v.y, v.x);
            let horizon = (alpha.cos(), alpha.sin());
            assert!((dir.0 * horizon.0 + dir.1 * horizon.1).abs() < 1e-9);
            assert_abs_diff_eq!(v.z, 0.0);
        }
    }

    #[test]
    fn horizontal_segments_fall_back() {
        let fr = frame();
        let set = SegmentSet::from_endpoints(
            fr,
            (0..10).map(|i| ((10.0, 20.0 + 40.0 * i as f64), (600.0, 25.0 + 40.0 * i as f64))),
        )
        .unwrap();
        let init = zenith_direction_from_slope(0.0);
        let r = detect_zenith(&set, &init, &AlgorithmParams::default(), 1);
        assert!(!r.used_ransac);
        assert!(r.zenith_vp.is_none());
        assert_eq!(r.zenith_dir, init);
    }

    #[test]
    fn exact_family_recovers_zenith() {
        let fr = frame();
        let z = lift_point(&fr, 330.0, -3000.0).unwrap();
        let segs: Vec<_> = (0..30)
            .map(|i| {
                let u = 260.0 + 4.0 * i as f64;
                let bottom = lift_point(&fr, u, 460.0).unwrap();
                let l = join(&bottom, &z).unwrap();
                let img = crate::geom::ImageLine::from_sphere(&fr, &l);
                // u at v = 200 along the same line
                let u2 = -(img.b * 200.0 + img.c) / img.a;
                LineSegment::new(&fr, (u, 460.0), (u2, 200.0)).unwrap()
            })
            .collect();
        let set = SegmentSet { frame: fr, segments: segs };
        let r = detect_zenith(&set, &zenith_direction_from_slope(0.0), &AlgorithmParams::default(), 5);
        let vp = r.zenith_vp.unwrap();
        assert!(angle(vp.coords(), z.coords()) < 1e-6);
        assert_eq!(r.inlier_ids.len(), 30);
        assert!(r.zenith_dir.coords().dot(fr.principal_lift().coords()).abs() < 1e-9);
    }
}
