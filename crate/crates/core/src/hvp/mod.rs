//! Horizon-first search for horizontal vanishing points.
//!
//! Horizon candidates perpendicular to the zenith direction are drawn from
//! the offset prior. On each candidate, intersections with a random subset
//! of segments seed VPs, a maximum weighted independent set keeps a
//! well-separated subset, EM refinement moves them along the candidate and
//! the candidate is scored by the consistency of its two strongest VPs.

pub mod mwis;
pub mod refine;

use std::time::Instant;

use rand::{seq::index::sample, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geom::{angle, consistency, meet, CameraFrame, ImageLine, SphereLine, SpherePoint};
use crate::params::AlgorithmParams;
use crate::prior::{map_estimate, HorizonParam, HorizonPrior, PriorSource};
use crate::segments::{horizon_filter_indices, SegmentSet};
use crate::zenith::{detect_zenith, initial_zenith_direction, ZenithResult};

pub use mwis::{mwis_ring, MwisSolution, VpGraph};
pub use refine::{m_step, null_basis, refine_vps};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorizonCandidate {
    pub param: HorizonParam,
    pub line: SphereLine,
    /// Sorted by decreasing weight.
    pub vps: Vec<SpherePoint>,
    pub vp_weights: Vec<f64>,
    pub score: f64,
}

impl HorizonCandidate {
    pub fn new(param: HorizonParam, frame: &CameraFrame) -> Self {
        Self {
            param,
            line: param.to_sphere_line(frame),
            vps: Vec::new(),
            vp_weights: Vec::new(),
            score: 0.0,
        }
    }
}

/// Candidate VPs seeded on one horizon, with the selected subset.
#[derive(Clone, Debug)]
pub struct VpInit {
    pub points: Vec<SpherePoint>,
    pub graph: VpGraph,
    pub selection: MwisSolution,
}

impl VpInit {
    pub fn selected(&self) -> Vec<SpherePoint> {
        self.selection.nodes.iter().map(|&i| self.points[i]).collect()
    }
}

/// splitmix64 of `seed` mixed with `stream`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Slope of horizons perpendicular to `zenith_dir` in the image.
pub fn horizon_slope(zenith_dir: &SphereLine) -> f64 {
    let v = zenith_dir.coords();
    // Image direction of the zenith line is (-b, a); that is the horizon normal.
    let (nx, ny) = (-v.y, v.x);
    HorizonParam::new((-nx).atan2(ny), 0.0).alpha
}

/// `samples` horizon candidates perpendicular to `zenith_dir`. For a
/// context prior the first candidate sits at the MAP offset.
pub fn sample_candidates(
    prior: &HorizonPrior,
    zenith_dir: &SphereLine,
    frame: &CameraFrame,
    samples: usize,
    seed: u64,
) -> Vec<HorizonCandidate> {
    let alpha = horizon_slope(zenith_dir);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(samples);
    if prior.source == PriorSource::FileBacked && samples > 0 {
        if let Ok(map) = map_estimate(prior) {
            out.push(HorizonCandidate::new(HorizonParam { alpha, offset: map.offset }, frame));
        }
    }
    while out.len() < samples {
        let offset = prior.sample_offset(&mut rng);
        out.push(HorizonCandidate::new(HorizonParam { alpha, offset }, frame));
    }
    out
}

/// Seeds VPs on `h` from up to `params.subset` random segments and selects
/// a maximum-weight separated subset.
pub fn init_vps(
    h: &SphereLine,
    lines: &[SphereLine],
    params: &AlgorithmParams,
    seed: u64,
) -> Result<VpInit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = params.subset.min(lines.len());
    let mut picks = sample(&mut rng, lines.len(), m).into_vec();
    picks.sort_unstable();
    let points: Vec<SpherePoint> = picks.iter().filter_map(|&i| meet(&lines[i], h).ok()).collect();
    let weights = points
        .iter()
        .map(|p| vp_weight(p, lines, params.theta_con))
        .collect();
    let graph = VpGraph::on_great_circle(&points, weights, h, params.theta_dist)?;
    let selection = mwis_ring(&graph);
    Ok(VpInit {
        points,
        graph,
        selection,
    })
}

/// Total consistency of `lines` with `p`.
pub fn vp_weight(p: &SpherePoint, lines: &[SphereLine], theta_con: f64) -> f64 {
    lines.iter().map(|l| consistency(p, l, theta_con)).sum()
}

/// Sum of the two largest VP weights recomputed against `lines`.
pub fn score_candidate(vps: &[SpherePoint], lines: &[SphereLine], theta_con: f64) -> f64 {
    let mut w: Vec<f64> = vps.iter().map(|p| vp_weight(p, lines, theta_con)).collect();
    w.sort_by(|a, b| b.total_cmp(a));
    w.iter().take(2).sum()
}

/// Greedy by weight: keeps VPs separated by more than `theta_dist`.
fn enforce_separation(mut vps: Vec<(SpherePoint, f64)>, theta_dist: f64) -> Vec<(SpherePoint, f64)> {
    vps.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut kept: Vec<(SpherePoint, f64)> = Vec::new();
    for (p, w) in vps {
        if kept.iter().all(|(q, _)| angle(p.coords(), q.coords()) > theta_dist) {
            kept.push((p, w));
        }
    }
    kept
}

/// Filter, initialize, refine and score one candidate in place.
pub fn evaluate_candidate(
    cand: &mut HorizonCandidate,
    set: &SegmentSet,
    zenith_dir: &SphereLine,
    params: &AlgorithmParams,
    seed: u64,
) -> Result<()> {
    let kept = horizon_filter_indices(set, zenith_dir, &cand.line, params.theta_ver, params.theta_hor);
    let lines: Vec<SphereLine> = kept.iter().map(|&i| set.segments[i].line).collect();
    if lines.is_empty() {
        return Ok(());
    }
    let init = init_vps(&cand.line, &lines, params, seed)?;
    let refined = refine_vps(&cand.line, &init.selected(), &lines, params.theta_con, params.em_iters);
    let weighted = refined
        .into_iter()
        .map(|p| (p, vp_weight(&p, &lines, params.theta_con)))
        .collect();
    let kept = enforce_separation(weighted, params.theta_dist);
    cand.vps = kept.iter().map(|(p, _)| *p).collect();
    cand.vp_weights = kept.iter().map(|(_, w)| *w).collect();
    cand.score = cand.vp_weights.iter().take(2).sum();
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub zenith_s: f64,
    pub candidates_s: f64,
    pub total_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateSummary {
    pub param: HorizonParam,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub frame: CameraFrame,
    pub horizon: HorizonParam,
    pub horizon_line: SphereLine,
    pub horizon_image: ImageLine,
    pub zenith: ZenithResult,
    /// Horizontal VPs of the chosen candidate, strongest first.
    pub vps: Vec<SpherePoint>,
    pub vp_weights: Vec<f64>,
    /// Per input segment: index of its most consistent horizontal VP.
    pub assignments: Vec<Option<usize>>,
    pub score: f64,
    pub candidate_index: Option<usize>,
    pub candidates: Vec<CandidateSummary>,
    /// Set when there were no segments and the prior alone was used.
    pub degraded: bool,
    #[serde(skip)]
    pub timings: Timings,
}

fn assign_segments(set: &SegmentSet, vps: &[SpherePoint], theta_con: f64) -> Vec<Option<usize>> {
    set.segments
        .iter()
        .map(|s| {
            let mut best: Option<(usize, f64)> = None;
            for (k, p) in vps.iter().enumerate() {
                let c = consistency(p, &s.line, theta_con);
                if c > 0.0 && best.map_or(true, |(_, b)| c > b) {
                    best = Some((k, c));
                }
            }
            best.map(|(k, _)| k)
        })
        .collect()
}

/// Full pipeline: zenith, candidate sampling, per-candidate VP search and
/// selection of the best-scoring horizon.
pub fn detect(
    set: &SegmentSet,
    prior: &HorizonPrior,
    frame: &CameraFrame,
    params: &AlgorithmParams,
    seed: u64,
) -> Result<DetectionResult> {
    params.validate()?;
    let t0 = Instant::now();
    let init_dir = initial_zenith_direction(prior, frame);

    if set.is_empty() {
        let horizon = map_estimate(prior).unwrap_or(HorizonParam::new(prior.alpha_mean, 0.0));
        let line = horizon.to_sphere_line(frame);
        return Ok(DetectionResult {
            frame: *frame,
            horizon,
            horizon_line: line,
            horizon_image: horizon.to_image_line(frame),
            zenith: ZenithResult {
                zenith_vp: None,
                zenith_dir: init_dir,
                inlier_ids: Vec::new(),
                used_ransac: false,
            },
            vps: Vec::new(),
            vp_weights: Vec::new(),
            assignments: Vec::new(),
            score: 0.0,
            candidate_index: None,
            candidates: Vec::new(),
            degraded: true,
            timings: Timings {
                total_s: t0.elapsed().as_secs_f64(),
                ..Timings::default()
            },
        });
    }

    let zenith = detect_zenith(set, &init_dir, params, derive_seed(seed, 0));
    let t_zenith = t0.elapsed().as_secs_f64();

    let mut candidates = sample_candidates(
        prior,
        &zenith.zenith_dir,
        frame,
        params.samples,
        derive_seed(seed, 1),
    );
    candidates
        .par_iter_mut()
        .enumerate()
        .try_for_each(|(i, c)| {
            evaluate_candidate(c, set, &zenith.zenith_dir, params, derive_seed(seed, 2 + i as u64))
        })?;

    let mut best = 0;
    for (i, c) in candidates.iter().enumerate() {
        if c.score > candidates[best].score {
            best = i;
        }
    }
    let chosen = &candidates[best];
    let assignments = assign_segments(set, &chosen.vps, params.theta_con);
    let total = t0.elapsed().as_secs_f64();
    Ok(DetectionResult {
        frame: *frame,
        horizon: chosen.param,
        horizon_line: chosen.line,
        horizon_image: chosen.param.to_image_line(frame),
        zenith,
        vps: chosen.vps.clone(),
        vp_weights: chosen.vp_weights.clone(),
        assignments,
        score: chosen.score,
        candidate_index: Some(best),
        candidates: candidates
            .iter()
            .map(|c| CandidateSummary {
                param: c.param,
                score: c.score,
            })
            .collect(),
        degraded: false,
        timings: Timings {
            zenith_s: t_zenith,
            candidates_s: total - t_zenith,
            total_s: total,
        },
    })
}

/// Horizon from the prior alone (no VP search).
pub fn detect_empty(prior: &HorizonPrior, frame: &CameraFrame) -> Result<DetectionResult> {
    let horizon = map_estimate(prior)?;
    let line = horizon.to_sphere_line(frame);
    Ok(DetectionResult {
        frame: *frame,
        horizon,
        horizon_line: line,
        horizon_image: horizon.to_image_line(frame),
        zenith: ZenithResult {
            zenith_vp: None,
            zenith_dir: initial_zenith_direction(prior, frame),
            inlier_ids: Vec::new(),
            used_ransac: false,
        },
        vps: Vec::new(),
        vp_weights: Vec::new(),
        assignments: Vec::new(),
        score: 0.0,
        candidate_index: None,
        candidates: Vec::new(),
        degraded: false,
        timings: Timings::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::join;
    use crate::prior::no_context_prior;
    use crate::zenith::zenith_direction_from_slope;
    use approx::assert_abs_diff_eq;

    fn frame() -> CameraFrame {
        CameraFrame::new(640.0, 480.0).unwrap()
    }

    /// Kolmogorov-Smirnov statistic against U(lo, hi).
    fn ks_uniform(xs: &[f64], lo: f64, hi: f64) -> f64 {
        let mut s = xs.to_vec();
        s.sort_by(f64::total_cmp);
        let n = s.len() as f64;
        s.iter()
            .enumerate()
            .map(|(i, x)| {
                let f = (x - lo) / (hi - lo);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn slope_of_vertical_zenith_is_level() {
        assert_abs_diff_eq!(horizon_slope(&zenith_direction_from_slope(0.0)), 0.0);
        for a in [-0.4, 0.1, 0.3] {
            assert_abs_diff_eq!(horizon_slope(&zenith_direction_from_slope(a)), a, epsilon = 1e-12);
        }
    }

    #[test]
    fn no_context_offsets_are_uniform() {
        let f = frame();
        let prior = no_context_prior(&f);
        let zd = zenith_direction_from_slope(0.0);
        let c = sample_candidates(&prior, &zd, &f, 300, 4);
        assert_eq!(c.len(), 300);
        let offsets: Vec<f64> = c.iter().map(|c| c.param.offset).collect();
        assert!(offsets.iter().all(|o| (-960.0..960.0).contains(o)));
        // 1% critical value 1.628 / sqrt(n)
        assert!(ks_uniform(&offsets, -960.0, 960.0) < 1.628 / 300f64.sqrt());
        let many = sample_candidates(&prior, &zd, &f, 10_000, 5);
        let offsets: Vec<f64> = many.iter().map(|c| c.param.offset).collect();
        assert!(ks_uniform(&offsets, -960.0, 960.0) < 1.628 / 100.0);
    }

    #[test]
    fn gaussian_offsets_and_map_first() {
        let f = frame();
        let prior = HorizonPrior::gaussian(0.0, 0.02, 0.0, 20.0).unwrap();
        let zd = zenith_direction_from_slope(0.05);
        let c = sample_candidates(&prior, &zd, &f, 300, 11);
        assert_eq!(c[0].param.offset, 0.0);
        let mean = c.iter().map(|c| c.param.offset).sum::<f64>() / 300.0;
        assert!(mean.abs() < 4.0, "{mean}");
        for cand in &c {
            // horizon normal in the image is the zenith line's direction
            let v = zd.coords();
            let (nx, ny) = cand.param.normal();
            assert!((nx * v.x + ny * v.y).abs() < 1e-9);
            assert!(cand.line.coords().cross(&cand.param.to_sphere_line(&f).coords()).norm() < 1e-12);
        }
    }

    #[test]
    fn candidates_are_seed_deterministic() {
        let f = frame();
        let prior = no_context_prior(&f);
        let zd = zenith_direction_from_slope(0.0);
        assert_eq!(
            sample_candidates(&prior, &zd, &f, 50, 8),
            sample_candidates(&prior, &zd, &f, 50, 8)
        );
    }

    #[test]
    fn score_uses_top_two() {
        let theta = 2f64.to_radians();
        // Three VPs on y = 0 with 5, 3.5 and 2 exactly consistent lines.
        let vp = |u: f64| SpherePoint::from_array([u, 0.0, 1.0]).unwrap();
        let vps = [vp(-3.0), vp(0.2), vp(4.0)];
        let mut lines = Vec::new();
        for (p, count) in vps.iter().zip([5usize, 3, 2]) {
            for k in 0..count {
                let other = SpherePoint::from_array([k as f64 * 0.37 - 0.5, 0.5 + k as f64 * 0.1, 1.0]).unwrap();
                lines.push(join(p, &other).unwrap());
            }
        }
        let s = score_candidate(&vps, &lines, theta);
        let w: Vec<f64> = vps.iter().map(|p| vp_weight(p, &lines, theta)).collect();
        let mut sorted = w.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        assert_abs_diff_eq!(s, sorted[0] + sorted[1], epsilon = 1e-12);
        assert_eq!(score_candidate(&[], &lines, theta), 0.0);
        assert_abs_diff_eq!(score_candidate(&vps[..1], &lines, theta), w[0], epsilon = 1e-12);
    }

    #[test]
    fn init_handles_parallel_lines() {
        let h = SphereLine::from_array([0.0, 1.0, 0.0]).unwrap();
        let init = init_vps(&h, &[h], &AlgorithmParams::default(), 1).unwrap();
        assert!(init.points.is_empty());
        assert!(init.selection.nodes.is_empty());
    }

    #[test]
    fn empty_set_is_degraded() {
        let f = frame();
        let set = SegmentSet::new(f);
        let r = detect(&set, &no_context_prior(&f), &f, &AlgorithmParams::default(), 0).unwrap();
        assert!(r.degraded);
        assert!(r.vps.is_empty());
        let prior = HorizonPrior::gaussian(0.1, 0.01, 30.0, 5.0).unwrap();
        let r = detect(&set, &prior, &f, &AlgorithmParams::default(), 0).unwrap();
        assert_eq!(r.horizon, HorizonParam::new(0.1, 30.0));
    }

    #[test]
    fn seed_streams_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }
}
