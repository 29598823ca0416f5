//! EM-style refinement of vanishing points constrained to a horizon line.

use nalgebra::{DMatrix, Vector3};

use crate::geom::{consistency, SphereLine, SpherePoint};
use crate::linalg::smallest_right_singular;

/// Orthonormal basis `(b1, b2)` of the plane orthogonal to `h`, built by
/// Gram-Schmidt from the canonical axis least aligned with `h`.
pub fn null_basis(h: &SphereLine) -> (Vector3<f64>, Vector3<f64>) {
    let v = h.coords();
    let k = (0..3)
        .min_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs()))
        .expect("three axes");
    let mut e = Vector3::zeros();
    e[k] = 1.0;
    let b1 = (e - v * v.dot(&e)).normalize();
    let b2 = v.cross(&b1).normalize();
    (b1, b2)
}

/// Indices of `lines` with positive consistency with `p`.
pub fn assign(p: &SpherePoint, lines: &[SphereLine], theta_con: f64) -> Vec<usize> {
    lines
        .iter()
        .enumerate()
        .filter(|(_, l)| consistency(p, l, theta_con) > 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// `||L^T p||` for the assigned lines.
pub fn algebraic_cost(p: &Vector3<f64>, lines: &[&SphereLine]) -> f64 {
    lines
        .iter()
        .map(|l| l.coords().dot(p).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Result of one constrained least-squares solve.
#[derive(Clone, Copy, Debug)]
pub struct MStep {
    pub point: SpherePoint,
    /// Smallest singular value of `L^T B_h`, i.e. the attained cost.
    pub cost: f64,
}

/// Minimizes `||L^T p||` over unit `p` with `h . p = 0`.
pub fn m_step(h: &SphereLine, lines: &[&SphereLine]) -> Option<MStep> {
    if lines.is_empty() {
        return None;
    }
    let (b1, b2) = null_basis(h);
    let mut a = DMatrix::zeros(lines.len(), 2);
    for (i, l) in lines.iter().enumerate() {
        a[(i, 0)] = l.coords().dot(&b1);
        a[(i, 1)] = l.coords().dot(&b2);
    }
    let (lambda, cost) = smallest_right_singular(&a);
    let p = b1 * lambda[0] + b2 * lambda[1];
    let point = SpherePoint::new(p).ok()?.canonical();
    Some(MStep { point, cost })
}

/// Refines one VP; `None` once its assignment becomes empty.
pub fn refine_vp(
    h: &SphereLine,
    vp: &SpherePoint,
    lines: &[SphereLine],
    theta_con: f64,
    em_iters: usize,
) -> Option<SpherePoint> {
    let mut p = *vp;
    let mut assigned = assign(&p, lines, theta_con);
    if assigned.is_empty() {
        return None;
    }
    for _ in 0..em_iters {
        let subset: Vec<&SphereLine> = assigned.iter().map(|&i| &lines[i]).collect();
        p = m_step(h, &subset)?.point;
        let next = assign(&p, lines, theta_con);
        if next.is_empty() {
            return None;
        }
        if next == assigned {
            break;
        }
        assigned = next;
    }
    Some(p)
}

/// Refines every VP on `h` against `lines`, dropping those left without
/// support.
pub fn refine_vps(
    h: &SphereLine,
    vps: &[SpherePoint],
    lines: &[SphereLine],
    theta_con: f64,
    em_iters: usize,
) -> Vec<SpherePoint> {
    vps.iter()
        .filter_map(|vp| refine_vp(h, vp, lines, theta_con, em_iters))
        .collect()
}
