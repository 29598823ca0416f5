//! Maximum weighted independent set on ring-like proximity graphs.
//!
//! Points on a horizon candidate form a circular-arc graph. Any maximal
//! independent set contains a node of `N[v]` for the minimum-degree node
//! `v`, so we branch on each `x` in `N[v]`: taking `x` removes `N[x]`,
//! which cuts the ring and leaves a path-like graph solved by dynamic
//! programming in angular order. Whenever the leftover graph is not a
//! proper interval graph in that order (arbitrary input graphs), the
//! branch is solved exactly by branch and bound instead.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{angle, SphereLine, SpherePoint};

use super::refine::null_basis;

/// Node-weighted undirected graph, optionally with angular positions on a
/// circle of period `period`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VpGraph {
    pub weights: Vec<f64>,
    /// Sorted neighbor lists.
    pub adjacency: Vec<Vec<usize>>,
    pub positions: Option<Vec<f64>>,
    pub period: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MwisSolution {
    /// Selected node indices, ascending.
    pub nodes: Vec<usize>,
    pub weight: f64,
    /// True when any branch needed the branch-and-bound fallback.
    pub used_fallback: bool,
}

impl VpGraph {
    pub fn from_edges(weights: Vec<f64>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = weights.len();
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidArgument("node weights must be finite and >= 0".into()));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidArgument(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                continue;
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for nb in &mut adjacency {
            nb.sort_unstable();
            nb.dedup();
        }
        Ok(Self {
            weights,
            adjacency,
            positions: None,
            period: std::f64::consts::PI,
        })
    }

    /// Proximity graph of points on the great circle `h`: nodes are joined
    /// when their angle is at most `theta_dist`.
    pub fn on_great_circle(
        points: &[SpherePoint],
        weights: Vec<f64>,
        h: &SphereLine,
        theta_dist: f64,
    ) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::InvalidArgument("points and weights differ in length".into()));
        }
        let mut edges = Vec::new();
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if angle(points[i].coords(), points[j].coords()) <= theta_dist {
                    edges.push((i, j));
                }
            }
        }
        let mut g = Self::from_edges(weights, &edges)?;
        let (b1, b2) = null_basis(h);
        g.positions = Some(
            points
                .iter()
                .map(|p| p.coords().dot(&b2).atan2(p.coords().dot(&b1)).rem_euclid(g.period))
                .collect(),
        );
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn is_independent(&self, nodes: &[usize]) -> bool {
        nodes
            .iter()
            .enumerate()
            .all(|(k, &a)| nodes[k + 1..].iter().all(|&b| a != b && !self.has_edge(a, b)))
    }
}

/// Exact maximum weighted independent set.
pub fn mwis_ring(graph: &VpGraph) -> MwisSolution {
    let n = graph.len();
    if n == 0 {
        return MwisSolution::default();
    }
    let v = (0..n)
        .min_by_key(|&i| (graph.adjacency[i].len(), i))
        .expect("non-empty");
    let mut branches = vec![v];
    branches.extend(graph.adjacency[v].iter().copied());

    let mut best: Option<MwisSolution> = None;
    let mut used_fallback = false;
    for x in branches {
        let mut alive = vec![true; n];
        alive[x] = false;
        for &u in &graph.adjacency[x] {
            alive[u] = false;
        }
        let rest: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
        let sub = match path_dp(graph, x, &rest) {
            Some(s) => s,
            None => {
                used_fallback = true;
                branch_and_bound(graph, &rest)
            }
        };
        let weight = graph.weights[x] + sub.weight;
        if best.as_ref().map_or(true, |b| weight > b.weight) {
            let mut nodes = sub.nodes;
            nodes.push(x);
            nodes.sort_unstable();
            best = Some(MwisSolution {
                nodes,
                weight,
                used_fallback: false,
            });
        }
    }
    let mut best = best.expect("at least one branch");
    best.used_fallback = used_fallback;
    best
}

/// Dynamic program over `rest` ordered by angle from `cut`. Returns `None`
/// unless every closed neighborhood is contiguous in that order.
fn path_dp(graph: &VpGraph, cut: usize, rest: &[usize]) -> Option<MwisSolution> {
    if rest.is_empty() {
        return Some(MwisSolution::default());
    }
    let positions = graph.positions.as_ref()?;
    let origin = positions[cut];
    let mut order = rest.to_vec();
    order.sort_by(|&a, &b| {
        let pa = (positions[a] - origin).rem_euclid(graph.period);
        let pb = (positions[b] - origin).rem_euclid(graph.period);
        pa.total_cmp(&pb).then(a.cmp(&b))
    });
    let m = order.len();
    let mut rank = vec![usize::MAX; graph.len()];
    for (k, &node) in order.iter().enumerate() {
        rank[node] = k;
    }

    // lo[k]: first rank of the closed neighborhood of order[k].
    let mut lo = vec![0usize; m];
    for (k, &node) in order.iter().enumerate() {
        let ranks: Vec<usize> = graph.adjacency[node]
            .iter()
            .map(|&u| rank[u])
            .filter(|&r| r != usize::MAX)
            .collect();
        let (mut a, mut b) = (k, k);
        for &r in &ranks {
            a = a.min(r);
            b = b.max(r);
        }
        if ranks.len() != b - a {
            return None;
        }
        lo[k] = a;
    }

    // best[k] = optimum over the first k nodes of the order.
    let mut best = vec![0.0f64; m + 1];
    let mut take = vec![false; m];
    for k in 0..m {
        let with = graph.weights[order[k]] + best[lo[k]];
        if with > best[k] {
            best[k + 1] = with;
            take[k] = true;
        } else {
            best[k + 1] = best[k];
        }
    }
    let mut nodes = Vec::new();
    let mut k = m;
    while k > 0 {
        if take[k - 1] {
            nodes.push(order[k - 1]);
            k = lo[k - 1];
        } else {
            k -= 1;
        }
    }
    nodes.sort_unstable();
    Some(MwisSolution {
        nodes,
        weight: best[m],
        used_fallback: false,
    })
}

/// Exact MWIS of the subgraph induced by `nodes`.
pub(crate) fn branch_and_bound(graph: &VpGraph, nodes: &[usize]) -> MwisSolution {
    let mut alive = vec![false; graph.len()];
    for &i in nodes {
        alive[i] = true;
    }
    let mut state = BnbState {
        graph,
        best_weight: -1.0,
        best: Vec::new(),
        current: Vec::new(),
    };
    state.search(&mut alive, nodes.to_vec(), 0.0);
    let mut best = state.best;
    best.sort_unstable();
    MwisSolution {
        nodes: best,
        weight: state.best_weight.max(0.0),
        used_fallback: true,
    }
}

struct BnbState<'a> {
    graph: &'a VpGraph,
    best_weight: f64,
    best: Vec<usize>,
    current: Vec<usize>,
}

impl BnbState<'_> {
    fn search(&mut self, alive: &mut [bool], cand: Vec<usize>, weight: f64) {
        let bound: f64 = cand.iter().map(|&i| self.graph.weights[i]).sum();
        if weight + bound <= self.best_weight {
            return;
        }
        // Branch on the live node of highest live degree.
        let mut pivot = None;
        let mut pivot_deg = 0;
        for &c in &cand {
            let d = self.graph.adjacency[c].iter().filter(|&&u| alive[u]).count();
            if pivot.is_none() || d > pivot_deg {
                pivot = Some(c);
                pivot_deg = d;
            }
        }
        let Some(p) = pivot else {
            if weight > self.best_weight {
                self.best_weight = weight;
                self.best = self.current.clone();
            }
            return;
        };
        if pivot_deg == 0 {
            // No edges left: take everything.
            if weight + bound > self.best_weight {
                self.best_weight = weight + bound;
                self.best = self.current.iter().chain(cand.iter()).copied().collect();
            }
            return;
        }

        // include p
        let removed: Vec<usize> = std::iter::once(p)
            .chain(self.graph.adjacency[p].iter().copied().filter(|&u| alive[u]))
            .collect();
        for &r in &removed {
            alive[r] = false;
        }
        let next: Vec<usize> = cand.iter().copied().filter(|&c| alive[c]).collect();
        self.current.push(p);
        self.search(alive, next, weight + self.graph.weights[p]);
        self.current.pop();
        for &r in &removed {
            alive[r] = true;
        }

        // exclude p
        alive[p] = false;
        let next: Vec<usize> = cand.iter().copied().filter(|&c| c != p).collect();
        self.search(alive, next, weight);
        alive[p] = true;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::Vector3;
    use proptest::prelude::*;

    /// Exhaustive maximum over all 2^n subsets.
    fn brute_force(g: &VpGraph) -> f64 {
        let n = g.len();
        let mut best = 0.0f64;
        for mask in 0u32..(1u32 << n) {
            let nodes: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            if g.is_independent(&nodes) {
                best = best.max(nodes.iter().map(|&i| g.weights[i]).sum());
            }
        }
        best
    }

    #[test]
    fn empty_and_single() {
        let g = VpGraph::from_edges(vec![], &[]).unwrap();
        assert_eq!(mwis_ring(&g), MwisSolution::default());
        let g = VpGraph::from_edges(vec![2.5], &[]).unwrap();
        let s = mwis_ring(&g);
        assert_eq!(s.nodes, vec![0]);
        assert_eq!(s.weight, 2.5);
    }

    #[test]
    fn path_of_three() {
        let g = VpGraph::from_edges(vec![5.0, 1.0, 5.0], &[(0, 1), (1, 2)]).unwrap();
        let s = mwis_ring(&g);
        assert_eq!(s.nodes, vec![0, 2]);
        assert_eq!(s.weight, 10.0);
    }

    #[test]
    fn five_cycle() {
        let g = VpGraph::from_edges(vec![1.0; 5], &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let s = mwis_ring(&g);
        assert_eq!(s.nodes.len(), 2);
        assert_eq!(s.weight, 2.0);
        assert!(g.is_independent(&s.nodes));
    }

    #[test]
    fn negative_weights_rejected() {
        assert!(VpGraph::from_edges(vec![-1.0], &[]).is_err());
        assert!(VpGraph::from_edges(vec![1.0], &[(0, 3)]).is_err());
    }

    fn circle_points(angles: &[f64]) -> (Vec<SpherePoint>, SphereLine) {
        // Great circle z = 0 tilted a little so positions are non-trivial.
        let h = SphereLine::new(Vector3::new(0.1, -0.2, 1.0)).unwrap();
        let (b1, b2) = null_basis(&h);
        let pts = angles
            .iter()
            .map(|a| SpherePoint::new(b1 * a.cos() + b2 * a.sin()).unwrap())
            .collect();
        (pts, h)
    }

    #[test]
    fn ring_graph_uses_dynamic_program() {
        let angles: Vec<f64> = (0..20).map(|i| i as f64 * 0.157 + 0.01 * (i % 3) as f64).collect();
        let weights: Vec<f64> = (0..20).map(|i| ((i * 7) % 11) as f64).collect();
        let (pts, h) = circle_points(&angles);
        let g = VpGraph::on_great_circle(&pts, weights, &h, 33f64.to_radians()).unwrap();
        let s = mwis_ring(&g);
        assert!(!s.used_fallback);
        assert!(g.is_independent(&s.nodes));
        assert_abs_diff_eq!(s.weight, brute_force(&g));
    }

    proptest! {
        #[test]
        fn matches_brute_force_on_random_graphs(
            n in 1usize..=14,
            edge_bits in proptest::collection::vec(any::<bool>(), 91),
            weights in proptest::collection::vec(0.0f64..10.0, 14),
        ) {
            let mut edges = Vec::new();
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if edge_bits[k % edge_bits.len()] {
                        edges.push((i, j));
                    }
                    k += 1;
                }
            }
            let g = VpGraph::from_edges(weights[..n].to_vec(), &edges).unwrap();
            let s = mwis_ring(&g);
            prop_assert!(g.is_independent(&s.nodes));
            let total: f64 = s.nodes.iter().map(|&i| g.weights[i]).sum();
            prop_assert!((total - s.weight).abs() < 1e-9);
            prop_assert!((s.weight - brute_force(&g)).abs() < 1e-9);
        }

        #[test]
        fn matches_brute_force_on_circle_graphs(
            angles in proptest::collection::vec(0.0f64..std::f64::consts::PI, 1..=16),
            weights in proptest::collection::vec(0.0f64..5.0, 16),
        ) {
            let (pts, h) = circle_points(&angles);
            let g = VpGraph::on_great_circle(&pts, weights[..angles.len()].to_vec(), &h, 33f64.to_radians()).unwrap();
            let s = mwis_ring(&g);
            prop_assert!(g.is_independent(&s.nodes));
            prop_assert!((s.weight - brute_force(&g)).abs() < 1e-9);
        }
    }
}
