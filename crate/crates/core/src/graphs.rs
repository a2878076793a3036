//! Labeled graphs on `k` vertices encoded as edge bitmasks, plus the range,
//! positive and negative edge graphs of a configuration.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::configuration::Configuration;
use crate::error::{Error, Result};
use crate::potential::PairPotential;

/// Default cap on `k` for graph enumeration.
pub const DEFAULT_K_MAX: usize = 6;

/// Hard ceiling: 2^21 edge subsets at `k = 7` is the most we enumerate.
pub const ENUMERATION_CEILING: usize = 7;

/// Largest vertex count representable by a [`LabeledGraph`].
pub const MAX_VERTICES: usize = 11;

/// Position of edge `{i, j}` (0-based, `i < j`) in the bitmask.
#[inline]
pub const fn edge_index(i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    j * (j - 1) / 2 + i
}

#[inline]
pub const fn edge_count(k: usize) -> usize {
    k * k.saturating_sub(1) / 2
}

/// Simple undirected graph on vertices `0..k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LabeledGraph {
    k: u8,
    edges: u64,
}

impl LabeledGraph {
    pub fn new(k: usize, edges: u64) -> Self {
        assert!(k <= MAX_VERTICES, "at most {MAX_VERTICES} vertices");
        let used = edge_count(k);
        assert!(
            used == 64 || edges >> used == 0,
            "edge bit outside 0..{used}"
        );
        Self { k: k as u8, edges }
    }

    pub fn empty(k: usize) -> Self {
        Self::new(k, 0)
    }

    pub fn from_edges(k: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::empty(k);
        for &(i, j) in edges {
            g.insert(i, j);
        }
        g
    }

    pub fn vertex_count(&self) -> usize {
        self.k as usize
    }

    pub fn mask(&self) -> u64 {
        self.edges
    }

    pub fn edge_len(&self) -> usize {
        self.edges.count_ones() as usize
    }

    pub fn insert(&mut self, i: usize, j: usize) {
        assert!(i != j, "self edges are not allowed");
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        assert!(b < self.vertex_count(), "vertex {b} out of range");
        self.edges |= 1 << edge_index(a, b);
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        a != b && self.edges >> edge_index(a, b) & 1 == 1
    }

    /// Edges `(i, j)` with `i < j`, in bit order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let k = self.vertex_count();
        (1..k)
            .flat_map(move |j| (0..j).map(move |i| (i, j)))
            .filter(move |&(i, j)| self.contains(i, j))
    }

    /// Neighbour bitmask of every vertex.
    pub fn adjacency(&self) -> Vec<u32> {
        let mut adj = vec![0u32; self.vertex_count()];
        for (i, j) in self.edges() {
            adj[i] |= 1 << j;
            adj[j] |= 1 << i;
        }
        adj
    }

    pub fn without_edge(&self, i: usize, j: usize) -> Self {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        Self {
            k: self.k,
            edges: self.edges & !(1 << edge_index(a, b)),
        }
    }
}

fn connected_within(adj: &[u32], vertices: u32) -> bool {
    if vertices == 0 {
        return true;
    }
    let start = vertices.trailing_zeros();
    let mut seen = 1u32 << start;
    let mut frontier = seen;
    while frontier != 0 {
        let v = frontier.trailing_zeros() as usize;
        frontier &= frontier - 1;
        let fresh = adj[v] & vertices & !seen;
        seen |= fresh;
        frontier |= fresh;
    }
    seen == vertices
}

/// True if the graph has a single connected component (vacuously for `k <= 1`).
pub fn is_connected(g: &LabeledGraph) -> bool {
    let k = g.vertex_count();
    connected_within(&g.adjacency(), full_set(k))
}

/// Connected on its own and after deleting any single vertex. The single
/// edge on two vertices counts as biconnected.
pub fn is_biconnected(g: &LabeledGraph) -> bool {
    let k = g.vertex_count();
    match k {
        0 | 1 => false,
        2 => g.contains(0, 1),
        _ => {
            let adj = g.adjacency();
            let all = full_set(k);
            connected_within(&adj, all) && (0..k).all(|v| connected_within(&adj, all & !(1 << v)))
        }
    }
}

#[inline]
fn full_set(k: usize) -> u32 {
    if k == 0 {
        0
    } else {
        (1u32 << k) - 1
    }
}

/// Cut vertices by depth-first search (lowpoint method).
pub fn articulation_points(g: &LabeledGraph) -> Vec<usize> {
    let k = g.vertex_count();
    let adj = g.adjacency();
    let mut disc = vec![usize::MAX; k];
    let mut low = vec![0; k];
    let mut is_cut = vec![false; k];
    let mut time = 0;

    fn visit(
        v: usize,
        parent: Option<usize>,
        adj: &[u32],
        disc: &mut [usize],
        low: &mut [usize],
        is_cut: &mut [bool],
        time: &mut usize,
    ) {
        disc[v] = *time;
        low[v] = *time;
        *time += 1;
        let mut children = 0;
        let mut nbrs = adj[v];
        while nbrs != 0 {
            let u = nbrs.trailing_zeros() as usize;
            nbrs &= nbrs - 1;
            if disc[u] == usize::MAX {
                children += 1;
                visit(u, Some(v), adj, disc, low, is_cut, time);
                low[v] = low[v].min(low[u]);
                if parent.is_some() && low[u] >= disc[v] {
                    is_cut[v] = true;
                }
            } else if Some(u) != parent {
                low[v] = low[v].min(disc[u]);
            }
        }
        if parent.is_none() && children > 1 {
            is_cut[v] = true;
        }
    }

    for v in 0..k {
        if disc[v] == usize::MAX {
            visit(v, None, &adj, &mut disc, &mut low, &mut is_cut, &mut time);
        }
    }
    (0..k).filter(|&v| is_cut[v]).collect()
}

fn check_k(k: usize, min: usize, k_max: usize) -> Result<()> {
    let max = k_max.min(ENUMERATION_CEILING);
    if k < min || k > max {
        return Err(Error::OutOfRange {
            what: "k",
            value: k,
            min,
            max,
        });
    }
    Ok(())
}

fn enumerate(k: usize, keep: impl Fn(&LabeledGraph) -> bool) -> Vec<LabeledGraph> {
    let total = 1u64 << edge_count(k);
    (0..total)
        .map(|mask| LabeledGraph::new(k, mask))
        .filter(|g| keep(g))
        .collect()
}

static CONNECTED: [OnceLock<Vec<LabeledGraph>>; ENUMERATION_CEILING + 1] =
    [const { OnceLock::new() }; ENUMERATION_CEILING + 1];

/// Labeled connected graphs on `k` vertices, ordered by edge bitmask.
pub fn connected_graphs(k: usize) -> Result<&'static [LabeledGraph]> {
    connected_graphs_with_limit(k, DEFAULT_K_MAX)
}

/// As [`connected_graphs`] with a caller-chosen cap (at most [`ENUMERATION_CEILING`]).
pub fn connected_graphs_with_limit(k: usize, k_max: usize) -> Result<&'static [LabeledGraph]> {
    check_k(k, 1, k_max)?;
    Ok(CONNECTED[k].get_or_init(|| enumerate(k, is_connected)))
}

/// Labeled biconnected graphs on `k >= 2` vertices, ordered by edge bitmask.
pub fn biconnected_graphs(k: usize) -> Result<Vec<LabeledGraph>> {
    check_k(k, 2, DEFAULT_K_MAX)?;
    Ok(connected_graphs(k)?
        .iter()
        .copied()
        .filter(is_biconnected)
        .collect())
}

/// Range, positive and negative edge graphs of a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigGraphs {
    /// `{i, j}` with `|x_i - x_j| <= range`.
    pub range: LabeledGraph,
    /// `{i, j}` with `v(|x_i - x_j|) > 0`.
    pub positive: LabeledGraph,
    /// `{i, j}` with `v(|x_i - x_j|) < 0`.
    pub negative: LabeledGraph,
}

impl ConfigGraphs {
    pub fn is_connected(&self) -> bool {
        is_connected(&self.range)
    }
}

/// Classifies the pairs of `x` by distance and by the sign of `v`.
pub fn config_graphs(
    x: &Configuration,
    range: f64,
    potential: &PairPotential,
) -> Result<ConfigGraphs> {
    let k = x.len();
    if k > MAX_VERTICES {
        return Err(Error::OutOfRange {
            what: "k",
            value: k,
            min: 1,
            max: MAX_VERTICES,
        });
    }
    let mut out = ConfigGraphs {
        range: LabeledGraph::empty(k),
        positive: LabeledGraph::empty(k),
        negative: LabeledGraph::empty(k),
    };
    for j in 1..k {
        for i in 0..j {
            let r = x.distance(i, j);
            if r <= range {
                out.range.insert(i, j);
            }
            let v = potential.value(r);
            if v > 0.0 {
                out.positive.insert(i, j);
            } else if v < 0.0 {
                out.negative.insert(i, j);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent connectivity filter: union-find over the edge list.
    fn brute_force_connected_count(k: usize) -> usize {
        let pairs: Vec<(usize, usize)> = (1..k).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
        let mut count = 0;
        for mask in 0u64..(1 << pairs.len()) {
            let mut parent: Vec<usize> = (0..k).collect();
            fn find(p: &mut [usize], x: usize) -> usize {
                if p[x] != x {
                    let r = find(p, p[x]);
                    p[x] = r;
                }
                p[x]
            }
            for (bit, &(i, j)) in pairs.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    parent[a] = b;
                }
            }
            let root = find(&mut parent, 0);
            if (0..k).all(|v| find(&mut parent, v) == root) {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn connected_counts_match_brute_force() {
        assert_eq!(connected_graphs(1).unwrap().len(), 1);
        assert_eq!(connected_graphs(3).unwrap().len(), 4);
        assert_eq!(connected_graphs(4).unwrap().len(), 38);
        for k in 1..=6 {
            assert_eq!(
                connected_graphs(k).unwrap().len(),
                brute_force_connected_count(k),
                "k={k}"
            );
        }
        assert_eq!(connected_graphs(6).unwrap().len(), 26_704);
    }

    #[test]
    fn enumeration_order_is_by_mask() {
        let gs = connected_graphs(4).unwrap();
        assert!(gs.windows(2).all(|w| w[0].mask() < w[1].mask()));
    }

    #[test]
    fn out_of_range_k() {
        assert!(connected_graphs(0).is_err());
        assert!(connected_graphs(7).is_err());
        assert!(connected_graphs_with_limit(7, 7).is_ok());
        assert!(connected_graphs_with_limit(8, 8).is_err());
        assert!(biconnected_graphs(1).is_err());
    }

    #[test]
    fn biconnected_counts() {
        assert_eq!(
            biconnected_graphs(2).unwrap(),
            vec![LabeledGraph::from_edges(2, &[(0, 1)])]
        );
        assert_eq!(biconnected_graphs(3).unwrap().len(), 1);
        assert_eq!(biconnected_graphs(4).unwrap().len(), 10);
        assert_eq!(biconnected_graphs(5).unwrap().len(), 238);
    }

    #[test]
    fn biconnected_subset_of_connected() {
        for k in 2..=5 {
            let conn = connected_graphs(k).unwrap();
            for g in biconnected_graphs(k).unwrap() {
                assert!(conn.binary_search(&g).is_ok());
            }
        }
    }

    #[test]
    fn edge_removal_matches_articulation_points() {
        for k in 3..=5 {
            for g in biconnected_graphs(k).unwrap() {
                for (i, j) in g.edges().collect::<Vec<_>>() {
                    let h = g.without_edge(i, j);
                    let direct = is_connected(&h) && articulation_points(&h).is_empty();
                    assert_eq!(is_biconnected(&h), direct, "{h:?}");
                }
            }
        }
    }

    #[test]
    fn connectivity_examples() {
        assert!(is_connected(&LabeledGraph::from_edges(
            3,
            &[(0, 1), (1, 2), (0, 2)]
        )));
        assert!(!is_connected(&LabeledGraph::empty(2)));
        assert!(is_connected(&LabeledGraph::from_edges(
            4,
            &[(0, 1), (1, 2), (2, 3)]
        )));
        assert!(is_connected(&LabeledGraph::empty(1)));
    }

    #[test]
    fn articulation_points_of_a_path() {
        let path = LabeledGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(articulation_points(&path), vec![1, 2]);
    }

    fn square_well() -> PairPotential {
        PairPotential::square_well(1.0, 1.5, 1.0, 1).unwrap()
    }

    #[test]
    fn configuration_graph_examples() {
        let p = square_well();
        let g = config_graphs(&Configuration::from_1d(&[0.0, 1.2]), 1.5, &p).unwrap();
        assert!(g.range.contains(0, 1) && g.negative.contains(0, 1));
        assert_eq!(g.positive.edge_len(), 0);

        let g = config_graphs(&Configuration::from_1d(&[0.0, 10.0]), 1.5, &p).unwrap();
        assert_eq!(
            g.range.edge_len() + g.positive.edge_len() + g.negative.edge_len(),
            0
        );

        let g = config_graphs(&Configuration::from_1d(&[0.0, 1.2, 2.4]), 1.5, &p).unwrap();
        assert_eq!(g.range.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
        assert!(g.is_connected());
    }

    #[test]
    fn sign_graphs_are_disjoint_subsets_of_range() {
        let p = crate::potential::two_well();
        let x = Configuration::from_1d(&[0.0, 1.05, 2.5, 3.45, 5.0]);
        let g = config_graphs(&x, p.range(), &p).unwrap();
        assert_eq!(g.positive.mask() & g.negative.mask(), 0);
        assert_eq!((g.positive.mask() | g.negative.mask()) & !g.range.mask(), 0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn relabeling_commutes(xs in prop::collection::vec(-3.0f64..3.0, 2..6), seed in 0usize..720) {
                let p = square_well();
                let k = xs.len();
                // permutation from the seed (Lehmer code)
                let mut pool: Vec<usize> = (0..k).collect();
                let mut perm = Vec::with_capacity(k);
                let mut s = seed;
                for r in (1..=k).rev() {
                    perm.push(pool.remove(s % r));
                    s /= r;
                }
                let permuted: Vec<f64> = perm.iter().map(|&i| xs[i]).collect();
                let g = config_graphs(&Configuration::from_1d(&xs), 1.5, &p).unwrap();
                let h = config_graphs(&Configuration::from_1d(&permuted), 1.5, &p).unwrap();
                for a in 0..k {
                    for b in 0..k {
                        if a != b {
                            prop_assert_eq!(h.range.contains(a, b), g.range.contains(perm[a], perm[b]));
                            prop_assert_eq!(h.negative.contains(a, b), g.negative.contains(perm[a], perm[b]));
                            prop_assert_eq!(h.positive.contains(a, b), g.positive.contains(perm[a], perm[b]));
                        }
                    }
                }
            }
        }
    }
}
