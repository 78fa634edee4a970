//! Weighted digraphs of the consensus model, node sets, ergodicity and
//! vertex cutsets.
//!
//! An edge `i -> j` with weight `a` means node `j`'s next state takes the
//! fraction `a` of node `i`'s current state, i.e. `A[j][i] = a`. Incoming
//! weights of every node therefore sum to one.

mod flow;
mod generate;

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use flow::min_separating_cutset;
pub use generate::{random_ergodic, random_geometric};

pub type NodeId = usize;

/// Absolute tolerance on the incoming weight sum of each node.
pub const ROW_SUM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub weight: f64,
}

impl Edge {
    pub fn new(from: NodeId, to: NodeId, weight: f64) -> Self {
        Self { from, to, weight }
    }
}

/// Sorted, duplicate-free set of node indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeSet(Vec<NodeId>);

impl NodeSet {
    pub fn new(ids: impl IntoIterator<Item = NodeId>) -> Self {
        let mut ids: Vec<NodeId> = ids.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        Self(ids)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn all(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().copied()
    }

    /// Position of `id` within the set ordering.
    pub fn position(&self, id: NodeId) -> Option<usize> {
        self.0.binary_search(&id).ok()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&index) if index >= n => Err(Error::IndexOutOfRange { index, n }),
            _ => Ok(()),
        }
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for id in self.iter() {
            mask[id] = true;
        }
        mask
    }
}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<I: IntoIterator<Item = NodeId>>(iter: I) -> Self {
        Self::new(iter)
    }
}

impl From<Vec<NodeId>> for NodeSet {
    fn from(ids: Vec<NodeId>) -> Self {
        Self::new(ids)
    }
}

impl<'a> IntoIterator for &'a NodeSet {
    type Item = &'a NodeId;
    type IntoIter = std::slice::Iter<'a, NodeId>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ErgodicityReport {
    pub irreducible: bool,
    pub aperiodic: bool,
    pub period: usize,
}

impl ErgodicityReport {
    pub fn is_ergodic(&self) -> bool {
        self.irreducible && self.aperiodic
    }
}

/// The network graph. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedDigraph {
    n: usize,
    edges: Vec<Edge>,
    out_adj: Vec<Vec<NodeId>>,
    in_adj: Vec<Vec<NodeId>>,
    positions: Option<Vec<[f64; 2]>>,
}

/// Validates the edge list and builds the graph.
pub fn build_graph(n: usize, edges: Vec<Edge>) -> Result<WeightedDigraph> {
    if n == 0 {
        return Err(Error::InvalidArgument("graph needs at least one node".into()));
    }
    let mut seen = HashSet::with_capacity(edges.len());
    let mut sums = vec![0.0; n];
    let mut out_adj = vec![Vec::new(); n];
    let mut in_adj = vec![Vec::new(); n];
    for e in &edges {
        for index in [e.from, e.to] {
            if index >= n {
                return Err(Error::IndexOutOfRange { index, n });
            }
        }
        if !(e.weight > 0.0 && e.weight.is_finite()) {
            return Err(Error::InvalidWeight { from: e.from, to: e.to, weight: e.weight });
        }
        if !seen.insert((e.from, e.to)) {
            return Err(Error::DuplicateEdge { from: e.from, to: e.to });
        }
        sums[e.to] += e.weight;
        out_adj[e.from].push(e.to);
        in_adj[e.to].push(e.from);
    }
    if let Some((node, &sum)) = sums
        .iter()
        .enumerate()
        .find(|(_, s)| (**s - 1.0).abs() > ROW_SUM_TOL)
    {
        return Err(Error::RowSum { node, sum });
    }
    Ok(WeightedDigraph { n, edges, out_adj, in_adj, positions: None })
}

impl WeightedDigraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn successors(&self, node: NodeId) -> &[NodeId] {
        &self.out_adj[node]
    }

    pub fn predecessors(&self, node: NodeId) -> &[NodeId] {
        &self.in_adj[node]
    }

    /// Planar node positions, present for geometric graphs.
    pub fn positions(&self) -> Option<&[[f64; 2]]> {
        self.positions.as_deref()
    }

    pub fn with_positions(mut self, positions: Vec<[f64; 2]>) -> Result<Self> {
        if positions.len() != self.n {
            return Err(Error::DimensionMismatch {
                what: "node positions",
                expected: self.n,
                got: positions.len(),
            });
        }
        self.positions = Some(positions);
        Ok(self)
    }

    /// Dense row-stochastic update matrix, `A[to][from] = weight`.
    pub fn update_matrix(&self) -> nalgebra::DMatrix<f64> {
        let mut a = nalgebra::DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            a[(e.to, e.from)] = e.weight;
        }
        a
    }

    fn reach(&self, starts: impl IntoIterator<Item = NodeId>, forward: bool, blocked: &[bool]) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::new();
        for s in starts {
            if !blocked[s] && !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let next = if forward { &self.out_adj[u] } else { &self.in_adj[u] };
            for &v in next {
                if !blocked[v] && !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Nodes reachable from `sources` along paths that avoid `blocked`
    /// entirely (a blocked source contributes nothing).
    pub(crate) fn reachable_avoiding(&self, sources: &NodeSet, blocked: &NodeSet) -> Vec<bool> {
        self.reach(sources.iter(), true, &blocked.mask(self.n))
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Irreducibility and period of the graph.
///
/// For reducible graphs the period reported is that of the strongly
/// connected component containing node 0; an acyclic component reports
/// period 1 but is not aperiodic.
pub fn ergodicity(g: &WeightedDigraph) -> ErgodicityReport {
    let open = vec![false; g.n];
    let fwd = g.reach([0], true, &open);
    let bwd = g.reach([0], false, &open);
    let irreducible = fwd.iter().all(|&r| r) && bwd.iter().all(|&r| r);
    let in_scc: Vec<bool> = fwd.iter().zip(&bwd).map(|(a, b)| *a && *b).collect();

    let mut level = vec![usize::MAX; g.n];
    level[0] = 0;
    let mut queue = VecDeque::from([0]);
    while let Some(u) = queue.pop_front() {
        for &v in &g.out_adj[u] {
            if in_scc[v] && level[v] == usize::MAX {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut period = 0;
    for e in &g.edges {
        if in_scc[e.from] && in_scc[e.to] {
            period = gcd(period, (level[e.from] + 1).abs_diff(level[e.to]));
        }
    }
    if period == 0 {
        return ErgodicityReport { irreducible, aperiodic: false, period: 1 };
    }
    ErgodicityReport { irreducible, aperiodic: period == 1, period }
}

/// True when every directed path from a source to a target visits a node
/// of `cutset`. Path endpoints count as visited, so `cutset = sources` and
/// `cutset = targets` always separate.
pub fn is_separating_cutset(
    g: &WeightedDigraph,
    sources: &NodeSet,
    targets: &NodeSet,
    cutset: &NodeSet,
) -> bool {
    let reach = g.reachable_avoiding(sources, cutset);
    targets.iter().all(|t| cutset.contains(t) || !reach[t])
}

/// Nodes outside `cutset` that cannot be reached from any source without
/// passing through `cutset`.
pub fn isolated_set(g: &WeightedDigraph, sources: &NodeSet, cutset: &NodeSet) -> NodeSet {
    let reach = g.reachable_avoiding(sources, cutset);
    (0..g.n).filter(|&v| !reach[v] && !cutset.contains(v)).collect()
}

/// Hop distance from the nearest source, `None` if unreachable.
pub fn hop_distances(g: &WeightedDigraph, sources: &NodeSet) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.n];
    let mut queue = VecDeque::new();
    for s in sources.iter() {
        dist[s] = Some(0);
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        let d = dist[u].unwrap_or(0);
        for &v in &g.out_adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn averaging2() -> WeightedDigraph {
        build_graph(
            2,
            vec![Edge::new(0, 0, 0.5), Edge::new(1, 0, 0.5), Edge::new(0, 1, 0.5), Edge::new(1, 1, 0.5)],
        )
        .unwrap()
    }

    pub(crate) fn chain3() -> WeightedDigraph {
        let third = 1.0 / 3.0;
        build_graph(
            3,
            vec![
                Edge::new(0, 0, 0.5),
                Edge::new(1, 0, 0.5),
                Edge::new(0, 1, third),
                Edge::new(1, 1, third),
                Edge::new(2, 1, third),
                Edge::new(1, 2, 0.5),
                Edge::new(2, 2, 0.5),
            ],
        )
        .unwrap()
    }

    fn path(n: usize) -> WeightedDigraph {
        let mut edges = Vec::new();
        for j in 0..n {
            let mut inc = vec![j];
            if j > 0 {
                inc.push(j - 1);
            }
            if j + 1 < n {
                inc.push(j + 1);
            }
            let w = 1.0 / inc.len() as f64;
            edges.extend(inc.into_iter().map(|i| Edge::new(i, j, w)));
        }
        build_graph(n, edges).unwrap()
    }

    fn set(ids: &[usize]) -> NodeSet {
        NodeSet::new(ids.iter().copied())
    }

    #[test]
    fn builds_averaging_graph() {
        let g = averaging2();
        let a = g.update_matrix();
        assert!(a.iter().all(|&x| x == 0.5));
    }

    #[test]
    fn chain_is_row_stochastic() {
        let a = chain3().update_matrix();
        let third = 1.0 / 3.0;
        let expected = [[0.5, 0.5, 0.0], [third, third, third], [0.0, 0.5, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a[(i, j)], expected[i][j]);
            }
        }
    }

    #[test]
    fn rejects_bad_row_sum() {
        let err = build_graph(2, vec![Edge::new(0, 0, 0.6), Edge::new(1, 0, 0.5)]).unwrap_err();
        match err {
            Error::RowSum { node, sum } => {
                assert_eq!(node, 0);
                assert!((sum - 1.1).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_duplicates_range_and_weights() {
        let dup = build_graph(1, vec![Edge::new(0, 0, 0.5), Edge::new(0, 0, 0.5)]);
        assert!(matches!(dup, Err(Error::DuplicateEdge { from: 0, to: 0 })));
        let oob = build_graph(1, vec![Edge::new(0, 3, 1.0)]);
        assert!(matches!(oob, Err(Error::IndexOutOfRange { index: 3, n: 1 })));
        let zero = build_graph(1, vec![Edge::new(0, 0, 0.0)]);
        assert!(matches!(zero, Err(Error::InvalidWeight { .. })));
    }

    #[test]
    fn ergodicity_examples() {
        let r = ergodicity(&averaging2());
        assert_eq!(r, ErgodicityReport { irreducible: true, aperiodic: true, period: 1 });

        let swap = build_graph(2, vec![Edge::new(0, 1, 1.0), Edge::new(1, 0, 1.0)]).unwrap();
        let r = ergodicity(&swap);
        assert_eq!(r, ErgodicityReport { irreducible: true, aperiodic: false, period: 2 });
        assert!(!r.is_ergodic());

        let ident = build_graph(2, vec![Edge::new(0, 0, 1.0), Edge::new(1, 1, 1.0)]).unwrap();
        assert!(!ergodicity(&ident).irreducible);
    }

    #[test]
    fn period_of_three_cycle() {
        let g = build_graph(3, vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 1.0), Edge::new(2, 0, 1.0)]).unwrap();
        assert_eq!(ergodicity(&g).period, 3);
    }

    #[test]
    fn cutset_examples() {
        let g = chain3();
        let (s, t) = (set(&[0]), set(&[2]));
        assert!(is_separating_cutset(&g, &s, &t, &set(&[1])));
        assert!(!is_separating_cutset(&g, &s, &t, &NodeSet::empty()));
        assert!(is_separating_cutset(&g, &s, &t, &set(&[0])));
        assert!(is_separating_cutset(&g, &s, &t, &set(&[2])));
    }

    #[test]
    fn isolated_set_examples() {
        let g = chain3();
        assert_eq!(isolated_set(&g, &set(&[0]), &set(&[1])), set(&[2]));
        assert_eq!(isolated_set(&g, &set(&[0]), &NodeSet::empty()), NodeSet::empty());
        assert_eq!(isolated_set(&averaging2(), &set(&[0]), &set(&[0])), set(&[1]));
    }

    #[test]
    fn min_cutset_examples() {
        assert_eq!(min_separating_cutset(&chain3(), &set(&[0]), &set(&[2])), set(&[1]));
        assert_eq!(min_separating_cutset(&averaging2(), &set(&[0]), &set(&[1])), set(&[0]));
        assert_eq!(min_separating_cutset(&path(5), &set(&[0]), &set(&[4])), set(&[1]));
    }

    #[test]
    fn min_cutset_includes_shared_source_target() {
        let c = min_separating_cutset(&path(4), &set(&[0, 2]), &set(&[2, 3]));
        assert_eq!(c, set(&[2]));
    }

    /// Every simple path from a source to a target, by DFS.
    fn all_paths(g: &WeightedDigraph, s: &NodeSet, t: &NodeSet) -> Vec<Vec<usize>> {
        fn dfs(g: &WeightedDigraph, u: usize, t: &NodeSet, stack: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            stack.push(u);
            if t.contains(u) {
                out.push(stack.clone());
            }
            for &v in g.successors(u) {
                if !stack.contains(&v) {
                    dfs(g, v, t, stack, out);
                }
            }
            stack.pop();
        }
        let mut out = Vec::new();
        for src in s.iter() {
            dfs(g, src, t, &mut Vec::new(), &mut out);
        }
        out
    }

    fn brute_separates(g: &WeightedDigraph, s: &NodeSet, t: &NodeSet, c: &NodeSet) -> bool {
        all_paths(g, s, t).iter().all(|p| p.iter().any(|&v| c.contains(v)))
    }

    #[test]
    fn cutset_and_isolated_set_match_path_enumeration() {
        for seed in 0..40 {
            let n = 3 + (seed as usize % 5);
            let g = random_ergodic(n, seed).unwrap();
            let s = set(&[0]);
            let t = set(&[n - 1]);
            for mask in 0u32..(1 << n) {
                let c: NodeSet = (0..n).filter(|i| mask >> i & 1 == 1).collect();
                let fast = is_separating_cutset(&g, &s, &t, &c);
                assert_eq!(fast, brute_separates(&g, &s, &t, &c), "seed {seed} mask {mask}");
                let v = isolated_set(&g, &s, &c);
                let via_isolated = t.iter().all(|x| c.contains(x) || v.contains(x));
                assert_eq!(fast, via_isolated);
            }
        }
    }

    #[test]
    fn min_cutset_matches_brute_force() {
        for seed in 0..40 {
            let n = 3 + (seed as usize % 6);
            let g = random_ergodic(n, 1000 + seed).unwrap();
            let s = set(&[0]);
            let t = set(&[n - 1, n / 2]);
            let fast = min_separating_cutset(&g, &s, &t);
            assert!(is_separating_cutset(&g, &s, &t, &fast));
            // smallest size, then fewest endpoints, then lexicographic
            let endpoints = |c: &NodeSet| c.iter().filter(|&v| s.contains(v) || t.contains(v)).count();
            let best = (0u32..(1 << n))
                .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect::<NodeSet>())
                .filter(|c| brute_separates(&g, &s, &t, c))
                .min_by(|a, b| (a.len(), endpoints(a), a).cmp(&(b.len(), endpoints(b), b)));
            assert_eq!(Some(fast), best, "seed {seed}");
        }
    }

    #[test]
    fn hop_distance_on_path() {
        let d = hop_distances(&path(4), &set(&[0]));
        assert_eq!(d, vec![Some(0), Some(1), Some(2), Some(3)]);
    }
}
