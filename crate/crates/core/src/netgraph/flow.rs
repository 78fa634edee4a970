//! Minimum vertex cutsets by max-flow on the node-split network.

use std::collections::VecDeque;

use super::{NodeSet, WeightedDigraph};

struct FlowNetwork {
    head: Vec<usize>,
    to: Vec<usize>,
    cap: Vec<u64>,
    next: Vec<usize>,
}

const NIL: usize = usize::MAX;

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        Self { head: vec![NIL; nodes], to: Vec::new(), cap: Vec::new(), next: Vec::new() }
    }

    fn add_edge(&mut self, u: usize, v: usize, cap: u64) {
        for (a, b, c) in [(u, v, cap), (v, u, 0)] {
            self.to.push(b);
            self.cap.push(c);
            self.next.push(self.head[a]);
            self.head[a] = self.to.len() - 1;
        }
    }

    /// Dinic's algorithm.
    fn max_flow(&mut self, src: usize, sink: usize) -> u64 {
        let nodes = self.head.len();
        let mut total = 0;
        loop {
            let mut level = vec![u32::MAX; nodes];
            level[src] = 0;
            let mut queue = VecDeque::from([src]);
            while let Some(u) = queue.pop_front() {
                let mut e = self.head[u];
                while e != NIL {
                    let v = self.to[e];
                    if self.cap[e] > 0 && level[v] == u32::MAX {
                        level[v] = level[u] + 1;
                        queue.push_back(v);
                    }
                    e = self.next[e];
                }
            }
            if level[sink] == u32::MAX {
                return total;
            }
            let mut iter = self.head.clone();
            loop {
                let pushed = self.augment(src, sink, u64::MAX, &level, &mut iter);
                if pushed == 0 {
                    break;
                }
                total += pushed;
            }
        }
    }

    fn augment(&mut self, u: usize, sink: usize, limit: u64, level: &[u32], iter: &mut [usize]) -> u64 {
        if u == sink {
            return limit;
        }
        while iter[u] != NIL {
            let e = iter[u];
            let v = self.to[e];
            if self.cap[e] > 0 && level[v] == level[u] + 1 {
                let pushed = self.augment(v, sink, limit.min(self.cap[e]), level, iter);
                if pushed > 0 {
                    self.cap[e] -= pushed;
                    self.cap[e ^ 1] += pushed;
                    return pushed;
                }
            }
            iter[u] = self.next[e];
        }
        0
    }
}

/// Vertex costs: every node costs `n + 1`, plus one for sources and targets.
/// A minimum-cost cut is therefore a minimum-cardinality cut that uses as
/// few endpoint nodes as possible.
fn vertex_costs(n: usize, sources: &NodeSet, targets: &NodeSet) -> Vec<u64> {
    (0..n)
        .map(|v| n as u64 + 1 + u64::from(sources.contains(v) || targets.contains(v)))
        .collect()
}

/// Cost of a minimum vertex cut after deleting the nodes flagged in `removed`.
fn min_cut_cost(g: &WeightedDigraph, sources: &NodeSet, targets: &NodeSet, cost: &[u64], removed: &[bool]) -> u64 {
    let n = g.n();
    let inf = cost.iter().sum::<u64>() + 1;
    let (src, sink) = (2 * n, 2 * n + 1);
    let mut net = FlowNetwork::new(2 * n + 2);
    for v in 0..n {
        if !removed[v] {
            net.add_edge(2 * v, 2 * v + 1, cost[v]);
        }
    }
    for e in g.edges() {
        if e.from != e.to {
            net.add_edge(2 * e.from + 1, 2 * e.to, inf);
        }
    }
    for s in sources.iter() {
        net.add_edge(src, 2 * s, inf);
    }
    for t in targets.iter() {
        net.add_edge(2 * t + 1, sink, inf);
    }
    net.max_flow(src, sink)
}

/// Minimum-cardinality separating cutset between `sources` and `targets`.
///
/// Ties are broken first by using the fewest source or target nodes, then
/// lexicographically. Sources and targets may themselves be cut, so a
/// cutset always exists.
pub fn min_separating_cutset(g: &WeightedDigraph, sources: &NodeSet, targets: &NodeSet) -> NodeSet {
    let n = g.n();
    let cost = vertex_costs(n, sources, targets);
    let mut removed = vec![false; n];
    let mut remaining = min_cut_cost(g, sources, targets, &cost, &removed);
    let mut chosen = Vec::new();
    for v in 0..n {
        if remaining == 0 {
            break;
        }
        removed[v] = true;
        if min_cut_cost(g, sources, targets, &cost, &removed) + cost[v] == remaining {
            chosen.push(v);
            remaining -= cost[v];
        } else {
            removed[v] = false;
        }
    }
    NodeSet::new(chosen)
}
