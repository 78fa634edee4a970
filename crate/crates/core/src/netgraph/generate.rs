use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{build_graph, ergodicity, Edge, WeightedDigraph};
use crate::error::{Error, Result};
use crate::kernels::connected_undirected;

pub const MAX_GEOMETRIC_ATTEMPTS: usize = 1000;

/// Random geometric network on the unit square.
///
/// Nodes within Euclidean distance `radius` are linked in both directions,
/// every node carries a self-loop, and each node weighs all of its incoming
/// edges equally. Positions are redrawn from the same seeded stream until the
/// underlying undirected graph is connected.
pub fn random_geometric(n: usize, radius: f64, seed: u64) -> Result<WeightedDigraph> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("geometric network needs n >= 2, got {n}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r2 = radius * radius;
    for _ in 0..MAX_GEOMETRIC_ATTEMPTS {
        let positions: Vec<[f64; 2]> = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
        let near = |i: usize, j: usize| {
            let dx = positions[i][0] - positions[j][0];
            let dy = positions[i][1] - positions[j][1];
            dx * dx + dy * dy <= r2
        };
        let links: Vec<(usize, usize)> =
            (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| near(i, j)).collect();
        if !connected_undirected(n, &links) {
            continue;
        }
        let mut edges = Vec::new();
        for j in 0..n {
            let incoming: Vec<usize> = (0..n).filter(|&i| i == j || near(i, j)).collect();
            let w = 1.0 / incoming.len() as f64;
            edges.extend(incoming.into_iter().map(|i| Edge::new(i, j, w)));
        }
        return build_graph(n, edges)?.with_positions(positions);
    }
    Err(Error::ConnectivityFailure { attempts: MAX_GEOMETRIC_ATTEMPTS })
}

/// Random ergodic digraph with random positive weights, used for property
/// tests and audit populations.
///
/// Off-diagonal edges appear independently with probability 0.35 and
/// self-loops with probability 0.5; draws are repeated until the graph is
/// ergodic.
pub fn random_ergodic(n: usize, seed: u64) -> Result<WeightedDigraph> {
    if n == 0 {
        return Err(Error::InvalidArgument("random network needs n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut edges = Vec::new();
        for j in 0..n {
            let mut incoming: Vec<(usize, f64)> = Vec::new();
            for i in 0..n {
                let p = if i == j { 0.5 } else { 0.35 };
                if rng.random_bool(p) {
                    incoming.push((i, rng.random_range(0.1..1.0)));
                }
            }
            let total: f64 = incoming.iter().map(|(_, w)| w).sum();
            edges.extend(incoming.into_iter().map(|(i, w)| Edge::new(i, j, w / total)));
        }
        if let Ok(g) = build_graph(n, edges) {
            if ergodicity(&g).is_ergodic() {
                return Ok(g);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_is_deterministic_and_ergodic() {
        let a = random_geometric(50, 0.25, 7).unwrap();
        let b = random_geometric(50, 0.25, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n(), 50);
        assert!(ergodicity(&a).is_ergodic());
        for e in a.edges() {
            assert!(a.edges().iter().any(|f| f.from == e.to && f.to == e.from));
        }
    }

    #[test]
    fn geometric_two_nodes_is_complete() {
        let g = random_geometric(2, std::f64::consts::SQRT_2, 99).unwrap();
        let a = g.update_matrix();
        assert!(a.iter().all(|&x| x == 0.5));
    }

    #[test]
    fn geometric_tiny_radius_fails() {
        let err = random_geometric(40, 1e-4, 1).unwrap_err();
        assert!(matches!(err, Error::ConnectivityFailure { attempts: 1000 }));
    }

    #[test]
    fn geometric_rejects_bad_args() {
        assert!(random_geometric(1, 0.5, 0).is_err());
        assert!(random_geometric(5, 0.0, 0).is_err());
    }

    #[test]
    fn random_ergodic_graphs_are_ergodic() {
        for seed in 0..50 {
            let g = random_ergodic(2 + seed as usize % 9, seed).unwrap();
            assert!(ergodicity(&g).is_ergodic());
        }
    }
}
