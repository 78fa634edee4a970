//! Controllability Gramians of the consensus model and their principal
//! submatrices.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::SymMatrix;
use crate::netgraph::{ergodicity, NodeId, NodeSet, WeightedDigraph};

/// Consensus network with actuated source nodes and observed target nodes.
#[derive(Clone, Debug)]
pub struct ConsensusSystem {
    graph: WeightedDigraph,
    sources: NodeSet,
    targets: NodeSet,
    a: DMatrix<f64>,
}

impl ConsensusSystem {
    /// Rejects non-ergodic graphs, an empty source set and out-of-range
    /// nodes. The target set may be empty for source-only analyses.
    pub fn new(graph: WeightedDigraph, sources: NodeSet, targets: NodeSet) -> Result<Self> {
        let n = graph.n();
        sources.validate(n)?;
        targets.validate(n)?;
        if sources.is_empty() {
            return Err(Error::InvalidArgument("at least one source node is required".into()));
        }
        let report = ergodicity(&graph);
        if !report.is_ergodic() {
            return Err(Error::NotErgodic { irreducible: report.irreducible, period: report.period });
        }
        let a = graph.update_matrix();
        Ok(Self { graph, sources, targets, a })
    }

    pub fn graph(&self) -> &WeightedDigraph {
        &self.graph
    }

    pub fn sources(&self) -> &NodeSet {
        &self.sources
    }

    pub fn targets(&self) -> &NodeSet {
        &self.targets
    }

    pub fn with_targets(&self, targets: NodeSet) -> Result<Self> {
        targets.validate(self.n())?;
        Ok(Self { targets, ..self.clone() })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn m(&self) -> usize {
        self.sources.len()
    }

    pub fn p(&self) -> usize {
        self.targets.len()
    }

    /// Row-stochastic update matrix.
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// `n x m` source indicator columns.
    pub fn b(&self) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.n(), self.m());
        for (col, s) in self.sources.iter().enumerate() {
            b[(s, col)] = 1.0;
        }
        b
    }

    /// `p x n` target indicator rows.
    pub fn c(&self) -> DMatrix<f64> {
        let mut c = DMatrix::zeros(self.p(), self.n());
        for (row, t) in self.targets.iter().enumerate() {
            c[(row, t)] = 1.0;
        }
        c
    }

    /// `A x` over the edge list.
    pub(crate) fn step(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        for e in self.graph.edges() {
            out[e.to] += e.weight * x[e.from];
        }
        out
    }

    /// `A^T v` over the edge list.
    pub(crate) fn step_transpose(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        for e in self.graph.edges() {
            out[e.from] += e.weight * v[e.to];
        }
        out
    }
}

/// Gramian `W(k_f) = sum_{i < k_f} (A^i B)(A^i B)^T`.
#[derive(Clone, Debug)]
pub struct GramianBundle {
    pub horizon: usize,
    pub w: SymMatrix,
}

impl GramianBundle {
    pub fn submatrix(&self, b_set: &NodeSet) -> SymMatrix {
        self.w.principal_submatrix(b_set.as_slice())
    }
}

fn require_horizon(k_f: usize) -> Result<()> {
    if k_f == 0 {
        return Err(Error::InvalidArgument("horizon k_f must be at least 1".into()));
    }
    Ok(())
}

/// Accumulates the Gramian term by term, propagating `A^i B` one column at
/// a time.
pub fn compute_gramian(sys: &ConsensusSystem, k_f: usize) -> Result<GramianBundle> {
    require_horizon(k_f)?;
    let n = sys.n();
    let mut w = DMatrix::<f64>::zeros(n, n);
    let mut columns: Vec<Vec<f64>> = sys
        .sources
        .iter()
        .map(|s| {
            let mut e = vec![0.0; n];
            e[s] = 1.0;
            e
        })
        .collect();
    for i in 0..k_f {
        for x in &columns {
            for (r, &xr) in x.iter().enumerate() {
                if xr == 0.0 {
                    continue;
                }
                for (c, &xc) in x.iter().enumerate() {
                    w[(r, c)] += xr * xc;
                }
            }
        }
        if i + 1 < k_f {
            for x in columns.iter_mut() {
                *x = sys.step(x);
            }
        }
    }
    Ok(GramianBundle { horizon: k_f, w: SymMatrix::symmetrized(w) })
}

pub fn gramian_submatrix(bundle: &GramianBundle, b_set: &NodeSet) -> Result<SymMatrix> {
    if b_set.is_empty() {
        return Err(Error::InvalidArgument("node set must be nonempty".into()));
    }
    b_set.validate(bundle.w.order())?;
    Ok(bundle.submatrix(b_set))
}

/// State of node `l` over `k = 0..k_f` after a unit impulse enters at source `z`,
/// i.e. `[A^k]_{l z}`.
pub fn impulse_response(sys: &ConsensusSystem, z: NodeId, l: NodeId, k_f: usize) -> Result<Vec<f64>> {
    if !sys.sources.contains(z) {
        return Err(Error::InvalidArgument(format!("node {z} is not a source")));
    }
    if l >= sys.n() {
        return Err(Error::IndexOutOfRange { index: l, n: sys.n() });
    }
    Ok(impulse_responses(sys, z, k_f).into_iter().map(|x| x[l]).collect())
}

fn impulse_responses(sys: &ConsensusSystem, z: NodeId, k_f: usize) -> Vec<Vec<f64>> {
    let mut x = vec![0.0; sys.n()];
    x[z] = 1.0;
    let mut out = Vec::with_capacity(k_f);
    for _ in 0..k_f {
        let next = sys.step(&x);
        out.push(x);
        x = next;
    }
    out
}

/// Gramian submatrix assembled from inner products of impulse responses.
pub fn gramian_from_impulses(sys: &ConsensusSystem, b_set: &NodeSet, k_f: usize) -> Result<SymMatrix> {
    require_horizon(k_f)?;
    b_set.validate(sys.n())?;
    let idx = b_set.as_slice();
    let k = idx.len();
    let mut q = DMatrix::<f64>::zeros(k, k);
    for z in sys.sources.iter() {
        let h = impulse_responses(sys, z, k_f);
        for a in 0..k {
            for b in 0..k {
                q[(a, b)] += h.iter().map(|x| x[idx[a]] * x[idx[b]]).sum::<f64>();
            }
        }
    }
    Ok(SymMatrix::symmetrized(q))
}

/// Smallest horizon `k*` such that `[A^{k*-1}]_{l z} > 0` for every source
/// `z` and every `l` in `b_set`, found by boolean reachability.
pub fn min_positive_horizon(sys: &ConsensusSystem, b_set: &NodeSet) -> usize {
    let n = sys.n();
    let bound = (n - 1) * (n - 1) + 1;
    let mut support: Vec<Vec<bool>> = sys
        .sources
        .iter()
        .map(|z| {
            let mut s = vec![false; n];
            s[z] = true;
            s
        })
        .collect();
    for step in 0..=bound {
        if support.iter().all(|s| b_set.iter().all(|l| s[l])) {
            return step + 1;
        }
        for s in support.iter_mut() {
            let mut next = vec![false; n];
            for e in sys.graph.edges() {
                if s[e.from] {
                    next[e.to] = true;
                }
            }
            *s = next;
        }
    }
    bound + 2
}

pub const PERRON_TOL: f64 = 1e-13;
pub const PERRON_MAX_ITER: usize = 1_000_000;

/// Left Perron vector of `A`, normalized to sum one, by power iteration on
/// `A^T`.
pub fn left_perron(sys: &ConsensusSystem) -> Result<Vec<f64>> {
    let n = sys.n();
    let mut w = vec![1.0 / n as f64; n];
    for _ in 0..PERRON_MAX_ITER {
        let mut next = sys.step_transpose(&w);
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let delta = next.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        w = next;
        if delta < PERRON_TOL {
            return Ok(w);
        }
    }
    Err(Error::ConvergenceFailure { what: "left Perron power iteration", iterations: PERRON_MAX_ITER })
}

/// `Q = k_f (sum_{i in S} w_i^2) 11^T + H`.
#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticDecomposition {
    pub perron_weight: f64,
    pub rank_one_coefficient: f64,
    #[serde(skip)]
    pub residual: SymMatrix,
    pub residual_bound: f64,
}

/// Sum of squared Perron entries over the sources.
pub fn perron_weight(sys: &ConsensusSystem, perron: &[f64]) -> f64 {
    sys.sources.iter().map(|s| perron[s] * perron[s]).sum()
}

pub fn asymptotic_decomposition(sys: &ConsensusSystem, b_set: &NodeSet, k_f: usize) -> Result<AsymptoticDecomposition> {
    let perron = left_perron(sys)?;
    let q = gramian_submatrix(&compute_gramian(sys, k_f)?, b_set)?;
    Ok(decompose(&q, perron_weight(sys, &perron), k_f))
}

pub(crate) fn decompose(q: &SymMatrix, perron_weight: f64, k_f: usize) -> AsymptoticDecomposition {
    let coef = k_f as f64 * perron_weight;
    let h = q.matrix().map(|x| x - coef);
    let residual_bound = h.amax();
    AsymptoticDecomposition {
        perron_weight,
        rank_one_coefficient: coef,
        residual: SymMatrix::symmetrized(h),
        residual_bound,
    }
}
