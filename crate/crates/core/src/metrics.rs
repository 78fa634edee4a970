//! Target-control quantities computed from the target Gramian.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gramian::{compute_gramian, ConsensusSystem};
use crate::kernels::{pd_threshold, solve_spd, sym_eig, EigenPairs, SymMatrix};
use crate::netgraph::{NodeId, NodeSet};

/// Diagonal Gramian entries at or below this are structurally zero: the node
/// is not influenced by any source within the horizon.
pub const UNREACHABLE_TOL: f64 = 1e-14;

/// Degenerate-projection threshold relative to `lambda_max`.
pub const PROJECTION_TOL: f64 = 1e-14;

/// Open-loop input sequence `u[0..k_f]`, one vector of length `m` per step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InputSequence {
    pub horizon: usize,
    pub inputs: Vec<Vec<f64>>,
    pub energy: f64,
}

impl InputSequence {
    pub fn new(inputs: Vec<Vec<f64>>) -> Self {
        let energy = energy_of(&inputs);
        Self { horizon: inputs.len(), inputs, energy }
    }

    pub fn zeros(horizon: usize, m: usize) -> Self {
        Self::new(vec![vec![0.0; m]; horizon])
    }

    pub fn recomputed_energy(&self) -> f64 {
        energy_of(&self.inputs)
    }

    pub fn min_entry(&self) -> f64 {
        self.inputs.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }
}

fn energy_of(inputs: &[Vec<f64>]) -> f64 {
    inputs.iter().flatten().map(|x| x * x).sum()
}

/// Summary of target controllability and security at one horizon.
#[derive(Clone, Debug, Serialize)]
pub struct MetricsReport {
    pub kf: usize,
    pub controllable: bool,
    pub lambda_min: f64,
    pub lambda_max: f64,
    #[serde(rename = "E_min")]
    pub e_min: Option<f64>,
    pub y_min: Option<Vec<f64>>,
    #[serde(rename = "F_min")]
    pub f_min: f64,
    pub j_min: usize,
    /// `None` for nodes not yet influenced at this horizon.
    pub node_energies: Vec<Option<f64>>,
}

/// Controllability verdict with its spectral witness.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Controllability {
    pub controllable: bool,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

pub fn target_gramian(sys: &ConsensusSystem, k_f: usize) -> Result<SymMatrix> {
    if sys.targets().is_empty() {
        return Err(Error::InvalidArgument("target set is empty".into()));
    }
    Ok(compute_gramian(sys, k_f)?.submatrix(sys.targets()))
}

pub fn controllability_of(eig: &EigenPairs) -> Controllability {
    let (lambda_min, lambda_max) = (eig.lambda_min(), eig.lambda_max());
    Controllability { controllable: lambda_min > pd_threshold(lambda_max), lambda_min, lambda_max }
}

pub fn target_controllable(sys: &ConsensusSystem, k_f: usize) -> Result<Controllability> {
    Ok(controllability_of(&sym_eig(&target_gramian(sys, k_f)?)?))
}

fn require_controllable(q: &SymMatrix) -> Result<EigenPairs> {
    let eig = sym_eig(q)?;
    let c = controllability_of(&eig);
    if !c.controllable {
        return Err(Error::NotControllable { lambda_min: c.lambda_min, lambda_max: c.lambda_max });
    }
    Ok(eig)
}

fn check_len(v: &[f64], p: usize, what: &'static str) -> Result<()> {
    if v.len() != p {
        return Err(Error::DimensionMismatch { what, expected: p, got: v.len() });
    }
    Ok(())
}

/// `ybar^T Q^{-1} ybar` for an invertible target Gramian `q`.
pub fn energy_on(q: &SymMatrix, ybar: &[f64]) -> Result<f64> {
    check_len(ybar, q.order(), "goal vector")?;
    require_controllable(q)?;
    let x = solve_spd(q, ybar)?;
    Ok(ybar.iter().zip(&x).map(|(a, b)| a * b).sum())
}

/// Minimum energy to steer the targets from rest to `ybar` in `k_f` steps.
pub fn target_control_energy(sys: &ConsensusSystem, k_f: usize, ybar: &[f64]) -> Result<f64> {
    energy_on(&target_gramian(sys, k_f)?, ybar)
}

/// Back-propagates a target-space weight vector `c^T`-style:
/// `u[i] = B^T (A^T)^{k_f-1-i} C^T weights`.
pub(crate) fn input_from_target_weights(sys: &ConsensusSystem, k_f: usize, weights: &[f64]) -> InputSequence {
    let mut v = vec![0.0; sys.n()];
    for (t, &x) in sys.targets().iter().zip(weights) {
        v[t] = x;
    }
    let mut inputs = vec![Vec::new(); k_f];
    for slot in inputs.iter_mut().rev() {
        *slot = sys.sources().iter().map(|s| v[s]).collect();
        v = sys.step_transpose(&v);
    }
    InputSequence::new(inputs)
}

/// Minimum-energy input reaching `ybar` at `k_f`.
pub fn optimal_target_input(sys: &ConsensusSystem, k_f: usize, ybar: &[f64]) -> Result<InputSequence> {
    let q = target_gramian(sys, k_f)?;
    check_len(ybar, q.order(), "goal vector")?;
    require_controllable(&q)?;
    let x = solve_spd(&q, ybar)?;
    Ok(input_from_target_weights(sys, k_f, &x))
}

/// `(E_min, y_min)` from an invertible target Gramian.
pub fn security_on(q: &SymMatrix) -> Result<(f64, Vec<f64>)> {
    let eig = require_controllable(q)?;
    Ok((1.0 / eig.lambda_max(), eig.dominant_vector()))
}

/// Target security `1/lambda_max` and the minimally-secure unit goal.
pub fn target_security(sys: &ConsensusSystem, k_f: usize) -> Result<(f64, Vec<f64>)> {
    security_on(&target_gramian(sys, k_f)?)
}

/// `1 / (alpha^T Q alpha)`; needs no invertibility.
pub fn projection_energy_on(q: &SymMatrix, lambda_max: f64, alpha: &[f64]) -> Result<f64> {
    check_len(alpha, q.order(), "projection vector")?;
    let form = q.quadratic_form(alpha);
    if form <= PROJECTION_TOL * lambda_max {
        return Err(Error::DegenerateProjection { value: form });
    }
    Ok(1.0 / form)
}

pub fn projection_energy(sys: &ConsensusSystem, k_f: usize, alpha: &[f64]) -> Result<f64> {
    let q = target_gramian(sys, k_f)?;
    let lmax = sym_eig(&q)?.lambda_max();
    projection_energy_on(&q, lmax, alpha)
}

/// Minimum-energy input driving `alpha^T y[k_f]` to one.
pub fn optimal_projection_input(sys: &ConsensusSystem, k_f: usize, alpha: &[f64]) -> Result<InputSequence> {
    let q = target_gramian(sys, k_f)?;
    let lmax = sym_eig(&q)?.lambda_max();
    let f = projection_energy_on(&q, lmax, alpha)?;
    let weights: Vec<f64> = alpha.iter().map(|a| a * f).collect();
    Ok(input_from_target_weights(sys, k_f, &weights))
}

/// Largest diagonal entry and its first index.
pub(crate) fn max_diagonal(q: &SymMatrix) -> (f64, usize) {
    q.diagonal()
        .into_iter()
        .enumerate()
        .fold((f64::NEG_INFINITY, 0), |(best, j), (i, d)| if d > best { (d, i) } else { (best, j) })
}

/// `(F_min, j_min)` from a target Gramian. `F_min` is infinite when no
/// target is reachable.
pub fn projection_security_on(q: &SymMatrix) -> (f64, usize) {
    let (d, j) = max_diagonal(q);
    (1.0 / d, j)
}

pub fn projection_security(sys: &ConsensusSystem, k_f: usize) -> Result<(f64, usize)> {
    Ok(projection_security_on(&target_gramian(sys, k_f)?))
}

/// `1 / W_cc` from a full Gramian.
pub fn node_energy_on(w: &SymMatrix, c: NodeId) -> Result<f64> {
    if c >= w.order() {
        return Err(Error::IndexOutOfRange { index: c, n: w.order() });
    }
    let d = w.get(c, c);
    if d <= UNREACHABLE_TOL {
        return Err(Error::NodeUnreachable { node: c });
    }
    Ok(1.0 / d)
}

/// Minimum energy to drive node `c` alone to one.
pub fn node_energy(sys: &ConsensusSystem, k_f: usize, c: NodeId) -> Result<f64> {
    node_energy_on(&compute_gramian(sys, k_f)?.w, c)
}

/// `min_{c in C} E_c`, skipping unreachable nodes unless all are.
pub fn cutset_energy_on(w: &SymMatrix, cutset: &NodeSet) -> Result<f64> {
    if cutset.is_empty() {
        return Err(Error::InvalidArgument("cutset must be nonempty".into()));
    }
    cutset.validate(w.order())?;
    cutset
        .iter()
        .filter_map(|c| node_energy_on(w, c).ok())
        .reduce(f64::min)
        .ok_or(Error::NodeUnreachable { node: cutset.as_slice()[0] })
}

pub fn cutset_energy(sys: &ConsensusSystem, k_f: usize, cutset: &NodeSet) -> Result<f64> {
    cutset_energy_on(&compute_gramian(sys, k_f)?.w, cutset)
}

/// Target security with every node a target: `1 / lambda_max(W)`.
pub fn full_target_security(sys: &ConsensusSystem, k_f: usize) -> Result<f64> {
    Ok(1.0 / sym_eig(&compute_gramian(sys, k_f)?.w)?.lambda_max())
}

pub fn metrics_report(sys: &ConsensusSystem, k_f: usize) -> Result<MetricsReport> {
    let bundle = compute_gramian(sys, k_f)?;
    if sys.targets().is_empty() {
        return Err(Error::InvalidArgument("target set is empty".into()));
    }
    let q = bundle.submatrix(sys.targets());
    let eig = sym_eig(&q)?;
    let ctrl = controllability_of(&eig);
    let (e_min, y_min) = if ctrl.controllable {
        (Some(1.0 / eig.lambda_max()), Some(eig.dominant_vector()))
    } else {
        (None, None)
    };
    let (f_min, j_min) = projection_security_on(&q);
    let node_energies = (0..sys.n()).map(|c| node_energy_on(&bundle.w, c).ok()).collect();
    Ok(MetricsReport {
        kf: k_f,
        controllable: ctrl.controllable,
        lambda_min: ctrl.lambda_min,
        lambda_max: ctrl.lambda_max,
        e_min,
        y_min,
        f_min,
        j_min,
        node_energies,
    })
}
