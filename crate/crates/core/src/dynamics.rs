//! Forward simulation of `x[k+1] = A x[k] + B u[k]`, `y[k] = C x[k]`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gramian::ConsensusSystem;
use crate::metrics::{optimal_target_input, target_control_energy, InputSequence};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub states: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
}

pub fn simulate(sys: &ConsensusSystem, x0: &[f64], inputs: &InputSequence) -> Result<Trajectory> {
    let (n, m) = (sys.n(), sys.m());
    if x0.len() != n {
        return Err(Error::DimensionMismatch { what: "initial state", expected: n, got: x0.len() });
    }
    if let Some(bad) = inputs.inputs.iter().find(|u| u.len() != m) {
        return Err(Error::DimensionMismatch { what: "input vector", expected: m, got: bad.len() });
    }
    let a = sys.a();
    let observe = |x: &[f64]| sys.targets().iter().map(|t| x[t]).collect::<Vec<_>>();
    let mut states = Vec::with_capacity(inputs.horizon + 1);
    let mut outputs = Vec::with_capacity(inputs.horizon + 1);
    let mut x = x0.to_vec();
    for u in &inputs.inputs {
        let mut next: Vec<f64> = (0..n).map(|j| (0..n).fold(0.0, |acc, i| acc + a[(j, i)] * x[i])).collect();
        for (s, uk) in sys.sources().iter().zip(u) {
            next[s] += uk;
        }
        outputs.push(observe(&x));
        states.push(std::mem::replace(&mut x, next));
    }
    outputs.push(observe(&x));
    states.push(x);
    Ok(Trajectory { states, outputs })
}

/// Closed-loop check of the optimal target input.
#[derive(Clone, Debug, Serialize)]
pub struct Verification {
    pub achieved: Vec<f64>,
    pub goal_error: f64,
    pub energy: f64,
    pub energy_error: f64,
}

pub fn verify_optimal_input(sys: &ConsensusSystem, k_f: usize, ybar: &[f64]) -> Result<Verification> {
    let u = optimal_target_input(sys, k_f, ybar)?;
    let expected = target_control_energy(sys, k_f, ybar)?;
    let traj = simulate(sys, &vec![0.0; sys.n()], &u)?;
    let achieved = traj.outputs.last().cloned().unwrap_or_default();
    let diff: f64 = achieved.iter().zip(ybar).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let norm: f64 = ybar.iter().map(|x| x * x).sum::<f64>().sqrt();
    let energy = u.recomputed_energy();
    Ok(Verification {
        achieved,
        goal_error: diff / norm.max(1.0),
        energy,
        energy_error: (energy - expected).abs() / expected.max(1.0),
    })
}
