use thiserror::Error;

use crate::netgraph::NodeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("incoming weights of node {node} sum to {sum}, expected 1")]
    RowSum { node: NodeId, sum: f64 },
    #[error("duplicate edge {from} -> {to}")]
    DuplicateEdge { from: NodeId, to: NodeId },
    #[error("node index {index} out of range for {n} nodes")]
    IndexOutOfRange { index: NodeId, n: usize },
    #[error("edge {from} -> {to} has non-positive or non-finite weight {weight}")]
    InvalidWeight { from: NodeId, to: NodeId, weight: f64 },
    #[error("no connected geometric graph after {attempts} attempts; radius too small")]
    ConnectivityFailure { attempts: usize },
    #[error("{what} did not converge within {iterations} iterations")]
    ConvergenceFailure { what: &'static str, iterations: usize },
    #[error("matrix is not positive definite (lambda_min = {lambda_min:e}, lambda_max = {lambda_max:e})")]
    NotPositiveDefinite { lambda_min: f64, lambda_max: f64 },
    #[error("network is not ergodic (irreducible: {irreducible}, period: {period})")]
    NotErgodic { irreducible: bool, period: usize },
    #[error("targets are not controllable at this horizon (lambda_min = {lambda_min:e}, lambda_max = {lambda_max:e})")]
    NotControllable { lambda_min: f64, lambda_max: f64 },
    #[error("projection quadratic form {value:e} is degenerate")]
    DegenerateProjection { value: f64 },
    #[error("node {node} is not influenced by any source within the horizon")]
    NodeUnreachable { node: NodeId },
    #[error("node set does not separate sources from targets")]
    NotACutset,
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch { what: &'static str, expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
