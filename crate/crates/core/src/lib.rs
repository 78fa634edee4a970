//! Controllability Gramians and target-control metrics for discrete-time
//! network consensus models `x[k+1] = A x[k] + B u[k]`, `y[k] = C x[k]`,
//! with `A` row-stochastic and ergodic.
//!
//! * [`netgraph`]: weighted digraphs, ergodicity, separating cutsets, generators.
//! * [`kernels`]: symmetric eigendecomposition, SPD solves and inverses.
//! * [`gramian`]: Gramians, principal submatrices, impulse responses, Perron vector.
//! * [`metrics`]: target-control energies, optimal inputs and security metrics.
//! * [`dynamics`]: forward simulation and closed-loop verification.
//! * [`audit`]: numeric checks of the structural Gramian properties.
//! * [`io`]: network JSON and CSV formats.

pub mod audit;
pub mod dynamics;
pub mod error;
pub mod gramian;
pub mod io;
pub mod kernels;
pub mod metrics;
pub mod netgraph;

pub use audit::{AuditReport, Check, NegativeInverseGraph};
pub use dynamics::{simulate, verify_optimal_input, Trajectory, Verification};
pub use error::{Error, Result};
pub use gramian::{AsymptoticDecomposition, ConsensusSystem, GramianBundle};
pub use kernels::{EigenPairs, SymMatrix};
pub use metrics::{InputSequence, MetricsReport};
pub use netgraph::{Edge, ErgodicityReport, NodeId, NodeSet, WeightedDigraph};
