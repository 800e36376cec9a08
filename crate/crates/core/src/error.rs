use alloc::string::String;
use alloc::vec::Vec;

use crate::network::Violation;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("opinion {0} is outside [0, 1]")]
    InvalidOpinion(f64),

    #[error("invalid network: {} violation(s), first: {}", .0.len(), .0[0])]
    InvalidNetwork(Vec<Violation>),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("active set is empty")]
    EmptyActiveSet,

    #[error("node {id} is out of range for a network of {n} nodes")]
    NodeOutOfRange { id: usize, n: usize },

    /// Some non-active nodes cannot reach any active node and the policy
    /// forbids redistributing their trust.
    #[error("{count} non-active node(s) cannot reach any active node")]
    StrandedTrust { count: usize },

    #[error("no convergence after {iterations} sweeps (residual trust {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular system: pivot {pivot:e} at column {column}")]
    SingularSystem { column: usize, pivot: f64 },

    #[error("weight vector does not cover exactly the active set")]
    WeightMismatch,

    #[error("weights sum to {total} but the population is {expected}")]
    ConservationViolated { total: f64, expected: f64 },
}
