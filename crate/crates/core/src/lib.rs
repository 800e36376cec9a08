//! Proxy decision-making over a directed trust network.
//!
//! Every individual holds an opinion in `[0, 1]` and spreads one unit of
//! trust over the peers it trusts. A decision is made by a subset of active
//! representatives; each non-active individual's unit travels along trust
//! edges until an active node absorbs it. The resulting delegation weights
//! turn the plain average of representatives' opinions into a weighted
//! average meant to stand in for the whole population.
//!
//! The crate is `no_std` (it needs `alloc`) and does no IO. File formats,
//! the command-line front end and a parallel experiment runner live in the
//! `trustvote` crate.
//!
//! ```
//! use trustvote_core::{ActiveSet, NodeId, PropagationConfig, TrustNetwork};
//! use trustvote_core::{delegation, decision};
//!
//! // A trusts B fully; B splits its trust 1:3 between C and D.
//! let net = TrustNetwork::new(
//!     vec![0.8, 0.8, 0.5, 0.9],
//!     vec![(0, 1, 1.0), (1, 2, 0.25), (1, 3, 0.75)],
//! )
//! .unwrap();
//! let active = ActiveSet::new([2, 3].map(NodeId), net.len()).unwrap();
//! let weights = delegation::compute_weights_exact(
//!     &net,
//!     &active,
//!     PropagationConfig::default().stranded_policy,
//! )
//! .unwrap();
//! assert!((weights.get(NodeId(2)).unwrap() - 1.5).abs() < 1e-12);
//!
//! let report = decision::evaluate(&net, &active, Some(&weights)).unwrap();
//! assert!(report.error_weighted.unwrap() < 1e-12);
//! ```
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod decision;
pub mod delegation;
mod error;
mod linalg;
pub mod network;
pub mod simulation;

pub use decision::DecisionReport;
pub use delegation::{PropagationConfig, ReachabilityPartition, StrandedPolicy, WeightVector};
pub use error::Error;
pub use network::{ActiveSet, NodeId, Opinion, TrustEdge, TrustNetwork, Violation};
pub use simulation::{ExperimentConfig, ExperimentResult, SizeStats, Solver, TrialOutcome};
