//! Delegation weights: every individual starts with one unit of trust,
//! non-active individuals pass what they hold along their normalized
//! out-edges, and active individuals keep everything they receive.
//!
//! Two routes compute the same weights. [`compute_weights_iterative`] runs
//! the redistribution sweep by sweep until the trust still in motion drops
//! below a tolerance. [`compute_weights_exact`] treats normalized trusts as
//! transition probabilities of an absorbing chain and solves
//! `(I - Q) X = R` directly, so `weight(a) = 1 + sum_t X[t, a]`.
//!
//! Trust held by a non-active node that has no path to any active node can
//! never be absorbed. [`StrandedPolicy`] decides whether that is an error or
//! whether such trust is shared equally among the active nodes.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{self, Matrix};
use crate::network::{ActiveSet, NodeId, TrustNetwork};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StrandedPolicy {
    /// Fail with [`Error::StrandedTrust`].
    #[default]
    Reject,
    /// Split each stranded unit equally among the active nodes.
    UniformToActive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationConfig {
    /// Sweeps stop once the trust still in motion falls below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub stranded_policy: StrandedPolicy,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig { tolerance: 1e-9, max_iterations: 100_000, stranded_policy: StrandedPolicy::Reject }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidConfig(alloc::format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Split of the non-active nodes by whether their trust can reach an active
/// node along positive-trust edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachabilityPartition {
    pub transient: Vec<NodeId>,
    pub stranded: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    /// One weight per active node, in ascending id order.
    pub weights: Vec<(NodeId, f64)>,
    /// Trust redistributed by [`StrandedPolicy::UniformToActive`].
    pub stranded_mass: f64,
    /// Trust still in motion when iteration stopped; zero for the exact
    /// solver.
    pub residual: f64,
    pub iterations_used: usize,
}

impl WeightVector {
    pub fn get(&self, node: NodeId) -> Option<f64> {
        self.weights
            .binary_search_by_key(&node, |&(id, _)| id)
            .ok()
            .map(|i| self.weights[i].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.weights.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().map(|&(_, w)| w).sum()
    }
}

// Role of each node during propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Active(usize),
    Transient(usize),
    Stranded,
}

pub fn reachability_partition(network: &TrustNetwork, active: &ActiveSet) -> ReachabilityPartition {
    let n = network.len();
    let is_active = active.mask(n);

    // Reverse adjacency over positive edges leaving non-active nodes.
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in network.edges() {
        let (s, t) = (e.source.0, e.target.0);
        if s < n && t < n && !is_active[s] && e.normalized_trust > 0.0 {
            incoming[t].push(s);
        }
    }

    let mut reached = is_active.clone();
    let mut stack: Vec<usize> = active.members().iter().map(|m| m.0).collect();
    while let Some(v) = stack.pop() {
        for &u in &incoming[v] {
            if !reached[u] {
                reached[u] = true;
                stack.push(u);
            }
        }
    }

    let mut partition = ReachabilityPartition { transient: Vec::new(), stranded: Vec::new() };
    for i in 0..n {
        if is_active[i] {
            continue;
        }
        if reached[i] {
            partition.transient.push(NodeId(i));
        } else {
            partition.stranded.push(NodeId(i));
        }
    }
    partition
}

fn roles(n: usize, active: &ActiveSet, partition: &ReachabilityPartition) -> Vec<Role> {
    let mut roles = vec![Role::Stranded; n];
    for (i, m) in active.members().iter().enumerate() {
        roles[m.0] = Role::Active(i);
    }
    for (i, t) in partition.transient.iter().enumerate() {
        roles[t.0] = Role::Transient(i);
    }
    roles
}

fn check_stranded(partition: &ReachabilityPartition, policy: StrandedPolicy) -> Result<(), Error> {
    if policy == StrandedPolicy::Reject && !partition.stranded.is_empty() {
        return Err(Error::StrandedTrust { count: partition.stranded.len() });
    }
    Ok(())
}

fn finish(active: &ActiveSet, mut acc: Vec<f64>, stranded_mass: f64, residual: f64, iterations_used: usize) -> WeightVector {
    if stranded_mass > 0.0 {
        let share = stranded_mass / active.len() as f64;
        for w in &mut acc {
            *w += share;
        }
    }
    WeightVector {
        weights: active.members().iter().copied().zip(acc).collect(),
        stranded_mass,
        residual,
        iterations_used,
    }
}

/// Sweep-by-sweep redistribution of trust.
pub fn compute_weights_iterative(
    network: &TrustNetwork,
    active: &ActiveSet,
    config: &PropagationConfig,
) -> Result<WeightVector, Error> {
    compute_weights_iterative_with(network, active, config, |_, _| {})
}

/// Like [`compute_weights_iterative`], calling `on_sweep(sweep, residual)`
/// after every sweep with the total trust still in motion.
pub fn compute_weights_iterative_with<F>(
    network: &TrustNetwork,
    active: &ActiveSet,
    config: &PropagationConfig,
    mut on_sweep: F,
) -> Result<WeightVector, Error>
where
    F: FnMut(usize, f64),
{
    config.validate()?;
    let partition = reachability_partition(network, active);
    check_stranded(&partition, config.stranded_policy)?;
    let roles = roles(network.len(), active, &partition);

    let mut acc = vec![1.0; active.len()];
    let mut stranded_mass = partition.stranded.len() as f64;
    let mut held = vec![1.0; partition.transient.len()];
    let mut next = vec![0.0; held.len()];
    let mut residual = held.len() as f64;
    let mut sweeps = 0;

    while residual >= config.tolerance {
        if sweeps == config.max_iterations {
            return Err(Error::NoConvergence { iterations: sweeps, residual });
        }
        next.iter_mut().for_each(|v| *v = 0.0);
        for (i, node) in partition.transient.iter().enumerate() {
            let mass = held[i];
            if mass == 0.0 {
                continue;
            }
            for e in network.out_edges(*node) {
                let share = mass * e.normalized_trust;
                match roles[e.target.0] {
                    Role::Active(a) => acc[a] += share,
                    Role::Transient(t) => next[t] += share,
                    Role::Stranded => stranded_mass += share,
                }
            }
        }
        core::mem::swap(&mut held, &mut next);
        residual = held.iter().sum();
        sweeps += 1;
        on_sweep(sweeps, residual);
    }

    Ok(finish(active, acc, stranded_mass, residual, sweeps))
}

/// Closed-form weights from the absorbing-chain linear system.
pub fn compute_weights_exact(
    network: &TrustNetwork,
    active: &ActiveSet,
    stranded_policy: StrandedPolicy,
) -> Result<WeightVector, Error> {
    let partition = reachability_partition(network, active);
    check_stranded(&partition, stranded_policy)?;
    let roles = roles(network.len(), active, &partition);

    let t = partition.transient.len();
    let sink = active.len();
    // lhs = I - Q over transient nodes; rhs = R plus one column collecting
    // flow into stranded nodes.
    let mut lhs = Matrix::zeros(t, t);
    let mut rhs = Matrix::zeros(t, sink + 1);
    for (i, node) in partition.transient.iter().enumerate() {
        *lhs.at_mut(i, i) = 1.0;
        for e in network.out_edges(*node) {
            let w = e.normalized_trust;
            match roles[e.target.0] {
                Role::Active(a) => *rhs.at_mut(i, a) += w,
                Role::Transient(j) => *lhs.at_mut(i, j) -= w,
                Role::Stranded => *rhs.at_mut(i, sink) += w,
            }
        }
    }
    if t > 0 {
        linalg::solve_in_place(&mut lhs, &mut rhs)?;
    }

    let mut acc = vec![1.0; active.len()];
    let mut stranded_mass = partition.stranded.len() as f64;
    for i in 0..t {
        for (a, w) in acc.iter_mut().enumerate() {
            *w += rhs.at(i, a);
        }
        stranded_mass += rhs.at(i, sink);
    }
    Ok(finish(active, acc, stranded_mass, 0.0, 0))
}
