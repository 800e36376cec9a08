//! Individuals, opinions and the directed trust network between them.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::index;
use rand::Rng;

use crate::Error;

/// Dense index of an individual, `0 <= id < n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// An opinion value in the closed interval `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Opinion(f64);

impl Opinion {
    pub fn new(value: f64) -> Result<Self, Error> {
        if (0.0..=1.0).contains(&value) {
            Ok(Opinion(value))
        } else {
            Err(Error::InvalidOpinion(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Trust that holder of opinion `p` places in holder of opinion `q`:
/// `1 - |p - q|`. Symmetric, and always within `[0, 1]`.
pub fn trust_value(p: Opinion, q: Opinion) -> f64 {
    1.0 - (p.0 - q.0).abs()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrustEdge {
    pub source: NodeId,
    pub target: NodeId,
    /// Trust as given, in `[0, 1]`.
    pub raw_trust: f64,
    /// Share of the source's total outgoing raw trust. Zero on the edges of
    /// dangling nodes.
    pub normalized_trust: f64,
}

/// A structural problem found by [`validate_network`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    OpinionOutOfRange { node: NodeId, value: f64 },
    SourceOutOfRange { source: NodeId, target: NodeId },
    TargetOutOfRange { source: NodeId, target: NodeId },
    SelfLoop { node: NodeId },
    TrustOutOfRange { source: NodeId, target: NodeId, value: f64 },
    DuplicateEdge { source: NodeId, target: NodeId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::OpinionOutOfRange { node, value } => {
                write!(f, "node {node}: opinion {value} outside [0, 1]")
            }
            Violation::SourceOutOfRange { source, target } => {
                write!(f, "edge {source}->{target}: source {source} does not exist")
            }
            Violation::TargetOutOfRange { source, target } => {
                write!(f, "edge {source}->{target}: target {target} does not exist")
            }
            Violation::SelfLoop { node } => write!(f, "node {node}: self-loop edge"),
            Violation::TrustOutOfRange { source, target, value } => {
                write!(f, "edge {source}->{target}: trust {value} outside [0, 1]")
            }
            Violation::DuplicateEdge { source, target } => {
                write!(f, "edge {source}->{target}: duplicate")
            }
        }
    }
}

/// Directed trust network over `n` individuals.
///
/// Edges are kept sorted by `(source, target)`. Normalized trusts are
/// always recomputed from the raw values, so a network built from any raw
/// trusts is ready for propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustNetwork {
    opinions: Vec<f64>,
    edges: Vec<TrustEdge>,
    // offsets[i]..offsets[i + 1] is the out-edge range of node i. Edges whose
    // source is out of range sort past offsets[n] and belong to no node.
    offsets: Vec<usize>,
    dangling: Vec<NodeId>,
}

impl TrustNetwork {
    /// Builds a network from opinions and `(source, target, raw_trust)`
    /// triples, rejecting it if any structural invariant fails.
    pub fn new<I>(opinions: Vec<f64>, edges: I) -> Result<Self, Error>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let net = Self::from_parts_unchecked(opinions, edges);
        let violations = validate_network(&net);
        if violations.is_empty() {
            Ok(net)
        } else {
            Err(Error::InvalidNetwork(violations))
        }
    }

    /// Same as [`TrustNetwork::new`] without validation. Use
    /// [`validate_network`] to list what is wrong with the result.
    pub fn from_parts_unchecked<I>(opinions: Vec<f64>, edges: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut edges: Vec<TrustEdge> = edges
            .into_iter()
            .map(|(s, t, raw)| TrustEdge {
                source: NodeId(s),
                target: NodeId(t),
                raw_trust: raw,
                normalized_trust: 0.0,
            })
            .collect();
        edges.sort_by_key(|e| (e.source, e.target));
        let net = TrustNetwork { opinions, edges, offsets: Vec::new(), dangling: Vec::new() };
        normalize_outgoing(net).0
    }

    pub fn len(&self) -> usize {
        self.opinions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.opinions.is_empty()
    }

    pub fn opinion(&self, node: NodeId) -> f64 {
        self.opinions[node.0]
    }

    pub fn opinions(&self) -> &[f64] {
        &self.opinions
    }

    /// All edges, sorted by `(source, target)`.
    pub fn edges(&self) -> &[TrustEdge] {
        &self.edges
    }

    pub fn out_edges(&self, node: NodeId) -> &[TrustEdge] {
        &self.edges[self.offsets[node.0]..self.offsets[node.0 + 1]]
    }

    /// Nodes with no outgoing trust to hand on: no out-edges, or a
    /// non-positive raw total.
    pub fn dangling(&self) -> &[NodeId] {
        &self.dangling
    }
}

/// Recomputes every node's normalized out-distribution from its raw trusts
/// and reports the dangling nodes, which get no distribution at all.
pub fn normalize_outgoing(network: TrustNetwork) -> (TrustNetwork, Vec<NodeId>) {
    let TrustNetwork { opinions, mut edges, .. } = network;
    let n = opinions.len();

    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    for i in 0..n {
        let start = offsets[i];
        let len = edges[start..].partition_point(|e| e.source.0 == i);
        offsets.push(start + len);
    }

    let mut dangling = Vec::new();
    for i in 0..n {
        let out = &mut edges[offsets[i]..offsets[i + 1]];
        let total: f64 = out.iter().map(|e| e.raw_trust).sum();
        if total > 0.0 {
            for e in out.iter_mut() {
                e.normalized_trust = e.raw_trust / total;
            }
        } else {
            for e in out.iter_mut() {
                e.normalized_trust = 0.0;
            }
            dangling.push(NodeId(i));
        }
    }
    for e in &mut edges[offsets[n]..] {
        e.normalized_trust = 0.0;
    }

    let net = TrustNetwork { opinions, edges, offsets, dangling: dangling.clone() };
    (net, dangling)
}

/// Lists every broken invariant of `network`; empty when it is valid.
pub fn validate_network(network: &TrustNetwork) -> Vec<Violation> {
    let n = network.len();
    let mut out = Vec::new();
    for (i, &value) in network.opinions.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            out.push(Violation::OpinionOutOfRange { node: NodeId(i), value });
        }
    }
    let mut prev: Option<(NodeId, NodeId)> = None;
    for e in &network.edges {
        let (source, target) = (e.source, e.target);
        if source.0 >= n {
            out.push(Violation::SourceOutOfRange { source, target });
        }
        if target.0 >= n {
            out.push(Violation::TargetOutOfRange { source, target });
        }
        if source == target {
            out.push(Violation::SelfLoop { node: source });
        }
        if !(0.0..=1.0).contains(&e.raw_trust) {
            out.push(Violation::TrustOutOfRange { source, target, value: e.raw_trust });
        }
        if prev == Some((source, target)) {
            out.push(Violation::DuplicateEdge { source, target });
        }
        prev = Some((source, target));
    }
    out
}

/// Random network of `n` individuals with uniform opinions in `[0, 1)`,
/// each trusting exactly `k` distinct others picked uniformly at random.
/// Edge trust follows [`trust_value`].
pub fn generate_network<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<TrustNetwork, Error> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("network needs at least 2 nodes, got {n}")));
    }
    if k == 0 || k > n - 1 {
        return Err(Error::InvalidConfig(format!("out-degree {k} must be within 1..={}", n - 1)));
    }

    let opinions: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let mut edges = Vec::with_capacity(n * k);
    for source in 0..n {
        let mut targets: Vec<usize> = index::sample(rng, n - 1, k)
            .into_iter()
            .map(|t| if t >= source { t + 1 } else { t })
            .collect();
        targets.sort_unstable();
        let p = Opinion(opinions[source]);
        edges.extend(targets.into_iter().map(|t| (source, t, trust_value(p, Opinion(opinions[t])))));
    }
    Ok(TrustNetwork::from_parts_unchecked(opinions, edges))
}

/// The representatives taking part in a decision: a non-empty set of node
/// ids, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ActiveSet {
    members: Vec<NodeId>,
}

impl ActiveSet {
    /// Duplicate ids are merged.
    pub fn new<I: IntoIterator<Item = NodeId>>(ids: I, n: usize) -> Result<Self, Error> {
        let mut members: Vec<NodeId> = ids.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if members.is_empty() {
            return Err(Error::EmptyActiveSet);
        }
        if let Some(&last) = members.last() {
            if last.0 >= n {
                return Err(Error::NodeOutOfRange { id: last.0, n });
            }
        }
        Ok(ActiveSet { members })
    }

    /// Every node of an `n`-node network.
    pub fn all(n: usize) -> Result<Self, Error> {
        Self::new((0..n).map(NodeId), n)
    }

    /// `size` distinct nodes drawn uniformly without replacement.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, n: usize, size: usize) -> Result<Self, Error> {
        if size == 0 || size > n {
            return Err(Error::InvalidConfig(format!("active size {size} must be within 1..={n}")));
        }
        Self::new(index::sample(rng, n, size).into_iter().map(NodeId), n)
    }

    pub fn members(&self) -> &[NodeId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.members.binary_search(&node).is_ok()
    }

    /// Membership flags for an `n`-node network.
    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut mask = alloc::vec![false; n];
        for m in &self.members {
            mask[m.0] = true;
        }
        mask
    }
}
