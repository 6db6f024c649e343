//! Sparse thresholded graph over the scenario nodes, with binary
//! activation states and bipartite overlap analysis.
//!
//! The graph is built once from channel gains: an edge exists between an
//! edge terminal and any other node (including other edge terminals) when
//! the steered link gain reaches the construction threshold. Activation
//! patterns never delete edges from the built set; they only hide edges
//! whose endpoints are not both active, so patterns are cheap to apply
//! and fully reversible.

use std::collections::HashSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::channel::{link_gain, ChannelParams};
use crate::error::{Error, Result};
use crate::scenario::{Node, NodeId, NodeRole, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    /// The endpoints can sustain a reliable link.
    Connectivity,
    /// The endpoints are expected to interfere significantly.
    Interference,
}

impl std::fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EdgeKind::Connectivity => f.write_str("connectivity"),
            EdgeKind::Interference => f.write_str("interference"),
        }
    }
}

/// Undirected edge. Stored with `a < b`; `gain_db` is the steered link
/// gain at construction time and `distance_m` the Euclidean distance,
/// which doubles as the routing weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub kind: EdgeKind,
    pub gain_db: f64,
    pub distance_m: f64,
}

impl Edge {
    /// The endpoint that is not `id`.
    pub fn other(&self, id: NodeId) -> NodeId {
        if self.a == id {
            self.b
        } else {
            self.a
        }
    }
}

/// Per-node activation flags covering exactly the graph's node ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivationPattern(Vec<bool>);

impl ActivationPattern {
    pub fn all_active(n: usize) -> Self {
        Self(vec![true; n])
    }

    /// Build from an explicit id -> state map. The map must cover every
    /// id in `0..n` exactly.
    pub fn from_map(states: &std::collections::HashMap<u32, bool>, n: usize) -> Result<Self> {
        if states.len() != n {
            return Err(Error::ContractViolation(format!(
                "activation pattern covers {} ids, graph has {} nodes",
                states.len(),
                n
            )));
        }
        let mut flags = vec![false; n];
        for (&id, &state) in states {
            let idx = id as usize;
            if idx >= n {
                return Err(Error::ContractViolation(format!("unknown node id {id} in pattern")));
            }
            flags[idx] = state;
        }
        Ok(Self(flags))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, id: NodeId) -> bool {
        self.0[id.index()]
    }

    pub fn set(&mut self, id: NodeId, active: bool) {
        self.0[id.index()] = active;
    }

    pub fn with(&self, id: NodeId, active: bool) -> Self {
        let mut out = self.clone();
        out.set(id, active);
        out
    }

    pub fn count_active(&self) -> usize {
        self.0.iter().filter(|&&a| a).count()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }
}

#[derive(Debug)]
struct BuiltEdges {
    edges: Vec<Edge>,
    /// Indices into `edges`, per node.
    incident: Vec<Vec<u32>>,
}

/// Degree and connectivity statistics over active nodes and live edges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub n_active_nodes: usize,
    pub n_live_edges: usize,
    pub mean_degree: f64,
    pub min_degree: u32,
    pub max_degree: u32,
    pub components: u32,
}

/// The thresholded graph: scenario nodes, built edge set, and the live
/// activation states. Activation produces a new graph sharing the built
/// edge set, so clones are cheap and the original is untouched.
#[derive(Debug, Clone)]
pub struct TopologyGraph {
    nodes: Arc<Vec<Node>>,
    built: Arc<BuiltEdges>,
    active: Vec<bool>,
    threshold_db: f64,
}

impl TopologyGraph {
    /// Build from a scenario: for every pair with at least one edge
    /// terminal endpoint, add a connectivity edge iff the steered link
    /// gain is at or above `threshold_db`. Co-located pairs (zero
    /// distance) carry no edge since their gain is undefined. All nodes
    /// start active.
    pub fn build(scenario: &Scenario, params: &ChannelParams, threshold_db: f64) -> Result<Self> {
        if scenario.nodes.is_empty() {
            return Err(Error::ContractViolation("cannot build a graph over zero nodes".into()));
        }
        params.validate()?;
        let n = scenario.nodes.len();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (&scenario.nodes[i], &scenario.nodes[j]);
                if !(a.role.is_emt() || b.role.is_emt()) {
                    continue;
                }
                if a.pos == b.pos {
                    continue;
                }
                let gain = link_gain(a, b, params, true)?;
                if gain.gain_db >= threshold_db {
                    edges.push(Edge {
                        a: a.id,
                        b: b.id,
                        kind: EdgeKind::Connectivity,
                        gain_db: gain.gain_db,
                        distance_m: gain.distance_m,
                    });
                }
            }
        }
        Self::from_edges(scenario.nodes.clone(), edges, threshold_db)
    }

    /// Assemble a graph from explicit parts, validating the structural
    /// invariants (dense ids, no self-loops, no duplicate `(a, b, kind)`,
    /// finite weights). Useful for hand-built instances and for callers
    /// that model interference edges directly.
    pub fn from_edges(nodes: Vec<Node>, edges: Vec<Edge>, threshold_db: f64) -> Result<Self> {
        for (i, node) in nodes.iter().enumerate() {
            if node.id.index() != i {
                return Err(Error::ContractViolation(format!(
                    "node ids must be dense 0..N-1; found id {} at index {i}",
                    node.id
                )));
            }
        }
        let n = nodes.len();
        let mut seen = HashSet::new();
        let mut canonical = Vec::with_capacity(edges.len());
        for mut e in edges {
            if e.a == e.b {
                return Err(Error::ContractViolation(format!("self-loop on node {}", e.a)));
            }
            if e.a.index() >= n || e.b.index() >= n {
                return Err(Error::ContractViolation(format!(
                    "edge ({}, {}) references an unknown node",
                    e.a, e.b
                )));
            }
            if !e.gain_db.is_finite() || !e.distance_m.is_finite() {
                return Err(Error::ContractViolation(format!(
                    "edge ({}, {}) has non-finite weight",
                    e.a, e.b
                )));
            }
            if e.a > e.b {
                std::mem::swap(&mut e.a, &mut e.b);
            }
            if !seen.insert((e.a, e.b, e.kind)) {
                return Err(Error::ContractViolation(format!(
                    "duplicate edge ({}, {}, {})",
                    e.a, e.b, e.kind
                )));
            }
            canonical.push(e);
        }
        let mut incident = vec![Vec::new(); n];
        for (idx, e) in canonical.iter().enumerate() {
            incident[e.a.index()].push(idx as u32);
            incident[e.b.index()].push(idx as u32);
        }
        let active = nodes.iter().map(|nd| nd.features.active).collect();
        Ok(Self {
            nodes: Arc::new(nodes),
            built: Arc::new(BuiltEdges { edges: canonical, incident }),
            active,
            threshold_db,
        })
    }

    /// Restrict the live edge set to pairs whose endpoints are both
    /// active under `pattern`. The built edge set is shared, not copied.
    pub fn apply_activation(&self, pattern: &ActivationPattern) -> Result<Self> {
        if pattern.len() != self.nodes.len() {
            return Err(Error::ContractViolation(format!(
                "pattern covers {} ids, graph has {} nodes",
                pattern.len(),
                self.nodes.len()
            )));
        }
        Ok(Self {
            nodes: Arc::clone(&self.nodes),
            built: Arc::clone(&self.built),
            active: pattern.as_slice().to_vec(),
            threshold_db: self.threshold_db,
        })
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    pub fn threshold_db(&self) -> f64 {
        self.threshold_db
    }

    pub fn is_active(&self, id: NodeId) -> bool {
        self.active[id.index()]
    }

    pub fn activation(&self) -> ActivationPattern {
        ActivationPattern(self.active.clone())
    }

    pub fn built_edge_count(&self) -> usize {
        self.built.edges.len()
    }

    fn edge_live(&self, e: &Edge) -> bool {
        self.active[e.a.index()] && self.active[e.b.index()]
    }

    pub fn live_edges(&self) -> impl Iterator<Item = &Edge> {
        self.built.edges.iter().filter(|e| self.edge_live(e))
    }

    pub fn live_edge_count(&self) -> usize {
        self.live_edges().count()
    }

    /// Live edges incident to `id` (the node itself must be active for
    /// any to exist).
    pub fn live_neighbors(&self, id: NodeId) -> impl Iterator<Item = &Edge> {
        self.built.incident[id.index()]
            .iter()
            .map(move |&idx| &self.built.edges[idx as usize])
            .filter(|e| self.edge_live(e))
    }

    /// Ids whose role matches `pred`, in id order.
    pub fn ids_where(&self, pred: impl Fn(&Node) -> bool) -> Vec<NodeId> {
        self.nodes.iter().filter(|n| pred(n)).map(|n| n.id).collect()
    }

    /// Transmitter-side overlaps: every active edge terminal connected by
    /// live connectivity edges to two or more active communication users.
    /// User lists are sorted by id; an empty result means the bipartite
    /// view is interference-free.
    pub fn find_overlaps(&self) -> Vec<(NodeId, Vec<NodeId>)> {
        self.overlaps_impl(true)
    }

    /// Receiver-side mirror: every active communication user connected to
    /// two or more active edge terminals.
    pub fn find_user_side_overlaps(&self) -> Vec<(NodeId, Vec<NodeId>)> {
        self.overlaps_impl(false)
    }

    fn overlaps_impl(&self, emt_side: bool) -> Vec<(NodeId, Vec<NodeId>)> {
        let mut out = Vec::new();
        for node in self.nodes.iter() {
            let on_this_side =
                if emt_side { node.role.is_emt() } else { node.role == NodeRole::CommUser };
            if !on_this_side || !self.is_active(node.id) {
                continue;
            }
            let mut peers: Vec<NodeId> = self
                .live_neighbors(node.id)
                .filter(|e| e.kind == EdgeKind::Connectivity)
                .map(|e| e.other(node.id))
                .filter(|&p| {
                    let peer = self.node(p);
                    if emt_side {
                        peer.role == NodeRole::CommUser
                    } else {
                        peer.role.is_emt()
                    }
                })
                .collect();
            if peers.len() >= 2 {
                peers.sort();
                out.push((node.id, peers));
            }
        }
        out
    }

    /// Statistics over active nodes and live edges; component count by
    /// breadth-first traversal.
    pub fn degree_stats(&self) -> DegreeStats {
        let active_ids: Vec<NodeId> =
            self.nodes.iter().filter(|n| self.is_active(n.id)).map(|n| n.id).collect();
        let n_active = active_ids.len();
        let mut degree = vec![0u32; self.nodes.len()];
        let mut n_live_edges = 0usize;
        for e in self.live_edges() {
            degree[e.a.index()] += 1;
            degree[e.b.index()] += 1;
            n_live_edges += 1;
        }
        let (mut min_d, mut max_d) = (u32::MAX, 0u32);
        for id in &active_ids {
            let d = degree[id.index()];
            min_d = min_d.min(d);
            max_d = max_d.max(d);
        }
        if n_active == 0 {
            min_d = 0;
        }
        let mean_degree =
            if n_active == 0 { 0.0 } else { 2.0 * n_live_edges as f64 / n_active as f64 };

        // component count over active nodes
        let mut visited = vec![false; self.nodes.len()];
        let mut components = 0u32;
        for &start in &active_ids {
            if visited[start.index()] {
                continue;
            }
            components += 1;
            let mut queue = std::collections::VecDeque::new();
            visited[start.index()] = true;
            queue.push_back(start);
            while let Some(v) = queue.pop_front() {
                for e in self.live_neighbors(v) {
                    let w = e.other(v);
                    if !visited[w.index()] {
                        visited[w.index()] = true;
                        queue.push_back(w);
                    }
                }
            }
        }

        DegreeStats {
            n_active_nodes: n_active,
            n_live_edges,
            mean_degree,
            min_degree: min_d,
            max_degree: max_d,
            components,
        }
    }

    /// Live edge list as CSV: `a,b,kind,weight_db,distance_m`.
    pub fn edge_csv(&self) -> String {
        let mut out = String::from("a,b,kind,weight_db,distance_m\n");
        for e in self.live_edges() {
            out.push_str(&format!("{},{},{},{},{}\n", e.a, e.b, e.kind, e.gain_db, e.distance_m));
        }
        out
    }

    /// Degree statistics as a JSON document.
    pub fn degree_stats_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.degree_stats())?)
    }
}
