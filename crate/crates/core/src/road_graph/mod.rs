//! Routable road graphs built from centerlines.
//!
//! Nodes carry a position and a kind; edges carry their full polyline
//! geometry, so splitting an edge conserves length exactly up to float
//! rounding. The graph is undirected and may contain parallel edges and
//! positive-length loops.

mod build;
mod export;
mod paths;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{BoundingBox, Point2, Polyline};

pub use build::{build_graph, BuiltGraph, DEFAULT_MERGE_TOLERANCE};
pub use export::graph_to_geojson;
pub use paths::{all_paths_from_sources, dijkstra, shortest_path_length, PathTable};

pub type NodeId = usize;

/// Distance within which an edge endpoint is considered to sit on its node.
pub const NODE_EPS: f64 = 1e-6;

/// Cuts closer than this to each other or to an edge end collapse together.
const CUT_EPS: f64 = 1e-9;

pub const DEFAULT_MIDPOINT_SPACING: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    Endpoint,
    Intersection,
    Midpoint,
    Snapped,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Endpoint => "endpoint",
            NodeKind::Intersection => "intersection",
            NodeKind::Midpoint => "midpoint",
            NodeKind::Snapped => "snapped",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub position: Point2,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub a: NodeId,
    pub b: NodeId,
    pub geometry: Polyline,
    pub length: f64,
}

impl Edge {
    pub fn other(&self, n: NodeId) -> NodeId {
        if n == self.a {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("edge geometry does not start at node {a} and end at node {b}")]
    EndpointMismatch { a: NodeId, b: NodeId },
    #[error("{name} must be positive and finite, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64, GraphError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(GraphError::InvalidParameter { name, value })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoadGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(NodeId, usize)>>,
}

impl RoadGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, position: Point2, kind: NodeKind) -> NodeId {
        self.nodes.push(Node { position, kind });
        self.adjacency.push(Vec::new());
        self.nodes.len() - 1
    }

    /// Add an edge whose geometry runs from node `a` to node `b`.
    pub fn add_edge(&mut self, a: NodeId, b: NodeId, geometry: Polyline) -> Result<usize, GraphError> {
        let pa = self.node(a)?.position;
        let pb = self.node(b)?.position;
        if geometry.start().distance(pa) > NODE_EPS || geometry.end().distance(pb) > NODE_EPS {
            return Err(GraphError::EndpointMismatch { a, b });
        }
        let length = geometry.length();
        let id = self.edges.len();
        self.edges.push(Edge {
            a,
            b,
            geometry,
            length,
        });
        self.adjacency[a].push((b, id));
        if a != b {
            self.adjacency[b].push((a, id));
        }
        Ok(id)
    }

    /// Add a straight edge between two existing nodes.
    pub fn add_straight_edge(&mut self, a: NodeId, b: NodeId) -> Result<usize, GraphError> {
        let line = Polyline::new(vec![self.node(a)?.position, self.node(b)?.position])
            .map_err(|_| GraphError::EndpointMismatch { a, b })?;
        self.add_edge(a, b, line)
    }

    pub fn node(&self, id: NodeId) -> Result<&Node, GraphError> {
        self.nodes.get(id).ok_or(GraphError::UnknownNode(id))
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// True when the graph has no edges. Isolated nodes carry no paths.
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// `(neighbour, edge index)` pairs incident to `id`.
    pub fn neighbors(&self, id: NodeId) -> &[(NodeId, usize)] {
        &self.adjacency[id]
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.adjacency[id]
            .iter()
            .map(|&(_, e)| if self.edges[e].a == self.edges[e].b { 2 } else { 1 })
            .sum()
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn bbox(&self) -> Option<BoundingBox> {
        BoundingBox::from_points(self.nodes.iter().map(|n| &n.position))
    }

    pub fn translated(&self, offset: Point2) -> RoadGraph {
        let mut g = RoadGraph::new();
        for n in &self.nodes {
            g.add_node(n.position + offset, n.kind);
        }
        for e in &self.edges {
            g.add_edge(e.a, e.b, e.geometry.translated(offset))
                .expect("translation keeps endpoints on nodes");
        }
        g
    }

    /// Copy of the graph keeping only edges for which `keep` returns true.
    /// Node ids are unchanged.
    pub fn retain_edges(&self, mut keep: impl FnMut(usize, &Edge) -> bool) -> RoadGraph {
        let mut g = RoadGraph::new();
        for n in &self.nodes {
            g.add_node(n.position, n.kind);
        }
        for (i, e) in self.edges.iter().enumerate() {
            if keep(i, e) {
                g.add_edge(e.a, e.b, e.geometry.clone())
                    .expect("edge already valid");
            }
        }
        g
    }

    /// Split edges at arc-length positions.
    ///
    /// Each cut is `(edge index, distance from edge.a)`. Returns the new
    /// graph and, per cut, the node sitting at that position. Existing node
    /// ids are preserved; new nodes are appended with `kind`. Cuts within
    /// `1e-9` m of an edge end resolve to that end's node, and cuts within
    /// `1e-9` m of each other share one node.
    pub fn subdivide(&self, cuts: &[(usize, f64)], kind: NodeKind) -> (RoadGraph, Vec<NodeId>) {
        let mut per_edge: Vec<Vec<(f64, usize)>> = vec![Vec::new(); self.edges.len()];
        for (ci, &(e, d)) in cuts.iter().enumerate() {
            per_edge[e].push((d, ci));
        }
        let mut g = RoadGraph::new();
        for n in &self.nodes {
            g.add_node(n.position, n.kind);
        }
        let mut out = vec![usize::MAX; cuts.len()];
        for (ei, edge) in self.edges.iter().enumerate() {
            let list = &mut per_edge[ei];
            list.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            let mut rest = edge.geometry.clone();
            let mut offset = 0.0;
            let mut prev_node = edge.a;
            let mut prev_cut = f64::NEG_INFINITY;
            for &(d, ci) in list.iter() {
                if d <= CUT_EPS {
                    out[ci] = edge.a;
                    continue;
                }
                if d >= edge.length - CUT_EPS {
                    out[ci] = edge.b;
                    continue;
                }
                if d - prev_cut <= CUT_EPS {
                    out[ci] = prev_node;
                    continue;
                }
                match rest.split_at_distance(d - offset) {
                    Some((head, tail)) => {
                        let node = g.add_node(head.end(), kind);
                        g.add_edge(prev_node, node, head.clone())
                            .expect("split piece starts at previous node");
                        offset += head.length();
                        rest = tail;
                        prev_node = node;
                        prev_cut = d;
                        out[ci] = node;
                    }
                    None => out[ci] = prev_node,
                }
            }
            let rest = if rest.end() == self.nodes[edge.b].position {
                rest
            } else {
                rest.with_endpoints(rest.start(), self.nodes[edge.b].position)
                    .unwrap_or(rest)
            };
            g.add_edge(prev_node, edge.b, rest)
                .expect("final piece ends at edge.b");
        }
        (g, out)
    }
}

/// Ordered control nodes of one graph.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ControlNodeSet {
    ids: Vec<NodeId>,
}

impl ControlNodeSet {
    pub fn new(graph: &RoadGraph, ids: Vec<NodeId>) -> Result<Self, GraphError> {
        if let Some(&bad) = ids.iter().find(|&&id| id >= graph.node_count()) {
            return Err(GraphError::UnknownNode(bad));
        }
        Ok(ControlNodeSet { ids })
    }

    /// Every node of the graph except snapped nodes, in id order.
    pub fn from_graph(graph: &RoadGraph) -> Self {
        ControlNodeSet {
            ids: (0..graph.node_count())
                .filter(|&i| graph.nodes[i].kind != NodeKind::Snapped)
                .collect(),
        }
    }

    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Split every edge of length `L` into `k = ceil(L / spacing)` equal parts.
///
/// Existing node ids are preserved. The control set holds every endpoint,
/// intersection and injected midpoint.
pub fn inject_midpoints(graph: &RoadGraph, spacing: f64) -> Result<(RoadGraph, ControlNodeSet), GraphError> {
    let spacing = check_positive("midpoint spacing", spacing)?;
    let mut cuts = Vec::new();
    for (ei, e) in graph.edges().iter().enumerate() {
        let k = midpoint_parts(e.length, spacing);
        for j in 1..k {
            cuts.push((ei, e.length * j as f64 / k as f64));
        }
    }
    let (g, _) = graph.subdivide(&cuts, NodeKind::Midpoint);
    let controls = ControlNodeSet::from_graph(&g);
    Ok((g, controls))
}

/// Number of equal parts an edge of `length` is split into.
pub fn midpoint_parts(length: f64, spacing: f64) -> usize {
    ((length / spacing - 1e-9).ceil() as usize).max(1)
}
