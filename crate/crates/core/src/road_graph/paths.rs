use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{ControlNodeSet, GraphError, NodeId, RoadGraph};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    dist: f64,
    node: NodeId,
}

impl Eq for Entry {}

impl Ord for Entry {
    // Reversed so the max-heap pops the smallest distance first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest path lengths; unreachable nodes get `f64::INFINITY`.
pub fn dijkstra(graph: &RoadGraph, source: NodeId) -> Result<Vec<f64>, GraphError> {
    graph.node(source)?;
    let mut dist = vec![f64::INFINITY; graph.node_count()];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Entry {
        dist: 0.0,
        node: source,
    });
    while let Some(Entry { dist: d, node }) = heap.pop() {
        if d > dist[node] {
            continue;
        }
        for &(next, edge) in graph.neighbors(node) {
            let nd = d + graph.edges()[edge].length;
            if nd < dist[next] {
                dist[next] = nd;
                heap.push(Entry { dist: nd, node: next });
            }
        }
    }
    Ok(dist)
}

/// Length of the shortest path between `a` and `b`, or `None` when they are
/// not connected.
pub fn shortest_path_length(graph: &RoadGraph, a: NodeId, b: NodeId) -> Result<Option<f64>, GraphError> {
    graph.node(b)?;
    let d = dijkstra(graph, a)?[b];
    Ok(d.is_finite().then_some(d))
}

/// Dense table of path lengths between control nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PathTable {
    ids: Vec<NodeId>,
    dist: Vec<f64>,
}

impl PathTable {
    pub fn ids(&self) -> &[NodeId] {
        &self.ids
    }

    /// Path length between the `i`-th and `j`-th control nodes.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let d = self.dist[i * self.ids.len() + j];
        d.is_finite().then_some(d)
    }

    /// Connected pairs `(a, b, length)` with `a` listed before `b`.
    pub fn pairs(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        let n = self.ids.len();
        (0..n).flat_map(move |i| {
            (i + 1..n).filter_map(move |j| self.get(i, j).map(|d| (self.ids[i], self.ids[j], d)))
        })
    }

    pub fn len(&self) -> usize {
        self.pairs().count()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs().next().is_none()
    }
}

/// One Dijkstra run per control node.
pub fn all_paths_from_sources(graph: &RoadGraph, sources: &ControlNodeSet) -> PathTable {
    let ids = sources.ids().to_vec();
    let n = ids.len();
    let mut dist = Vec::with_capacity(n * n);
    for &s in &ids {
        let row = dijkstra(graph, s).expect("control set validated against graph");
        dist.extend(ids.iter().map(|&t| row[t]));
    }
    PathTable { ids, dist }
}
