use std::cmp::Ordering;
use std::collections::HashMap;

use super::{GraphError, NodeId, NodeKind, RoadGraph};
use crate::geometry::{Point2, Polyline};
use crate::ingest::RoadSegmentRecord;

pub const DEFAULT_MERGE_TOLERANCE: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct BuiltGraph {
    pub graph: RoadGraph,
    pub warnings: Vec<String>,
}

struct Vertex {
    segment: usize,
    point: Point2,
    is_end: bool,
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Build a graph from road centerlines.
///
/// Connectivity comes only from shared points:
/// - segment endpoints within `merge_tolerance` of another segment's
///   endpoint or vertex are merged;
/// - interior vertices shared exactly by two or more segments become
///   intersections.
///
/// Segments that merely cross (overpasses) stay disconnected. Node and edge
/// order is canonical, so the result does not depend on input order.
pub fn build_graph(segments: &[RoadSegmentRecord], merge_tolerance: f64) -> Result<BuiltGraph, GraphError> {
    if !(merge_tolerance.is_finite() && merge_tolerance >= 0.0) {
        return Err(GraphError::InvalidParameter {
            name: "merge tolerance",
            value: merge_tolerance,
        });
    }
    let mut warnings = Vec::new();
    let mut lines: Vec<&Polyline> = Vec::new();
    for s in segments {
        if s.geometry.length() <= 1e-9 {
            warnings.push(format!("road {}: zero-length segment skipped", s.road_id));
        } else {
            lines.push(&s.geometry);
        }
    }

    let mut vertices = Vec::new();
    for (si, line) in lines.iter().enumerate() {
        let last = line.vertices().len() - 1;
        for (vi, &p) in line.vertices().iter().enumerate() {
            vertices.push(Vertex {
                segment: si,
                point: p,
                is_end: vi == 0 || vi == last,
            });
        }
    }

    let mut sets = DisjointSet::new(vertices.len());
    let cell = merge_tolerance.max(1e-6);
    let key = |p: Point2| ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, v) in vertices.iter().enumerate() {
        grid.entry(key(v.point)).or_default().push(i);
    }
    for (i, v) in vertices.iter().enumerate() {
        let (cx, cy) = key(v.point);
        for dx in -1..=1 {
            for dy in -1..=1 {
                let Some(bucket) = grid.get(&(cx + dx, cy + dy)) else {
                    continue;
                };
                for &j in bucket {
                    if j <= i {
                        continue;
                    }
                    let w = &vertices[j];
                    let joined = if v.segment == w.segment {
                        // A segment whose two ends meet forms a loop.
                        v.is_end && w.is_end && v.point.distance(w.point) <= merge_tolerance
                    } else if v.is_end || w.is_end {
                        v.point.distance(w.point) <= merge_tolerance
                    } else {
                        v.point == w.point
                    };
                    if joined {
                        sets.union(i, j);
                    }
                }
            }
        }
    }

    // Group vertices into clusters and decide which clusters are nodes.
    let mut members: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..vertices.len() {
        members.entry(sets.find(i)).or_default().push(i);
    }
    let mut clusters: Vec<(Point2, Vec<usize>)> = Vec::new();
    for (_, ms) in members {
        let has_end = ms.iter().any(|&m| vertices[m].is_end);
        let shared = ms.iter().any(|&m| vertices[m].segment != vertices[ms[0]].segment);
        if !(has_end || shared) {
            continue;
        }
        let mut pts: Vec<Point2> = ms.iter().map(|&m| vertices[m].point).collect();
        pts.sort_by(|a, b| a.total_cmp(b));
        let n = pts.len() as f64;
        let sum = pts.iter().fold(Point2::new(0.0, 0.0), |acc, p| acc + *p);
        clusters.push((Point2::new(sum.x / n, sum.y / n), ms));
    }
    clusters.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut node_of_vertex: Vec<Option<NodeId>> = vec![None; vertices.len()];
    for (ni, (_, ms)) in clusters.iter().enumerate() {
        for &m in ms {
            node_of_vertex[m] = Some(ni);
        }
    }

    // Cut each segment at its node vertices.
    let mut pieces: Vec<(NodeId, NodeId, Polyline)> = Vec::new();
    let mut offset = 0;
    for line in &lines {
        let pts = line.vertices();
        let ids = &node_of_vertex[offset..offset + pts.len()];
        offset += pts.len();
        let mut start = 0;
        for k in 1..pts.len() {
            let Some(nb) = ids[k] else { continue };
            let na = ids[start].expect("segment ends are nodes");
            let mut chain = pts[start..=k].to_vec();
            chain[0] = clusters[na].0;
            let last = chain.len() - 1;
            chain[last] = clusters[nb].0;
            start = k;
            match Polyline::from_points_dedup(chain) {
                Ok(piece) if piece.length() > 1e-9 => pieces.push((na, nb, piece)),
                _ => warnings.push(format!(
                    "zero-length piece between nodes {na} and {nb} dropped after merging"
                )),
            }
        }
    }

    // Canonical edge orientation and order.
    for p in pieces.iter_mut() {
        let flip = p.0 > p.1
            || (p.0 == p.1 && cmp_chains(p.2.reversed().vertices(), p.2.vertices()).is_lt());
        if flip {
            *p = (p.1, p.0, p.2.reversed());
        }
    }
    pieces.sort_by(|x, y| {
        (x.0, x.1)
            .cmp(&(y.0, y.1))
            .then_with(|| cmp_chains(x.2.vertices(), y.2.vertices()))
    });

    let mut graph = RoadGraph::new();
    for (p, _) in &clusters {
        graph.add_node(*p, NodeKind::Endpoint);
    }
    for (a, b, line) in pieces {
        graph.add_edge(a, b, line).expect("pieces end on their nodes");
    }
    for i in 0..graph.node_count() {
        if graph.degree(i) >= 2 {
            graph.nodes[i].kind = NodeKind::Intersection;
        }
    }
    Ok(BuiltGraph { graph, warnings })
}

fn cmp_chains(a: &[Point2], b: &[Point2]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(p, q)| p.total_cmp(q))
        .find(|o| o.is_ne())
        .unwrap_or(a.len().cmp(&b.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::RoadAttributes;

    fn seg(id: i64, pts: &[(f64, f64)]) -> RoadSegmentRecord {
        RoadSegmentRecord {
            road_id: id,
            geometry: Polyline::new(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect()).unwrap(),
            attributes: RoadAttributes::default(),
        }
    }

    fn build(segs: &[RoadSegmentRecord]) -> RoadGraph {
        build_graph(segs, DEFAULT_MERGE_TOLERANCE).unwrap().graph
    }

    #[test]
    fn shared_endpoint() {
        let g = build(&[seg(1, &[(0.0, 0.0), (10.0, 0.0)]), seg(2, &[(10.0, 0.0), (10.0, 10.0)])]);
        assert_eq!((g.node_count(), g.edge_count()), (3, 2));
    }

    #[test]
    fn plus_with_shared_center() {
        let g = build(&[
            seg(1, &[(-10.0, 0.0), (0.0, 0.0), (10.0, 0.0)]),
            seg(2, &[(0.0, -10.0), (0.0, 0.0), (0.0, 10.0)]),
        ]);
        assert_eq!((g.node_count(), g.edge_count()), (5, 4));
        let center = g
            .nodes()
            .iter()
            .position(|n| n.position == Point2::new(0.0, 0.0))
            .unwrap();
        assert_eq!(g.degree(center), 4);
        assert_eq!(g.nodes()[center].kind, NodeKind::Intersection);
    }

    #[test]
    fn overpass_stays_disconnected() {
        let g = build(&[
            seg(1, &[(-10.0, 0.0), (10.0, 0.0)]),
            seg(2, &[(0.0, -10.0), (0.0, 10.0)]),
        ]);
        assert_eq!((g.node_count(), g.edge_count()), (4, 2));
        assert!(g.nodes().iter().all(|n| n.kind == NodeKind::Endpoint));
    }

    #[test]
    fn jittered_endpoints_merge() {
        let g = build(&[seg(1, &[(0.0, 0.0), (10.0, 0.0)]), seg(2, &[(10.3, 0.2), (20.0, 0.0)])]);
        assert_eq!((g.node_count(), g.edge_count()), (3, 2));
        let far = build_graph(
            &[seg(1, &[(0.0, 0.0), (10.0, 0.0)]), seg(2, &[(10.3, 0.2), (20.0, 0.0)])],
            0.1,
        )
        .unwrap()
        .graph;
        assert_eq!(far.node_count(), 4);
    }

    #[test]
    fn t_junction_on_interior_vertex() {
        let g = build(&[
            seg(1, &[(0.0, 0.0), (5.0, 0.0), (10.0, 0.0)]),
            seg(2, &[(5.0, 0.0), (5.0, 8.0)]),
        ]);
        assert_eq!((g.node_count(), g.edge_count()), (4, 3));
    }

    #[test]
    fn unshared_interior_vertices_stay_geometry() {
        let g = build(&[seg(1, &[(0.0, 0.0), (5.0, 1.0), (10.0, 0.0)])]);
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));
        assert_eq!(g.edges()[0].geometry.vertices().len(), 3);
    }

    #[test]
    fn edge_invariants_hold() {
        let g = build(&[
            seg(1, &[(0.0, 0.0), (3.0, 4.0), (6.0, 0.0)]),
            seg(2, &[(3.0, 4.0), (3.0, 9.0)]),
            seg(3, &[(6.2, 0.1), (9.0, 0.0)]),
        ]);
        for e in g.edges() {
            assert!((e.length - e.geometry.length()).abs() < 1e-6);
            assert!(e.geometry.start().distance(g.nodes()[e.a].position) < 1e-6);
            assert!(e.geometry.end().distance(g.nodes()[e.b].position) < 1e-6);
            assert!(e.length > 0.0);
        }
    }

    #[test]
    fn input_order_does_not_matter() {
        let a = seg(1, &[(0.0, 0.0), (5.0, 0.0), (10.0, 0.0)]);
        let b = seg(2, &[(5.0, 0.0), (5.0, 8.0)]);
        let c = seg(3, &[(10.1, 0.0), (20.0, 3.0)]);
        let g1 = build(&[a.clone(), b.clone(), c.clone()]);
        let g2 = build(&[c, a, b]);
        assert_eq!(g1, g2);
    }

    #[test]
    fn closed_loop_segment() {
        let g = build(&[seg(1, &[(0.0, 0.0), (10.0, 0.0), (10.0, 10.0), (0.2, 0.1)])]);
        assert_eq!((g.node_count(), g.edge_count()), (1, 1));
        assert_eq!(g.edges()[0].a, g.edges()[0].b);
    }

    #[test]
    fn empty_input() {
        let g = build(&[]);
        assert!(g.is_empty());
        assert_eq!(g.node_count(), 0);
    }

    #[test]
    fn negative_tolerance_rejected() {
        assert!(build_graph(&[], -1.0).is_err());
    }
}
