mod common;

use common::{enumerate_shortest, floyd_warshall, grid_roads, random_connected_graph, rng};
use geoscore::geometry::{Point2, Polyline};
use geoscore::ingest::{RoadAttributes, RoadSegmentRecord};
use geoscore::road_graph::{
    all_paths_from_sources, build_graph, dijkstra, inject_midpoints, ControlNodeSet, NodeKind, RoadGraph,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn graph(seed: u64, n: usize) -> RoadGraph {
    let mut r = rng(seed);
    let extra = r.gen_range(0..n);
    random_connected_graph(&mut r, n, extra, 300.0)
}

fn close(a: f64, b: f64) -> bool {
    (a.is_infinite() && b.is_infinite() && a.signum() == b.signum()) || (a - b).abs() <= 1e-9 * a.abs().max(1.0)
}

proptest! {
    #[test]
    fn path_table_matches_floyd_warshall(seed in any::<u64>()) {
        let g = graph(seed, 10);
        let controls = ControlNodeSet::new(&g, (0..g.node_count()).collect()).unwrap();
        let table = all_paths_from_sources(&g, &controls);
        let fw = floyd_warshall(&g);
        for (i, row) in fw.iter().enumerate() {
            for (j, &want) in row.iter().enumerate() {
                let d = table.get(i, j).unwrap_or(f64::INFINITY);
                prop_assert!(close(d, want), "{i}->{j}: {d} vs {want}");
            }
        }
    }

    #[test]
    fn dijkstra_matches_path_enumeration(seed in any::<u64>(), n in 2usize..=8) {
        let g = graph(seed, n);
        for s in 0..n {
            prop_assert_eq!(dijkstra(&g, s).unwrap(), enumerate_shortest(&g, s));
        }
    }

    #[test]
    fn triangle_inequality(seed in any::<u64>()) {
        let g = graph(seed, 9);
        let d: Vec<Vec<f64>> = (0..g.node_count()).map(|s| dijkstra(&g, s).unwrap()).collect();
        for a in 0..9 {
            for b in 0..9 {
                for c in 0..9 {
                    prop_assert!(d[a][c] <= d[a][b] + d[b][c] + 1e-9);
                }
            }
        }
    }

    #[test]
    fn midpoints_preserve_distances(seed in any::<u64>(), spacing in 5.0f64..120.0) {
        let g = graph(seed, 8);
        let (dense, controls) = inject_midpoints(&g, spacing).unwrap();
        prop_assert!(controls.len() >= g.node_count());
        prop_assert!((dense.total_length() - g.total_length()).abs() < 1e-6);
        for e in dense.edges() {
            prop_assert!(e.length <= spacing + 1e-6);
        }
        // Original nodes keep their ids.
        for s in 0..g.node_count() {
            let before = dijkstra(&g, s).unwrap();
            let after = dijkstra(&dense, s).unwrap();
            for t in 0..g.node_count() {
                prop_assert!((before[t] - after[t]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn build_is_order_independent(seed in any::<u64>(), n in 2usize..6, reverse in any::<bool>()) {
        let mut segments = grid_roads(n, 40.0, Point2::new(0.0, 0.0));
        let mut r = rng(seed);
        segments.push(RoadSegmentRecord {
            road_id: 99,
            geometry: Polyline::new(vec![Point2::new(-20.0, -20.0), Point2::new(0.3, 0.1)]).unwrap(),
            attributes: RoadAttributes::default(),
        });
        let a = build_graph(&segments, 0.5).unwrap().graph;
        segments.shuffle(&mut r);
        if reverse {
            for s in &mut segments {
                s.geometry = s.geometry.reversed();
            }
        }
        let b = build_graph(&segments, 0.5).unwrap().graph;
        prop_assert_eq!(a.nodes(), b.nodes());
        let key = |g: &RoadGraph| {
            let mut v: Vec<(usize, usize, u64)> = g.edges().iter().map(|e| (e.a, e.b, e.length.to_bits())).collect();
            v.sort();
            v
        };
        prop_assert_eq!(key(&a), key(&b));
    }

    #[test]
    fn built_edges_satisfy_invariants(seed in any::<u64>()) {
        let mut r = rng(seed);
        let segments: Vec<RoadSegmentRecord> = (0..8)
            .map(|k| {
                let pts: Vec<Point2> = (0..r.gen_range(2..5))
                    .map(|_| Point2::new(r.gen_range(0.0..60.0), r.gen_range(0.0..60.0)))
                    .collect();
                (k, pts)
            })
            .filter_map(|(k, pts)| {
                Some(RoadSegmentRecord {
                    road_id: k,
                    geometry: Polyline::from_points_dedup(pts).ok()?,
                    attributes: RoadAttributes::default(),
                })
            })
            .collect();
        let g = build_graph(&segments, 0.5).unwrap().graph;
        for e in g.edges() {
            prop_assert!((e.length - e.geometry.length()).abs() < 1e-6);
            prop_assert!(e.length > 0.0);
            prop_assert!(e.geometry.start().distance(g.nodes()[e.a].position) < 1e-6);
            prop_assert!(e.geometry.end().distance(g.nodes()[e.b].position) < 1e-6);
        }
        for (id, n) in g.nodes().iter().enumerate() {
            let expect = if g.degree(id) >= 2 { NodeKind::Intersection } else { NodeKind::Endpoint };
            prop_assert_eq!(n.kind, expect);
        }
    }
}

#[test]
fn floyd_warshall_ten_node_fixture() {
    let g = graph(2024, 10);
    let controls = ControlNodeSet::from_graph(&g);
    let table = all_paths_from_sources(&g, &controls);
    let fw = floyd_warshall(&g);
    for (a, b, d) in table.pairs() {
        assert!(close(d, fw[a][b]));
    }
}
