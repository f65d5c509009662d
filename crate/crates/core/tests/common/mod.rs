//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use geoscore::apls::snap_control_nodes;
use geoscore::geometry::{Point2, Polygon, Polyline};
use geoscore::ingest::{BuildingRecord, RoadAttributes, RoadSegmentRecord};
use geoscore::road_graph::{inject_midpoints, NodeKind, RoadGraph};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Convex polygon: sorted random angles on a circle.
pub fn convex_polygon(rng: &mut impl Rng, center: Point2, radius: f64, n: usize) -> Polygon {
    loop {
        let mut angles: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let ring: Vec<Point2> = angles
            .iter()
            .map(|a| Point2::new(center.x + radius * a.cos(), center.y + radius * a.sin()))
            .collect();
        if let Ok(p) = Polygon::new(ring, vec![]) {
            if p.area() > 1e-3 * radius * radius {
                return p;
            }
        }
    }
}

/// Ray-casting containment over the exterior ring, written independently of
/// the library.
pub fn ring_contains(ring: &[Point2], p: Point2) -> bool {
    let mut inside = false;
    let n = ring.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (ring[i], ring[j]);
        if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Intersection area estimated by uniform sampling over the overlap of the
/// two bounding boxes.
pub fn monte_carlo_intersection(rng: &mut impl Rng, a: &Polygon, b: &Polygon, samples: usize) -> f64 {
    let Some(bb) = a.bbox().intersection(&b.bbox()) else {
        return 0.0;
    };
    if bb.width() <= 0.0 || bb.height() <= 0.0 {
        return 0.0;
    }
    let mut hits = 0usize;
    for _ in 0..samples {
        let p = Point2::new(rng.gen_range(bb.min.x..bb.max.x), rng.gen_range(bb.min.y..bb.max.y));
        if ring_contains(a.exterior(), p) && ring_contains(b.exterior(), p) {
            hits += 1;
        }
    }
    hits as f64 / samples as f64 * bb.width() * bb.height()
}

pub fn building(id: i64, min: (f64, f64), max: (f64, f64)) -> BuildingRecord {
    BuildingRecord {
        building_id: id,
        footprint: Polygon::rectangle(Point2::new(min.0, min.1), Point2::new(max.0, max.1)).unwrap(),
    }
}

/// Random axis-aligned footprints scattered over a 100 m square.
pub fn random_buildings(rng: &mut impl Rng, n: usize, id_base: i64) -> Vec<BuildingRecord> {
    (0..n)
        .map(|k| {
            let (x, y) = (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0));
            let (w, h) = (rng.gen_range(4.0..20.0), rng.gen_range(4.0..20.0));
            building(id_base + k as i64, (x, y), (x + w, y + h))
        })
        .collect()
}

/// Each truth footprint nudged by up to `jitter` meters, some dropped, some
/// spurious extras added.
pub fn perturbed_buildings(rng: &mut impl Rng, truth: &[BuildingRecord], jitter: f64) -> Vec<BuildingRecord> {
    let mut out = Vec::new();
    for (k, b) in truth.iter().enumerate() {
        if rng.gen_bool(0.2) {
            continue;
        }
        let d = Point2::new(rng.gen_range(-jitter..=jitter), rng.gen_range(-jitter..=jitter));
        out.push(BuildingRecord {
            building_id: 1000 + k as i64,
            footprint: b.footprint.translated(d).unwrap(),
        });
    }
    let extra = rng.gen_range(0..3);
    out.extend(random_buildings(rng, extra, 2000));
    out
}

/// Maximum one-to-one assignment size over pairs with IoU at or above
/// `threshold`, by exhaustive search.
pub fn optimal_match_count(truth: &[BuildingRecord], proposal: &[BuildingRecord], threshold: f64) -> usize {
    let ok: Vec<Vec<bool>> = truth
        .iter()
        .map(|t| {
            proposal
                .iter()
                .map(|p| geoscore::geometry::iou(&t.footprint, &p.footprint).unwrap() >= threshold)
                .collect()
        })
        .collect();
    fn go(i: usize, ok: &[Vec<bool>], used: &mut Vec<bool>) -> usize {
        if i == ok.len() {
            return 0;
        }
        let mut best = go(i + 1, ok, used);
        for j in 0..used.len() {
            if ok[i][j] && !used[j] {
                used[j] = true;
                best = best.max(1 + go(i + 1, ok, used));
                used[j] = false;
            }
        }
        best
    }
    go(0, &ok, &mut vec![false; proposal.len()])
}

/// Connected graph on `n` distinct random points: a random spanning tree
/// plus `extra` chords. Straight edges only.
pub fn random_connected_graph(rng: &mut impl Rng, n: usize, extra: usize, extent: f64) -> RoadGraph {
    let mut g = RoadGraph::new();
    let mut pts: Vec<Point2> = Vec::new();
    while pts.len() < n {
        let p = Point2::new(rng.gen_range(0.0..extent), rng.gen_range(0.0..extent));
        if pts.iter().all(|q| q.distance(p) > extent * 0.05) {
            pts.push(p);
        }
    }
    for p in &pts {
        g.add_node(*p, NodeKind::Endpoint);
    }
    let mut seen = std::collections::HashSet::new();
    for i in 1..n {
        let j = rng.gen_range(0..i);
        g.add_straight_edge(j, i).unwrap();
        seen.insert((j, i));
    }
    for _ in 0..extra {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let key = (a.min(b), a.max(b));
        if a != b && seen.insert(key) {
            g.add_straight_edge(key.0, key.1).unwrap();
        }
    }
    relabel_kinds(g)
}

/// Copy of `g` with node kinds recomputed from degree.
pub fn relabel_kinds(g: RoadGraph) -> RoadGraph {
    let mut out = RoadGraph::new();
    for (id, n) in g.nodes().iter().enumerate() {
        let kind = if g.degree(id) >= 2 {
            NodeKind::Intersection
        } else {
            NodeKind::Endpoint
        };
        out.add_node(n.position, kind);
    }
    for e in g.edges() {
        out.add_edge(e.a, e.b, e.geometry.clone()).unwrap();
    }
    out
}

/// Same topology with every node moved by up to `jitter` meters.
pub fn jittered(rng: &mut impl Rng, g: &RoadGraph, jitter: f64) -> RoadGraph {
    let mut out = RoadGraph::new();
    for n in g.nodes() {
        let d = Point2::new(rng.gen_range(-jitter..=jitter), rng.gen_range(-jitter..=jitter));
        out.add_node(n.position + d, n.kind);
    }
    for e in g.edges() {
        out.add_straight_edge(e.a, e.b).unwrap();
    }
    out
}

/// `n` x `n` lattice with `step` meter blocks, one edge per block side.
pub fn grid_graph(n: usize, step: f64) -> RoadGraph {
    let mut g = RoadGraph::new();
    for r in 0..n {
        for c in 0..n {
            g.add_node(Point2::new(c as f64 * step, r as f64 * step), NodeKind::Intersection);
        }
    }
    for r in 0..n {
        for c in 0..n {
            let id = r * n + c;
            if c + 1 < n {
                g.add_straight_edge(id, id + 1).unwrap();
            }
            if r + 1 < n {
                g.add_straight_edge(id, id + n).unwrap();
            }
        }
    }
    relabel_kinds(g)
}

/// Grid as road records with a vertex at every crossing.
pub fn grid_roads(n: usize, step: f64, origin: Point2) -> Vec<RoadSegmentRecord> {
    let mut out = Vec::new();
    for k in 0..n {
        let t = step * k as f64;
        let row: Vec<Point2> = (0..n).map(|j| origin + Point2::new(step * j as f64, t)).collect();
        let col: Vec<Point2> = (0..n).map(|j| origin + Point2::new(t, step * j as f64)).collect();
        for line in [row, col] {
            out.push(RoadSegmentRecord {
                road_id: out.len() as i64,
                geometry: Polyline::new(line).unwrap(),
                attributes: RoadAttributes::default(),
            });
        }
    }
    out
}

/// All-pairs shortest lengths by Floyd-Warshall.
pub fn floyd_warshall(g: &RoadGraph) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for e in g.edges() {
        let w = e.length.min(d[e.a][e.b]);
        d[e.a][e.b] = w;
        d[e.b][e.a] = w;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Shortest lengths from `src` found by enumerating every simple path.
/// Lengths accumulate along the path from the source.
pub fn enumerate_shortest(g: &RoadGraph, src: usize) -> Vec<f64> {
    fn walk(g: &RoadGraph, at: usize, len: f64, on_path: &mut Vec<bool>, best: &mut Vec<f64>) {
        if len < best[at] {
            best[at] = len;
        }
        for &(next, edge) in g.neighbors(at) {
            if !on_path[next] {
                on_path[next] = true;
                walk(g, next, len + g.edges()[edge].length, on_path, best);
                on_path[next] = false;
            }
        }
    }
    let mut best = vec![f64::INFINITY; g.node_count()];
    let mut on_path = vec![false; g.node_count()];
    on_path[src] = true;
    walk(g, src, 0.0, &mut on_path, &mut best);
    best
}

/// One direction of the path-similarity sum, with every length found by
/// path enumeration rather than a priority queue.
pub fn apls_direction_oracle(source: &RoadGraph, target: &RoadGraph, buffer: f64, spacing: f64) -> f64 {
    let (s, controls) = inject_midpoints(source, spacing).unwrap();
    let (t, _) = inject_midpoints(target, spacing).unwrap();
    let snap = snap_control_nodes(&s, &controls, &t, buffer).unwrap();
    let ids = controls.ids();
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..ids.len() {
        let from_source = enumerate_shortest(&s, ids[i]);
        let from_target = snap.mapping[i].map(|a| enumerate_shortest(&snap.augmented, a));
        for j in i + 1..ids.len() {
            let l = from_source[ids[j]];
            if !l.is_finite() || l <= 0.0 {
                continue;
            }
            count += 1;
            let lp = match (&from_target, snap.mapping[j]) {
                (Some(row), Some(b)) if row[b].is_finite() => Some(row[b]),
                _ => None,
            };
            sum += match lp {
                Some(lp) => ((l - lp).abs() / l).min(1.0),
                None => 1.0,
            };
        }
    }
    if count == 0 {
        return if snap.augmented.is_empty() { 1.0 } else { 0.0 };
    }
    (1.0 - sum / count as f64).clamp(0.0, 1.0)
}

pub fn harmonic(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        2.0 * a * b / (a + b)
    } else {
        0.0
    }
}
