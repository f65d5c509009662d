use std::collections::{HashMap, HashSet};

use super::{MaskError, RasterMask, NEIGHBORS_8};
use crate::geometry::{Point2, Polyline};
use crate::road_graph::{NodeId, NodeKind, RoadGraph};

pub const DEFAULT_PRUNE_PX: f64 = 4.0;
pub const DEFAULT_CORNER_PX: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkeletonGraphParams {
    /// Terminal edges shorter than this many pixels are removed.
    pub prune_px: f64,
    /// Douglas-Peucker tolerance in pixels; 0 keeps every pixel center.
    pub simplify_px: f64,
    /// Interior segments up to this many pixels long that cut a corner are
    /// replaced by the meeting point of their neighbours; 0 disables.
    pub corner_px: f64,
}

impl Default for SkeletonGraphParams {
    fn default() -> Self {
        SkeletonGraphParams {
            prune_px: DEFAULT_PRUNE_PX,
            simplify_px: 1.0,
            corner_px: DEFAULT_CORNER_PX,
        }
    }
}

struct Chain {
    a: usize,
    b: usize,
    pixels: Vec<usize>,
}

/// Trace a one-pixel skeleton into a graph in meters.
///
/// Pixels with one neighbour are endpoints; 8-connected clusters of pixels
/// with three or more neighbours collapse into one junction at their
/// centroid. Chains of two-neighbour pixels become edges. A cycle with no
/// node gets one node at the middle of its longest simplified segment.
pub fn skeleton_to_graph(skeleton: &RasterMask, params: SkeletonGraphParams) -> Result<RoadGraph, MaskError> {
    for (name, v) in [
        ("prune length", params.prune_px),
        ("simplify tolerance", params.simplify_px),
        ("corner length", params.corner_px),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(MaskError::InvalidParameter { name, value: v });
        }
    }
    let (w, h) = (skeleton.width(), skeleton.height());
    let idx = |c: usize, r: usize| r * w + c;
    let neighbours = |i: usize| -> Vec<usize> {
        let (c, r) = ((i % w) as isize, (i / w) as isize);
        NEIGHBORS_8
            .iter()
            .filter(|(dc, dr)| skeleton.get_signed(c + dc, r + dr))
            .map(|(dc, dr)| idx((c + dc) as usize, (r + dr) as usize))
            .collect()
    };
    let on: Vec<usize> = (0..w * h).filter(|&i| skeleton.data()[i]).collect();
    let degree: HashMap<usize, usize> = on.iter().map(|&i| (i, neighbours(i).len())).collect();

    // Cluster node pixels: junction pixels merge with adjacent junction pixels.
    let mut node_of: HashMap<usize, usize> = HashMap::new();
    let mut node_pixels: Vec<Vec<usize>> = Vec::new();
    for &i in &on {
        let d = degree[&i];
        if d == 2 || d == 0 || node_of.contains_key(&i) {
            continue;
        }
        let id = node_pixels.len();
        let mut members = vec![i];
        node_of.insert(i, id);
        if d >= 3 {
            let mut stack = vec![i];
            while let Some(p) = stack.pop() {
                for q in neighbours(p) {
                    if degree[&q] >= 3 && !node_of.contains_key(&q) {
                        node_of.insert(q, id);
                        members.push(q);
                        stack.push(q);
                    }
                }
            }
        }
        node_pixels.push(members);
    }

    let mut chains: Vec<Chain> = Vec::new();
    let mut free_cycles: HashSet<usize> = HashSet::new();
    let mut used_step: HashSet<(usize, usize)> = HashSet::new();
    let mut visited = vec![false; w * h];

    let mut starts: Vec<usize> = node_of.keys().copied().collect();
    starts.sort_unstable();
    for &p in &starts {
        for q in neighbours(p) {
            if node_of.get(&q) == node_of.get(&p) || used_step.contains(&(p, q)) {
                continue;
            }
            let pixels = trace(p, q, &node_of, &neighbours, &mut visited);
            let n = pixels.len();
            used_step.insert((p, q));
            used_step.insert((pixels[n - 1], pixels[n - 2]));
            chains.push(Chain {
                a: node_of[&p],
                b: node_of[&pixels[n - 1]],
                pixels,
            });
        }
    }

    // Remaining unvisited chain pixels form node-less cycles.
    for &i in &on {
        if degree[&i] != 2 || visited[i] || node_of.contains_key(&i) {
            continue;
        }
        let id = node_pixels.len();
        node_pixels.push(vec![i]);
        node_of.insert(i, id);
        let first = neighbours(i)[0];
        let pixels = trace(i, first, &node_of, &neighbours, &mut visited);
        free_cycles.insert(id);
        chains.push(Chain { a: id, b: id, pixels });
    }

    let t = skeleton.transform();
    let center = |i: usize| t.pixel_center((i % w) as f64, (i / w) as f64);
    let mut node_pos: Vec<Point2> = node_pixels
        .iter()
        .map(|ms| {
            let s = ms.iter().fold(Point2::new(0.0, 0.0), |acc, &m| acc + center(m));
            s * (1.0 / ms.len() as f64)
        })
        .collect();

    // Terminal spur pruning.
    let min_len = params.prune_px * t.pixel_size;
    let chain_len = |c: &Chain| -> f64 { c.pixels.windows(2).map(|p| center(p[0]).distance(center(p[1]))).sum() };
    let mut node_degree = vec![0usize; node_pixels.len()];
    for c in &chains {
        node_degree[c.a] += 1;
        node_degree[c.b] += 1;
    }
    let keep: Vec<bool> = chains
        .iter()
        .map(|c| {
            let terminal = c.a != c.b && (node_degree[c.a] == 1) != (node_degree[c.b] == 1);
            let short = chain_len(c) < min_len;
            !(short && (terminal || c.a == c.b))
        })
        .collect();

    let mut graph = RoadGraph::new();
    let mut graph_id: Vec<Option<NodeId>> = vec![None; node_pixels.len()];
    let tol = params.simplify_px * t.pixel_size;
    let max_cut = params.corner_px * t.pixel_size;
    for (c, _) in chains.iter().zip(&keep).filter(|(_, k)| **k) {
        let mut pts: Vec<Point2> = c.pixels.iter().map(|&p| center(p)).collect();
        pts[0] = node_pos[c.a];
        let last = pts.len() - 1;
        pts[last] = node_pos[c.b];
        let mut pts = if tol > 0.0 { simplify(&pts, tol) } else { pts };
        if free_cycles.contains(&c.a) {
            pts = reopen_cycle(&pts);
            node_pos[c.a] = pts[0];
        }
        if max_cut > 0.0 {
            pts = sharpen_corners(pts, max_cut);
        }
        let Ok(line) = Polyline::from_points_dedup(pts) else { continue };
        if line.length() <= 1e-9 {
            continue;
        }
        let mut id = |n: usize, g: &mut RoadGraph| {
            *graph_id[n].get_or_insert_with(|| g.add_node(node_pos[n], NodeKind::Endpoint))
        };
        let a = id(c.a, &mut graph);
        let b = id(c.b, &mut graph);
        graph.add_edge(a, b, line).expect("chain ends sit on node positions");
    }
    Ok(relabel(graph))
}

/// Walk from node pixel `start` through `first` along two-neighbour pixels
/// until another node pixel (or `start` itself) is reached.
fn trace(
    start: usize,
    first: usize,
    node_of: &HashMap<usize, usize>,
    neighbours: &impl Fn(usize) -> Vec<usize>,
    visited: &mut [bool],
) -> Vec<usize> {
    let mut pixels = vec![start, first];
    let (mut prev, mut cur) = (start, first);
    while cur != start && !node_of.contains_key(&cur) {
        visited[cur] = true;
        let Some(next) = neighbours(cur).into_iter().find(|&q| q != prev) else {
            break;
        };
        prev = cur;
        cur = next;
        pixels.push(cur);
    }
    pixels
}

fn relabel(graph: RoadGraph) -> RoadGraph {
    let mut g = RoadGraph::new();
    for (i, n) in graph.nodes().iter().enumerate() {
        let kind = if graph.degree(i) >= 2 { NodeKind::Intersection } else { NodeKind::Endpoint };
        g.add_node(n.position, kind);
    }
    for e in graph.edges() {
        g.add_edge(e.a, e.b, e.geometry.clone()).expect("copied edge");
    }
    g
}

/// Rotate a closed ring so it starts and ends at the middle of its longest
/// segment.
fn reopen_cycle(ring: &[Point2]) -> Vec<Point2> {
    let n = ring.len() - 1;
    if n < 2 {
        return ring.to_vec();
    }
    let k = (0..n)
        .max_by(|&i, &j| {
            let li = ring[i].distance(ring[i + 1]);
            let lj = ring[j].distance(ring[j + 1]);
            li.total_cmp(&lj).then(j.cmp(&i))
        })
        .expect("non-empty ring");
    let mid = (ring[k] + ring[k + 1]) * 0.5;
    let mut out = Vec::with_capacity(n + 2);
    out.push(mid);
    out.extend((1..=n).map(|s| ring[(k + s) % n]));
    out.push(mid);
    out
}

/// Replace short interior segments flanked by much longer ones with the
/// intersection of the flanking lines, when that point lies within
/// `max_cut` of both ends of the short segment. Both ends of the polyline
/// stay fixed.
fn sharpen_corners(mut pts: Vec<Point2>, max_cut: f64) -> Vec<Point2> {
    let mut i = 1;
    while i + 2 < pts.len() {
        let (p0, p1, p2, p3) = (pts[i - 1], pts[i], pts[i + 1], pts[i + 2]);
        let short = p1.distance(p2);
        let flanks_long = p0.distance(p1) >= 2.0 * short && p2.distance(p3) >= 2.0 * short;
        if short <= max_cut && flanks_long {
            if let Some(x) = line_intersection(p0, p1, p2, p3) {
                if x.distance(p1) <= max_cut && x.distance(p2) <= max_cut {
                    pts[i] = x;
                    pts.remove(i + 1);
                    continue;
                }
            }
        }
        i += 1;
    }
    pts
}

/// Meeting point of the infinite lines through `a0 a1` and `b0 b1`, or
/// `None` when they are nearly parallel.
fn line_intersection(a0: Point2, a1: Point2, b0: Point2, b1: Point2) -> Option<Point2> {
    let (da, db) = (a1 - a0, b1 - b0);
    let den = da.cross(db);
    if den.abs() <= 1e-9 * a0.distance(a1) * b0.distance(b1) {
        return None;
    }
    let t = (b0 - a0).cross(db) / den;
    Some(a0 + da * t)
}

/// Douglas-Peucker simplification that always keeps both ends.
fn simplify(points: &[Point2], tolerance: f64) -> Vec<Point2> {
    if points.len() <= 2 {
        return points.to_vec();
    }
    let mut keep = vec![false; points.len()];
    keep[0] = true;
    keep[points.len() - 1] = true;
    let mut stack = vec![(0, points.len() - 1)];
    while let Some((s, e)) = stack.pop() {
        let (mut far, mut far_d) = (0, 0.0);
        for i in s + 1..e {
            let d = crate::geometry::segment_distance(points[i], points[s], points[e]);
            if d > far_d {
                far = i;
                far_d = d;
            }
        }
        if far_d > tolerance {
            keep[far] = true;
            stack.push((s, far));
            stack.push((far, e));
        }
    }
    // A closed chain would collapse to its two ends; keep its farthest point.
    if points[0] == points[points.len() - 1] && keep.iter().filter(|&&k| k).count() == 2 {
        let far = (1..points.len() - 1)
            .max_by(|&i, &j| points[i].distance(points[0]).total_cmp(&points[j].distance(points[0])))
            .expect("interior point");
        keep[far] = true;
    }
    points.iter().zip(&keep).filter(|(_, k)| **k).map(|(p, _)| *p).collect()
}
