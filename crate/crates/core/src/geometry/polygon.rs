use super::{BoundingBox, GeometryError, Point2};

/// Coordinates are snapped to this grid (meters) before any boolean work.
pub const SNAP_GRID: f64 = 1e-9;

/// A simple polygon with optional holes.
///
/// Rings are stored open (no repeated closing vertex); the exterior is
/// counter-clockwise and holes are clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    exterior: Vec<Point2>,
    holes: Vec<Vec<Point2>>,
    area: f64,
    bbox: BoundingBox,
}

impl Polygon {
    /// Validate and normalise a polygon. Rings may be given open or closed,
    /// in either orientation.
    pub fn new(exterior: Vec<Point2>, holes: Vec<Vec<Point2>>) -> Result<Self, GeometryError> {
        let exterior = normalize_ring(exterior)?;
        if let Some((i, j)) = find_self_intersection(&exterior) {
            return Err(GeometryError::SelfIntersection(i, j));
        }
        let ext_area = signed_area(&exterior);
        if ext_area == 0.0 {
            return Err(GeometryError::ZeroArea);
        }
        let exterior = oriented(exterior, ext_area, true);

        let mut normalized_holes = Vec::with_capacity(holes.len());
        let mut hole_area = 0.0;
        for (h, hole) in holes.into_iter().enumerate() {
            let hole = normalize_ring(hole).map_err(|_| GeometryError::DegenerateHole(h))?;
            if find_self_intersection(&hole).is_some() {
                return Err(GeometryError::DegenerateHole(h));
            }
            let a = signed_area(&hole);
            if a == 0.0 {
                return Err(GeometryError::DegenerateHole(h));
            }
            if !hole.iter().all(|p| point_in_ring(*p, &exterior) != Containment::Outside)
                || rings_cross(&hole, &exterior)
            {
                return Err(GeometryError::HoleOutside(h));
            }
            hole_area += a.abs();
            normalized_holes.push(oriented(hole, a, false));
        }
        for i in 0..normalized_holes.len() {
            for j in i + 1..normalized_holes.len() {
                let (a, b) = (&normalized_holes[i], &normalized_holes[j]);
                if rings_cross(a, b)
                    || a.iter().any(|p| point_in_ring(*p, b) == Containment::Inside)
                    || b.iter().any(|p| point_in_ring(*p, a) == Containment::Inside)
                {
                    return Err(GeometryError::HolesOverlap(i, j));
                }
            }
        }

        let area = ext_area.abs() - hole_area;
        if area <= 0.0 {
            return Err(GeometryError::ZeroArea);
        }
        let bbox = BoundingBox::from_points(&exterior).expect("ring has vertices");
        Ok(Polygon {
            exterior,
            holes: normalized_holes,
            area,
            bbox,
        })
    }

    /// Axis-aligned rectangle, convenient for tests and fixtures.
    pub fn rectangle(min: Point2, max: Point2) -> Result<Self, GeometryError> {
        Polygon::new(
            vec![
                min,
                Point2::new(max.x, min.y),
                max,
                Point2::new(min.x, max.y),
            ],
            vec![],
        )
    }

    pub fn exterior(&self) -> &[Point2] {
        &self.exterior
    }

    pub fn holes(&self) -> &[Vec<Point2>] {
        &self.holes
    }

    pub fn rings(&self) -> impl Iterator<Item = &[Point2]> {
        std::iter::once(self.exterior.as_slice()).chain(self.holes.iter().map(|h| h.as_slice()))
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn bbox(&self) -> BoundingBox {
        self.bbox
    }

    /// Inside-or-on test against the exterior minus holes.
    pub fn contains(&self, p: Point2) -> bool {
        point_in_ring(p, &self.exterior) != Containment::Outside
            && self
                .holes
                .iter()
                .all(|h| point_in_ring(p, h) != Containment::Inside)
    }

    pub fn scaled(&self, s: f64) -> Result<Polygon, GeometryError> {
        Polygon::new(
            self.exterior.iter().map(|p| *p * s).collect(),
            self.holes
                .iter()
                .map(|h| h.iter().map(|p| *p * s).collect())
                .collect(),
        )
    }

    pub fn translated(&self, offset: Point2) -> Result<Polygon, GeometryError> {
        Polygon::new(
            self.exterior.iter().map(|p| *p + offset).collect(),
            self.holes
                .iter()
                .map(|h| h.iter().map(|p| *p + offset).collect())
                .collect(),
        )
    }
}

pub fn polygon_area(p: &Polygon) -> f64 {
    p.area()
}

/// Shoelace signed area, positive for counter-clockwise rings.
pub fn signed_area(ring: &[Point2]) -> f64 {
    let n = ring.len();
    if n < 3 {
        return 0.0;
    }
    // Centre on the first vertex to limit cancellation for far-off coordinates.
    let o = ring[0];
    let mut twice = 0.0;
    for i in 1..n - 1 {
        twice += (ring[i] - o).cross(ring[i + 1] - o);
    }
    twice / 2.0
}

fn normalize_ring(mut ring: Vec<Point2>) -> Result<Vec<Point2>, GeometryError> {
    if ring.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    for p in ring.iter_mut() {
        *p = p.snapped(SNAP_GRID);
    }
    ring.dedup();
    while ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }
    if ring.len() < 3 {
        return Err(GeometryError::DegenerateRing);
    }
    Ok(ring)
}

fn oriented(mut ring: Vec<Point2>, area: f64, ccw: bool) -> Vec<Point2> {
    if (area > 0.0) != ccw {
        ring.reverse();
    }
    ring
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(p: Point2, a: Point2, b: Point2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test, touching and collinear overlap included.
pub(crate) fn segments_intersect(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(p1, q1, q2))
        || (d2 == 0.0 && on_segment(p2, q1, q2))
        || (d3 == 0.0 && on_segment(q1, p1, p2))
        || (d4 == 0.0 && on_segment(q2, p1, p2))
}

/// Proper crossing only: the interiors of both segments intersect at one point.
fn segments_cross(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn seg_bbox_overlap(p1: Point2, p2: Point2, q1: Point2, q2: Point2) -> bool {
    p1.x.min(p2.x) <= q1.x.max(q2.x)
        && q1.x.min(q2.x) <= p1.x.max(p2.x)
        && p1.y.min(p2.y) <= q1.y.max(q2.y)
        && q1.y.min(q2.y) <= p1.y.max(p2.y)
}

/// First pair of ring edges that touch or cross other than at their shared vertex.
pub(crate) fn find_self_intersection(ring: &[Point2]) -> Option<(usize, usize)> {
    let n = ring.len();
    let edge = |i: usize| (ring[i], ring[(i + 1) % n]);
    for i in 0..n {
        let (a1, a2) = edge(i);
        // Adjacent edge folding back on itself (a spike).
        let (_, b2) = edge((i + 1) % n);
        if orient(a1, a2, b2) == 0.0 && (a1 - a2).dot(b2 - a2) > 0.0 {
            return Some((i, (i + 1) % n));
        }
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (b1, b2) = edge(j);
            if seg_bbox_overlap(a1, a2, b1, b2) && segments_intersect(a1, a2, b1, b2) {
                return Some((i, j));
            }
        }
    }
    None
}

fn rings_cross(a: &[Point2], b: &[Point2]) -> bool {
    let (na, nb) = (a.len(), b.len());
    (0..na).any(|i| {
        let (p1, p2) = (a[i], a[(i + 1) % na]);
        (0..nb).any(|j| {
            let (q1, q2) = (b[j], b[(j + 1) % nb]);
            seg_bbox_overlap(p1, p2, q1, q2) && segments_cross(p1, p2, q1, q2)
        })
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Containment {
    Inside,
    Boundary,
    Outside,
}

/// Crossing-number point-in-ring test with explicit boundary detection.
pub(crate) fn point_in_ring(p: Point2, ring: &[Point2]) -> Containment {
    let n = ring.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        if orient(a, b, p) == 0.0 && on_segment(p, a, b) {
            return Containment::Boundary;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    if inside {
        Containment::Inside
    } else {
        Containment::Outside
    }
}
