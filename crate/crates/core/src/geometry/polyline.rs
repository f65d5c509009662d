use super::{BoundingBox, GeometryError, Point2};

/// Cut positions closer than this to an existing vertex reuse the vertex.
const VERTEX_EPS: f64 = 1e-9;

/// An open chain of at least two vertices with no consecutive duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    vertices: Vec<Point2>,
}

/// Closest point of a polyline to a query point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolylineProjection {
    pub distance: f64,
    pub nearest: Point2,
    pub segment_index: usize,
    /// Position within the segment, in `[0, 1]`.
    pub param: f64,
}

impl Polyline {
    pub fn new(vertices: Vec<Point2>) -> Result<Self, GeometryError> {
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if vertices.len() < 2 {
            return Err(GeometryError::TooFewVertices);
        }
        if let Some(i) = vertices.windows(2).position(|w| w[0] == w[1]) {
            return Err(GeometryError::DuplicateVertex(i + 1));
        }
        Ok(Polyline { vertices })
    }

    /// Like [`Polyline::new`], but silently drops consecutive duplicates first.
    pub fn from_points_dedup(mut vertices: Vec<Point2>) -> Result<Self, GeometryError> {
        vertices.dedup();
        Self::new(vertices)
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn into_vertices(self) -> Vec<Point2> {
        self.vertices
    }

    pub fn start(&self) -> Point2 {
        self.vertices[0]
    }

    pub fn end(&self) -> Point2 {
        self.vertices[self.vertices.len() - 1]
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| a.distance(b)).sum()
    }

    pub fn bbox(&self) -> BoundingBox {
        BoundingBox::from_points(&self.vertices).expect("polyline has vertices")
    }

    pub fn reversed(&self) -> Polyline {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Polyline { vertices }
    }

    pub fn translated(&self, offset: Point2) -> Polyline {
        Polyline {
            vertices: self.vertices.iter().map(|p| *p + offset).collect(),
        }
    }

    /// Replace the first and last vertex, dropping neighbours that collapse onto them.
    ///
    /// Fails when the result would have fewer than two distinct vertices.
    pub fn with_endpoints(&self, start: Point2, end: Point2) -> Result<Polyline, GeometryError> {
        let mut vertices = self.vertices.clone();
        let last = vertices.len() - 1;
        vertices[0] = start;
        vertices[last] = end;
        Polyline::from_points_dedup(vertices)
    }

    /// Nearest point on the polyline; the first segment wins exact ties.
    pub fn project_point(&self, p: Point2) -> PolylineProjection {
        let mut best: Option<PolylineProjection> = None;
        for (i, (a, b)) in self.segments().enumerate() {
            let (nearest, param) = closest_on_segment(p, a, b);
            let distance = p.distance(nearest);
            if best.is_none_or(|b| distance < b.distance) {
                best = Some(PolylineProjection {
                    distance,
                    nearest,
                    segment_index: i,
                    param,
                });
            }
        }
        best.expect("polyline has at least one segment")
    }

    /// Arc length from the start to `(segment_index, param)`.
    pub fn distance_along(&self, segment_index: usize, param: f64) -> f64 {
        let before: f64 = self
            .segments()
            .take(segment_index)
            .map(|(a, b)| a.distance(b))
            .sum();
        let (a, b) = (
            self.vertices[segment_index],
            self.vertices[segment_index + 1],
        );
        before + a.distance(b) * param
    }

    /// Point at arc length `d`, clamped to the ends.
    pub fn point_at(&self, d: f64) -> Point2 {
        let mut walked = 0.0;
        for (a, b) in self.segments() {
            let len = a.distance(b);
            if d <= walked + len {
                return a.lerp(b, ((d - walked) / len).clamp(0.0, 1.0));
            }
            walked += len;
        }
        self.end()
    }

    /// Split at arc length `d`.
    ///
    /// Returns `None` when `d` is within `1e-9` m of either end, since one
    /// of the pieces would be degenerate. A cut that lands on an interior
    /// vertex reuses that vertex.
    pub fn split_at_distance(&self, d: f64) -> Option<(Polyline, Polyline)> {
        let total = self.length();
        if !(d > VERTEX_EPS && d < total - VERTEX_EPS) {
            return None;
        }
        let mut walked = 0.0;
        for (i, (a, b)) in self.segments().enumerate() {
            let len = a.distance(b);
            let local = d - walked;
            if local <= len {
                let mut head: Vec<Point2> = self.vertices[..=i].to_vec();
                let mut tail: Vec<Point2> = Vec::with_capacity(self.vertices.len() - i + 1);
                let cut = if local <= VERTEX_EPS {
                    a
                } else if len - local <= VERTEX_EPS {
                    b
                } else {
                    a.lerp(b, local / len)
                };
                if cut != a {
                    head.push(cut);
                }
                tail.push(cut);
                if cut == b {
                    tail.extend_from_slice(&self.vertices[i + 2..]);
                } else {
                    tail.extend_from_slice(&self.vertices[i + 1..]);
                }
                return Some((Polyline { vertices: head }, Polyline { vertices: tail }));
            }
            walked += len;
        }
        None
    }
}

/// Closest point to `p` on segment `ab`, with its clamped parameter.
pub fn closest_on_segment(p: Point2, a: Point2, b: Point2) -> (Point2, f64) {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return (a, 0.0);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    let nearest = if t == 0.0 {
        a
    } else if t == 1.0 {
        b
    } else {
        a.lerp(b, t)
    };
    (nearest, t)
}

/// Distance from `p` to the segment `ab`.
pub fn segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    p.distance(closest_on_segment(p, a, b).0)
}

pub fn polyline_length(line: &Polyline) -> f64 {
    line.length()
}

pub fn point_to_polyline(point: Point2, line: &Polyline) -> PolylineProjection {
    line.project_point(point)
}
