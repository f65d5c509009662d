//! Planar geometry in projected meters: projection, polylines, polygons and IoU.
//!
//! All types are immutable after construction.

mod clip;
mod point;
mod polygon;
mod polyline;
mod projection;

use thiserror::Error;

pub use clip::{iou, polygon_intersection_area};
pub use point::{BoundingBox, Point2};
pub use polygon::{polygon_area, signed_area, Polygon, SNAP_GRID};
pub use polyline::{
    closest_on_segment, point_to_polyline, polyline_length, segment_distance, Polyline,
    PolylineProjection,
};
pub use projection::{project_to_local, GeoPoint, LocalProjection, EARTH_RADIUS_M, MAX_OFFSET_DEG};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("invalid geographic coordinate ({lon}, {lat})")]
    InvalidGeoPoint { lon: f64, lat: f64 },
    #[error("coordinate ({lon}, {lat}) is outside the projection window of the tile origin")]
    OutsideExtent { lon: f64, lat: f64 },
    #[error("polyline needs at least two distinct vertices")]
    TooFewVertices,
    #[error("repeated consecutive vertex at index {0}")]
    DuplicateVertex(usize),
    #[error("ring has fewer than three distinct vertices")]
    DegenerateRing,
    #[error("ring has zero area")]
    ZeroArea,
    #[error("ring is self-intersecting (edges {0} and {1})")]
    SelfIntersection(usize, usize),
    #[error("hole {0} is degenerate or self-intersecting")]
    DegenerateHole(usize),
    #[error("hole {0} is not inside the exterior ring")]
    HoleOutside(usize),
    #[error("holes {0} and {1} overlap")]
    HolesOverlap(usize, usize),
    #[error("IoU is undefined for two zero-area regions")]
    UndefinedIou,
}
