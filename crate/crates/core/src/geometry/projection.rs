//! Local equirectangular projection between WGS84 lon/lat and tile meters.

use serde::{Deserialize, Serialize};

use super::{GeometryError, Point2};

/// Equatorial radius used for the spherical projection (meters).
pub const EARTH_RADIUS_M: f64 = 6_378_137.0;

/// Largest lon/lat offset from the origin accepted by the projection.
pub const MAX_OFFSET_DEG: f64 = 1.0;

/// Origins closer to the poles than this make the east scale degenerate.
const MAX_ORIGIN_LAT: f64 = 89.0;

/// A geographic coordinate in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    pub lon: f64,
    pub lat: f64,
}

impl GeoPoint {
    pub fn new(lon: f64, lat: f64) -> Result<Self, GeometryError> {
        if !(lon.is_finite() && lat.is_finite())
            || !(-180.0..=180.0).contains(&lon)
            || !(-90.0..=90.0).contains(&lat)
        {
            return Err(GeometryError::InvalidGeoPoint { lon, lat });
        }
        Ok(GeoPoint { lon, lat })
    }
}

/// Equirectangular projection about a fixed origin.
///
/// `x = R·cos(lat0)·Δlon`, `y = R·Δlat`. At tile scale (a few hundred meters)
/// the distortion against a proper conformal projection is far below a
/// centimeter, and the mapping is exactly invertible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalProjection {
    origin: GeoPoint,
    east_scale: f64,
    north_scale: f64,
}

impl LocalProjection {
    pub fn new(origin: GeoPoint) -> Result<Self, GeometryError> {
        if origin.lat.abs() > MAX_ORIGIN_LAT {
            return Err(GeometryError::OutsideExtent {
                lon: origin.lon,
                lat: origin.lat,
            });
        }
        let north_scale = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;
        Ok(LocalProjection {
            origin,
            east_scale: north_scale * origin.lat.to_radians().cos(),
            north_scale,
        })
    }

    pub fn origin(&self) -> GeoPoint {
        self.origin
    }

    pub fn forward(&self, p: GeoPoint) -> Result<Point2, GeometryError> {
        let dlon = wrap_degrees(p.lon - self.origin.lon);
        let dlat = p.lat - self.origin.lat;
        if dlon.abs() > MAX_OFFSET_DEG || dlat.abs() > MAX_OFFSET_DEG {
            return Err(GeometryError::OutsideExtent {
                lon: p.lon,
                lat: p.lat,
            });
        }
        Ok(Point2::new(dlon * self.east_scale, dlat * self.north_scale))
    }

    pub fn inverse(&self, p: Point2) -> GeoPoint {
        GeoPoint {
            lon: wrap_degrees(self.origin.lon + p.x / self.east_scale),
            lat: self.origin.lat + p.y / self.north_scale,
        }
    }
}

/// Map an angle difference into (-180, 180].
fn wrap_degrees(d: f64) -> f64 {
    if d > 180.0 {
        d - 360.0
    } else if d <= -180.0 {
        d + 360.0
    } else {
        d
    }
}

/// Project geographic points into the local metric frame of `origin`.
pub fn project_to_local(
    points: &[GeoPoint],
    origin: GeoPoint,
) -> Result<Vec<Point2>, GeometryError> {
    let proj = LocalProjection::new(origin)?;
    points.iter().map(|p| proj.forward(*p)).collect()
}
