use geojson::{Feature, FeatureCollection, Geometry, JsonObject, Value as GeoValue};
use serde_json::Value;

use super::attributes::{as_integer, read_attributes};
use super::{BuildingRecord, IngestError, RoadAttributes, RoadSegmentRecord};
use crate::geometry::{GeoPoint, GeometryError, LocalProjection, Polygon, Polyline};

/// A feature part still in geographic coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoBuilding {
    pub feature_index: usize,
    pub building_id: i64,
    pub exterior: Vec<GeoPoint>,
    pub holes: Vec<Vec<GeoPoint>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeoRoad {
    pub feature_index: usize,
    pub road_id: i64,
    pub attributes: RoadAttributes,
    pub coordinates: Vec<GeoPoint>,
}

/// Features read from one document, before projection.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoLayer<T> {
    pub features: Vec<T>,
    pub warnings: Vec<String>,
}

/// Projected records plus the origin used for the projection.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    /// `None` only when the document held no geometry and no origin was given.
    pub origin: Option<GeoPoint>,
    pub warnings: Vec<String>,
}

const BUILDING_ID_KEYS: &[&str] = &["building_id", "BuildingId", "bldg_id", "id"];
const ROAD_ID_KEYS: &[&str] = &["road_id", "id"];

fn json_error(document: &[u8], err: &serde_json::Error) -> IngestError {
    let line_start = if err.line() <= 1 {
        0
    } else {
        document
            .iter()
            .enumerate()
            .filter(|(_, b)| **b == b'\n')
            .nth(err.line() - 2)
            .map_or(document.len(), |(i, _)| i + 1)
    };
    let offset = (line_start + err.column().saturating_sub(1)).min(document.len());
    IngestError::Json {
        offset,
        message: err.to_string(),
    }
}

/// Parse a FeatureCollection and return its features as raw JSON values.
fn feature_values(document: &[u8]) -> Result<Vec<Value>, IngestError> {
    let root: Value = serde_json::from_slice(document).map_err(|e| json_error(document, &e))?;
    let Value::Object(mut obj) = root else {
        return Err(IngestError::NotFeatureCollection(
            "top-level value is not an object".into(),
        ));
    };
    match obj.get("type") {
        Some(Value::String(t)) if t == "FeatureCollection" => {}
        Some(other) => {
            return Err(IngestError::NotFeatureCollection(format!(
                "\"type\" is {other}"
            )))
        }
        None => {
            return Err(IngestError::NotFeatureCollection(
                "missing \"type\" member".into(),
            ))
        }
    }
    match obj.remove("features") {
        Some(Value::Array(features)) => Ok(features),
        _ => Err(IngestError::NotFeatureCollection(
            "missing \"features\" array".into(),
        )),
    }
}

fn parse_feature(index: usize, value: Value) -> Result<Feature, IngestError> {
    Feature::from_json_value(value).map_err(|e| IngestError::Feature {
        index,
        reason: e.to_string(),
    })
}

fn feature_integer_id(feature: &Feature, keys: &[&str]) -> Option<i64> {
    let props = feature.properties.as_ref();
    keys.iter()
        .find_map(|k| props.and_then(|p| p.get(*k)).and_then(as_integer))
        .or_else(|| match &feature.id {
            Some(geojson::feature::Id::Number(n)) => n.as_i64(),
            Some(geojson::feature::Id::String(s)) => s.trim().parse().ok(),
            None => None,
        })
}

fn geo_point(index: usize, position: &[f64]) -> Result<GeoPoint, IngestError> {
    if position.len() < 2 {
        return Err(IngestError::Feature {
            index,
            reason: "position has fewer than two coordinates".into(),
        });
    }
    GeoPoint::new(position[0], position[1])
        .map_err(|source| IngestError::Geometry { index, source })
}

fn geo_ring(index: usize, ring: &[Vec<f64>]) -> Result<Vec<GeoPoint>, IngestError> {
    ring.iter().map(|p| geo_point(index, p)).collect()
}

/// Read building footprints (Polygon / MultiPolygon features) without projecting.
pub fn read_building_features(document: &[u8]) -> Result<GeoLayer<GeoBuilding>, IngestError> {
    let mut features = Vec::new();
    let mut warnings = Vec::new();
    for (index, value) in feature_values(document)?.into_iter().enumerate() {
        let feature = parse_feature(index, value)?;
        let building_id = feature_integer_id(&feature, BUILDING_ID_KEYS).unwrap_or(index as i64);
        let Some(geometry) = &feature.geometry else {
            warnings.push(format!("feature {index}: null geometry skipped"));
            continue;
        };
        let polygons: Vec<&Vec<Vec<Vec<f64>>>> = match &geometry.value {
            GeoValue::Polygon(rings) => vec![rings],
            GeoValue::MultiPolygon(parts) => parts.iter().collect(),
            other => {
                return Err(IngestError::Feature {
                    index,
                    reason: format!("expected Polygon or MultiPolygon, found {}", other.type_name()),
                })
            }
        };
        if polygons.iter().all(|rings| rings.is_empty()) {
            warnings.push(format!("feature {index}: empty polygon skipped"));
            continue;
        }
        for rings in polygons {
            let Some((exterior, holes)) = rings.split_first() else {
                return Err(IngestError::Feature {
                    index,
                    reason: "polygon part without rings".into(),
                });
            };
            features.push(GeoBuilding {
                feature_index: index,
                building_id,
                exterior: geo_ring(index, exterior)?,
                holes: holes
                    .iter()
                    .map(|h| geo_ring(index, h))
                    .collect::<Result<_, _>>()?,
            });
        }
    }
    Ok(GeoLayer { features, warnings })
}

/// Read road centerlines (LineString / MultiLineString features) without projecting.
pub fn read_road_features(document: &[u8]) -> Result<GeoLayer<GeoRoad>, IngestError> {
    let mut features = Vec::new();
    let mut warnings = Vec::new();
    for (index, value) in feature_values(document)?.into_iter().enumerate() {
        let feature = parse_feature(index, value)?;
        let Some(geometry) = &feature.geometry else {
            warnings.push(format!("feature {index}: null geometry skipped"));
            continue;
        };
        let lines: Vec<&Vec<Vec<f64>>> = match &geometry.value {
            GeoValue::LineString(line) => vec![line],
            GeoValue::MultiLineString(lines) => lines.iter().collect(),
            other => {
                return Err(IngestError::Feature {
                    index,
                    reason: format!(
                        "expected LineString or MultiLineString, found {}",
                        other.type_name()
                    ),
                })
            }
        };
        let road_id = feature_integer_id(&feature, ROAD_ID_KEYS).unwrap_or(index as i64);
        let mut attr_warnings = Vec::new();
        let attributes = read_attributes(feature.properties.as_ref(), &mut attr_warnings);
        warnings.extend(
            attr_warnings
                .into_iter()
                .map(|w| format!("feature {index}: {w}")),
        );
        for line in lines {
            if line.len() < 2 {
                return Err(IngestError::Feature {
                    index,
                    reason: format!("line has {} position(s), at least 2 required", line.len()),
                });
            }
            features.push(GeoRoad {
                feature_index: index,
                road_id,
                attributes,
                coordinates: geo_ring(index, line)?,
            });
        }
    }
    Ok(GeoLayer { features, warnings })
}

/// Centre of the lon/lat bounding box of `points`.
pub fn layer_origin<'a>(points: impl IntoIterator<Item = &'a GeoPoint>) -> Option<GeoPoint> {
    let mut iter = points.into_iter();
    let first = iter.next()?;
    let (mut lo, mut hi) = (*first, *first);
    for p in iter {
        lo.lon = lo.lon.min(p.lon);
        lo.lat = lo.lat.min(p.lat);
        hi.lon = hi.lon.max(p.lon);
        hi.lat = hi.lat.max(p.lat);
    }
    Some(GeoPoint {
        lon: (lo.lon + hi.lon) / 2.0,
        lat: (lo.lat + hi.lat) / 2.0,
    })
}

fn projection(origin: GeoPoint) -> Result<LocalProjection, IngestError> {
    LocalProjection::new(origin).map_err(|source| IngestError::Geometry { index: 0, source })
}

pub(crate) fn project_buildings(
    features: &[GeoBuilding],
    origin: GeoPoint,
) -> Result<Vec<BuildingRecord>, IngestError> {
    let proj = projection(origin)?;
    features
        .iter()
        .map(|b| {
            let index = b.feature_index;
            let wrap = |source: GeometryError| IngestError::Geometry { index, source };
            let ring = |r: &[GeoPoint]| -> Result<Vec<_>, IngestError> {
                r.iter().map(|p| proj.forward(*p).map_err(wrap)).collect()
            };
            let footprint = Polygon::new(
                ring(&b.exterior)?,
                b.holes.iter().map(|h| ring(h)).collect::<Result<_, _>>()?,
            )
            .map_err(wrap)?;
            Ok(BuildingRecord {
                building_id: b.building_id,
                footprint,
            })
        })
        .collect()
}

pub(crate) fn project_roads(
    features: &[GeoRoad],
    origin: GeoPoint,
    warnings: &mut Vec<String>,
) -> Result<Vec<RoadSegmentRecord>, IngestError> {
    let proj = projection(origin)?;
    let mut out = Vec::with_capacity(features.len());
    for r in features {
        let index = r.feature_index;
        let points = r
            .coordinates
            .iter()
            .map(|p| proj.forward(*p))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|source| IngestError::Geometry { index, source })?;
        match Polyline::from_points_dedup(points) {
            Ok(geometry) => out.push(RoadSegmentRecord {
                road_id: r.road_id,
                geometry,
                attributes: r.attributes,
            }),
            Err(GeometryError::TooFewVertices) => {
                warnings.push(format!("feature {index}: zero-length line skipped"))
            }
            Err(source) => return Err(IngestError::Geometry { index, source }),
        }
    }
    Ok(out)
}

/// Parse building footprints and project them about `origin`, or about the
/// centre of the document's own extent when no origin is given.
pub fn parse_buildings(
    document: &[u8],
    origin: Option<GeoPoint>,
) -> Result<Parsed<BuildingRecord>, IngestError> {
    let layer = read_building_features(document)?;
    let origin = origin.or_else(|| layer_origin(layer.features.iter().flat_map(|b| &b.exterior)));
    let records = match origin {
        Some(o) => project_buildings(&layer.features, o)?,
        None => Vec::new(),
    };
    Ok(Parsed {
        records,
        origin,
        warnings: layer.warnings,
    })
}

/// Parse road centerlines and project them; see [`parse_buildings`] for the origin rule.
pub fn parse_roads(
    document: &[u8],
    origin: Option<GeoPoint>,
) -> Result<Parsed<RoadSegmentRecord>, IngestError> {
    let mut layer = read_road_features(document)?;
    let origin =
        origin.or_else(|| layer_origin(layer.features.iter().flat_map(|r| &r.coordinates)));
    let records = match origin {
        Some(o) => project_roads(&layer.features, o, &mut layer.warnings)?,
        None => Vec::new(),
    };
    Ok(Parsed {
        records,
        origin,
        warnings: layer.warnings,
    })
}

fn position(proj: &LocalProjection, p: crate::geometry::Point2) -> Vec<f64> {
    let g = proj.inverse(p);
    vec![g.lon, g.lat]
}

fn closed_ring(proj: &LocalProjection, ring: &[crate::geometry::Point2]) -> Vec<Vec<f64>> {
    ring.iter()
        .chain(ring.first())
        .map(|p| position(proj, *p))
        .collect()
}

fn feature(value: GeoValue, properties: JsonObject) -> Feature {
    Feature {
        bbox: None,
        geometry: Some(Geometry::new(value)),
        id: None,
        properties: Some(properties),
        foreign_members: None,
    }
}

/// Serialize building records back to lon/lat, one Polygon feature per record.
pub fn buildings_to_geojson(records: &[BuildingRecord], proj: &LocalProjection) -> FeatureCollection {
    let features = records
        .iter()
        .map(|b| {
            let rings = b
                .footprint
                .rings()
                .map(|r| closed_ring(proj, r))
                .collect();
            let mut props = JsonObject::new();
            props.insert("building_id".into(), b.building_id.into());
            feature(GeoValue::Polygon(rings), props)
        })
        .collect();
    FeatureCollection {
        bbox: None,
        features,
        foreign_members: None,
    }
}

/// Serialize road records back to lon/lat with their integer attribute codes.
pub fn roads_to_geojson(records: &[RoadSegmentRecord], proj: &LocalProjection) -> FeatureCollection {
    let features = records
        .iter()
        .map(|r| {
            let line = r
                .geometry
                .vertices()
                .iter()
                .map(|p| position(proj, *p))
                .collect();
            let mut props = JsonObject::new();
            props.insert("road_id".into(), r.road_id.into());
            props.insert("road_type".into(), r.attributes.road_type.code().into());
            props.insert("paved".into(), r.attributes.paved.code().into());
            props.insert("bridge_type".into(), r.attributes.bridge_type.code().into());
            props.insert("lane_number".into(), r.attributes.lane_number.into());
            feature(GeoValue::LineString(line), props)
        })
        .collect();
    FeatureCollection {
        bbox: None,
        features,
        foreign_members: None,
    }
}
