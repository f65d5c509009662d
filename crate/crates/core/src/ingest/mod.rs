//! Ground-truth and proposal ingestion.
//!
//! Building footprints arrive as Polygon / MultiPolygon features and road
//! centerlines as LineString / MultiLineString features, both in WGS84
//! lon/lat. Records are projected into a tile-local metric frame; truth and
//! proposal layers of one tile share the same origin.

mod attributes;
mod geojson_io;
mod tiles;

use std::path::PathBuf;

use thiserror::Error;

use crate::geometry::{GeometryError, Polygon, Polyline};

pub use attributes::{BridgeType, RoadAttributes, RoadType, Surface};
pub use geojson_io::{
    buildings_to_geojson, layer_origin, parse_buildings, parse_roads, read_building_features,
    read_road_features, roads_to_geojson, GeoBuilding, GeoLayer, GeoRoad, Parsed,
};
pub use tiles::{
    list_tile_files, load_building_tile, load_road_tile, pair_tiles, Pairing, TileIdPattern,
    TileKey, TilePair, TileSet, DEFAULT_TILE_PATTERN,
};

/// One labeled (or proposed) road centerline in tile-local meters.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadSegmentRecord {
    pub road_id: i64,
    pub geometry: Polyline,
    pub attributes: RoadAttributes,
}

/// One building footprint part in tile-local meters. Parts of a
/// MultiPolygon share their `building_id`.
#[derive(Debug, Clone, PartialEq)]
pub struct BuildingRecord {
    pub building_id: i64,
    pub footprint: Polygon,
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("malformed JSON at byte {offset}: {message}")]
    Json { offset: usize, message: String },
    #[error("not a GeoJSON FeatureCollection: {0}")]
    NotFeatureCollection(String),
    #[error("feature {index}: {reason}")]
    Feature { index: usize, reason: String },
    #[error("feature {index}: {source}")]
    Geometry {
        index: usize,
        #[source]
        source: GeometryError,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<IngestError>,
    },
    #[error("duplicate tile id {tile_id} in {dir}: {first} and {second}")]
    DuplicateTile {
        tile_id: String,
        dir: PathBuf,
        first: PathBuf,
        second: PathBuf,
    },
    #[error("invalid tile-id pattern: {0}")]
    Pattern(String),
}

impl IngestError {
    pub(crate) fn in_file(self, path: impl Into<PathBuf>) -> IngestError {
        IngestError::File {
            path: path.into(),
            source: Box::new(self),
        }
    }

    /// Innermost error, with file context stripped.
    pub fn root(&self) -> &IngestError {
        match self {
            IngestError::File { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for errors caused by conflicting tile ids.
    pub fn is_tile_conflict(&self) -> bool {
        matches!(self.root(), IngestError::DuplicateTile { .. })
    }

    /// True for errors caused by unreadable paths or bad configuration.
    pub fn is_configuration(&self) -> bool {
        matches!(self.root(), IngestError::Io { .. } | IngestError::Pattern(_))
    }
}
