use geojson::{Feature, FeatureCollection, Geometry, JsonObject, Value as GeoValue};

use super::RoadGraph;
use crate::geometry::{LocalProjection, Point2};

/// Debug export: nodes as Points with their kind, edges as LineStrings.
///
/// With a projection the output is lon/lat; without one, coordinates stay
/// in the local metric frame.
pub fn graph_to_geojson(graph: &RoadGraph, projection: Option<&LocalProjection>) -> FeatureCollection {
    let pos = |p: Point2| match projection {
        Some(proj) => {
            let g = proj.inverse(p);
            vec![g.lon, g.lat]
        }
        None => vec![p.x, p.y],
    };
    let mut features = Vec::with_capacity(graph.node_count() + graph.edge_count());
    for (i, n) in graph.nodes().iter().enumerate() {
        let mut props = JsonObject::new();
        props.insert("node_id".into(), i.into());
        props.insert("kind".into(), n.kind.as_str().into());
        features.push(feature(GeoValue::Point(pos(n.position)), props));
    }
    for (i, e) in graph.edges().iter().enumerate() {
        let mut props = JsonObject::new();
        props.insert("edge_id".into(), i.into());
        props.insert("a".into(), e.a.into());
        props.insert("b".into(), e.b.into());
        props.insert("length_m".into(), e.length.into());
        let line = e.geometry.vertices().iter().map(|p| pos(*p)).collect();
        features.push(feature(GeoValue::LineString(line), props));
    }
    FeatureCollection {
        bbox: None,
        features,
        foreign_members: None,
    }
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
